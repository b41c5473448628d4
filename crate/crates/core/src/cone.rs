//! Closed convex cones: Euclidean projection, dual-cone residuals and the
//! generator-space reduction for finitely generated cones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tensor::{norm, TensorPair};

/// Relative singular-value threshold for the generator independence test.
pub const RANK_TOL: f64 = 1e-10;
const NNLS_TOL: f64 = 1e-10;

/// Generator matrix `C` (p rows, n columns, row-major). Row j is the generator c_j,
/// so the cone is `{ C^T alpha : alpha >= 0 }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generators {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Generators {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::InvalidShape("generator matrix needs at least one row".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidShape("generators must have at least one column".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "generator rows",
                expected: n,
                found: bad.len(),
            });
        }
        let g = Generators {
            rows: p,
            cols: n,
            data: rows.into_iter().flatten().collect(),
        };
        let rank = g.rank();
        if rank < p {
            return Err(Error::RankDeficient { rank, rows: p });
        }
        Ok(g)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Generators {
            rows: n,
            cols: n,
            data,
        }
    }

    /// Number of generators p.
    pub fn count(&self) -> usize {
        self.rows
    }

    /// Ambient dimension n.
    pub fn ambient_dim(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|j| self.row(j).to_vec()).collect()
    }

    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn rank(&self) -> usize {
        let sv = self.matrix().singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
    }

    /// `C y`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|j| self.row(j).iter().zip(y).map(|(c, v)| c * v).sum())
            .collect()
    }

    /// `C^T alpha`.
    pub fn apply_transpose(&self, alpha: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        for (j, &a) in alpha.iter().enumerate() {
            for (xi, c) in x.iter_mut().zip(self.row(j)) {
                *xi += a * c;
            }
        }
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cone {
    /// The nonnegative orthant R^n_+.
    Orthant { dim: usize },
    /// `cone{c_1, ..., c_p}` with linearly independent generators.
    Polyhedral(Generators),
    /// `{ (v, t) : ||v|| <= t }` with the last coordinate as t.
    SecondOrder { dim: usize },
}

impl Cone {
    pub fn orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidShape("cone dimension must be at least 1".into()));
        }
        Ok(Cone::Orthant { dim })
    }

    pub fn second_order(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidShape("cone dimension must be at least 1".into()));
        }
        Ok(Cone::SecondOrder { dim })
    }

    pub fn polyhedral(rows: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Cone::Polyhedral(Generators::new(rows)?))
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Cone::Orthant { dim } | Cone::SecondOrder { dim } => *dim,
            Cone::Polyhedral(g) => g.ambient_dim(),
        }
    }

    fn check(&self, z: &[f64], context: &'static str) -> Result<()> {
        if z.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.ambient_dim(),
                found: z.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z, "Cone::project")?;
        Ok(match self {
            Cone::Orthant { .. } => z.iter().map(|v| v.max(0.0)).collect(),
            Cone::SecondOrder { .. } => project_soc(z),
            Cone::Polyhedral(g) => {
                let alpha = nnls(g, z)?;
                g.apply_transpose(&alpha)
            }
        })
    }

    /// `||x - P_K x||`.
    pub fn membership_residual(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(x.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
    }

    /// Violation of `y in K*`; zero exactly when y lies in the dual cone.
    pub fn dual_residual(&self, y: &[f64]) -> Result<f64> {
        self.check(y, "Cone::dual_residual")?;
        Ok(match self {
            Cone::Orthant { .. } => negative_part_norm(y),
            Cone::Polyhedral(g) => negative_part_norm(&g.apply(y)),
            // the second-order cone is self-dual
            Cone::SecondOrder { .. } => {
                let p = project_soc(y);
                y.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            }
        })
    }

    /// The dual cone, when it has a representation here.
    ///
    /// A square generator matrix gives `K* = { w : C w >= 0 }`, generated by the rows of `C^{-T}`.
    pub fn dual(&self) -> Option<Cone> {
        match self {
            Cone::Orthant { .. } | Cone::SecondOrder { .. } => Some(self.clone()),
            Cone::Polyhedral(g) if g.count() == g.ambient_dim() => {
                let inv = g.matrix().try_inverse()?;
                let rows = (0..g.count())
                    .map(|j| inv.column(j).iter().cloned().collect())
                    .collect();
                Generators::new(rows).ok().map(Cone::Polyhedral)
            }
            Cone::Polyhedral(_) => None,
        }
    }
}

fn negative_part_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.min(0.0).powi(2)).sum::<f64>().sqrt()
}

fn project_soc(z: &[f64]) -> Vec<f64> {
    let (t, v) = z.split_last().expect("nonempty");
    let nv = norm(v);
    if nv <= *t {
        z.to_vec()
    } else if nv <= -*t {
        vec![0.0; z.len()]
    } else {
        let scale = (nv + t) / 2.0;
        let mut out: Vec<f64> = v.iter().map(|x| scale * x / nv).collect();
        out.push(scale);
        out
    }
}

/// Lawson–Hanson active-set NNLS for `min ||C^T alpha - z||, alpha >= 0`.
///
/// Returns the coefficient vector alpha. Capped at `200 p` iterations.
pub fn nnls(g: &Generators, z: &[f64]) -> Result<Vec<f64>> {
    let p = g.count();
    let cap = 200 * p;
    let col_scale = (0..p).map(|j| norm(g.row(j))).fold(0.0, f64::max);
    let tol = NNLS_TOL * col_scale * norm(z).max(1.0);

    let mut alpha = vec![0.0; p];
    let mut passive = vec![false; p];
    let mut iterations = 0;
    let gradient = |alpha: &[f64]| -> Vec<f64> {
        let r: Vec<f64> = z.iter().zip(g.apply_transpose(alpha)).map(|(a, b)| a - b).collect();
        g.apply(&r)
    };

    loop {
        let w = gradient(&alpha);
        let entering = (0..p)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = entering else { break };
        passive[j] = true;

        loop {
            iterations += 1;
            if iterations > cap {
                return Err(Error::ProjectionNotConverged { iterations: cap });
            }
            let s = passive_least_squares(g, z, &passive)?;
            if (0..p).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                alpha = s;
                break;
            }
            let theta = (0..p)
                .filter(|&i| passive[i] && s[i] <= 0.0)
                .map(|i| alpha[i] / (alpha[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            for i in 0..p {
                alpha[i] += theta * (s[i] - alpha[i]);
                if passive[i] && alpha[i] <= 1e-15 {
                    passive[i] = false;
                    alpha[i] = 0.0;
                }
            }
        }
    }
    Ok(alpha)
}

fn passive_least_squares(g: &Generators, z: &[f64], passive: &[bool]) -> Result<Vec<f64>> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let k = idx.len();
    let mut gram = DMatrix::zeros(k, k);
    let mut rhs = DVector::zeros(k);
    for (a, &i) in idx.iter().enumerate() {
        rhs[a] = g.row(i).iter().zip(z).map(|(c, v)| c * v).sum();
        for (b, &j) in idx.iter().enumerate() {
            gram[(a, b)] = g.row(i).iter().zip(g.row(j)).map(|(c, d)| c * d).sum();
        }
    }
    let sol = gram
        .cholesky()
        .ok_or(Error::RankDeficient { rank: 0, rows: k })?
        .solve(&rhs);
    let mut s = vec![0.0; passive.len()];
    for (a, &i) in idx.iter().enumerate() {
        s[i] = sol[a];
    }
    Ok(s)
}

/// The pair (G, D) living on generator coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPair {
    /// `pair.a` is G (from A), `pair.b` is D (from B); both have dimension p.
    pub pair: TensorPair,
    pub generators: Generators,
}

/// Rewrites the K-eigenproblem for `K = cone{c_j}` as a Pareto problem in alpha:
/// `g[i_1..i_m] = sum_j a[j_1..j_m] c[i_1][j_1] ... c[i_m][j_m]`, likewise d from b.
pub fn reduce_polyhedral(pair: &TensorPair, generators: &Generators) -> Result<ReducedPair> {
    if generators.ambient_dim() != pair.dim() {
        return Err(Error::DimensionMismatch {
            context: "reduce_polyhedral",
            expected: pair.dim(),
            found: generators.ambient_dim(),
        });
    }
    let p = generators.count();
    let g = pair.a.multilinear_transform(generators.as_slice(), p)?;
    let d = pair.b.multilinear_transform(generators.as_slice(), p)?;
    Ok(ReducedPair {
        pair: TensorPair::new(g, d)?,
        generators: generators.clone(),
    })
}

/// `x = C^T alpha` for a nonnegative, nonzero coefficient vector.
pub fn lift_solution(generators: &Generators, alpha: &[f64]) -> Result<Vec<f64>> {
    if alpha.len() != generators.count() {
        return Err(Error::DimensionMismatch {
            context: "lift_solution",
            expected: generators.count(),
            found: alpha.len(),
        });
    }
    if let Some(bad) = alpha.iter().find(|&&a| a < -1e-12) {
        return Err(Error::InvalidParameter(format!(
            "generator coefficients must be nonnegative, found {bad}"
        )));
    }
    if alpha.iter().all(|&a| a <= 0.0) {
        return Err(Error::ZeroVector("lift_solution coefficients"));
    }
    Ok(generators.apply_transpose(alpha))
}
