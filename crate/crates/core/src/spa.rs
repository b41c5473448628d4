//! Scaling-and-projection iteration for cone eigenpairs.
//!
//! Each step evaluates `lambda_k = A x^m / B x^m`, the residual
//! `y = A x^{m-1} - lambda_k B x^{m-1}` and `s_k = ||y||`, then sets
//! `u = P_K[x + alpha s_k y]` and rescales so that `B x^m = 1`.
//! The iteration stops once `||y|| <= tol`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{verify_eigenpair, EigenPair};
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::tensor::{norm, Tensor, TensorPair};

/// Smallest admissible `B u^m` before normalization is declared degenerate.
pub const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Ones,
    Random { seed: u64 },
    Explicit(Vec<f64>),
}

/// What is compared against `tol` at each iterate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// `||y|| <= tol`. Only reachable when the solution has `y = 0`, which
    /// excludes most eigenpairs on the boundary of the cone.
    #[default]
    ResidualNorm,
    /// Dual-cone violation of `-y` at most `tol`. Iterates are always in K and
    /// orthogonal to y, so this is the full complementarity residual.
    DualResidual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub tol: f64,
    pub alpha: f64,
    pub max_iter: usize,
    pub start: Start,
    pub record_trace: bool,
    pub stop: StopRule,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            tol: 1e-3,
            alpha: 1.0,
            max_iter: 200_000,
            start: Start::Ones,
            record_trace: false,
            stop: StopRule::ResidualNorm,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub k: usize,
    pub lambda: f64,
    pub s_k: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveTrace {
    pub rows: Vec<TraceRow>,
    /// `x^{(k)}` for every row, in the same order.
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterReached,
    DegenerateNormalization,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterReached => "max_iter_reached",
            SolveStatus::DegenerateNormalization => "degenerate_normalization",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Present only on convergence; verified at `10 * tol`.
    pub eigenpair: Option<EigenPair>,
    /// Number of projection steps taken; the trace holds `iterations + 1` rows.
    pub iterations: usize,
    /// Last iterate and its Rayleigh quotient and residual norm (NaN if never normalized).
    pub lambda: f64,
    pub x: Vec<f64>,
    pub rel_err: f64,
    /// The quantity the stop rule compares with `tol`, at the last iterate.
    pub stop_value: f64,
    pub trace: Option<SolveTrace>,
}

/// `A x^m / B x^m`.
pub fn rayleigh(pair: &TensorPair, x: &[f64]) -> Result<f64> {
    let bxm = pair.b.contract_m(x)?;
    if bxm.abs() <= DEGENERATE_TOL {
        return Err(Error::DegenerateNormalization { value: bxm });
    }
    Ok(pair.a.contract_m(x)? / bxm)
}

/// `A x^{m-1} - lambda B x^{m-1}`.
pub fn residual_map(pair: &TensorPair, x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let ax = pair.a.contract_m1(x)?;
    let bx = pair.b.contract_m1(x)?;
    Ok(ax.iter().zip(&bx).map(|(a, b)| a - lambda * b).collect())
}

/// `u / (B u^m)^{1/m}`; fails unless `B u^m > 1e-14`.
pub fn normalize(b: &Tensor, u: &[f64]) -> Result<Vec<f64>> {
    let bum = b.contract_m(u)?;
    if !(bum > DEGENERATE_TOL) {
        return Err(Error::DegenerateNormalization { value: bum });
    }
    let scale = bum.powf(1.0 / b.order() as f64);
    Ok(u.iter().map(|v| v / scale).collect())
}

fn initial_point(cone: &Cone, start: &Start, n: usize) -> Result<Vec<f64>> {
    let u = match start {
        Start::Ones => cone.project(&vec![1.0; n])?,
        Start::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            cone.project(&raw)?
        }
        Start::Explicit(v) => {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "explicit start",
                    expected: n,
                    found: v.len(),
                });
            }
            if cone.membership_residual(v)? > 1e-9 * norm(v).max(1.0) {
                return Err(Error::InvalidParameter("explicit start must lie in the cone".into()));
            }
            v.clone()
        }
    };
    if norm(&u) <= 1e-12 {
        return Err(Error::ZeroVector("projected start"));
    }
    Ok(u)
}

/// Runs the scaling-and-projection iteration.
///
/// Returns `Err` only for invalid input. Solver outcomes, including a degenerate
/// normalization at the start, are reported through [`SolveResult::status`].
pub fn solve(pair: &TensorPair, cone: &Cone, params: &SolveParams) -> Result<SolveResult> {
    params.validate()?;
    let n = pair.dim();
    if cone.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            context: "solve cone",
            expected: n,
            found: cone.ambient_dim(),
        });
    }
    let u0 = initial_point(cone, &params.start, n)?;
    let mut trace = params.record_trace.then(SolveTrace::default);

    let degenerate = |x: Vec<f64>, lambda: f64, rel_err: f64, stop_value: f64, iterations: usize, trace| SolveResult {
        status: SolveStatus::DegenerateNormalization,
        eigenpair: None,
        iterations,
        lambda,
        x,
        rel_err,
        stop_value,
        trace,
    };

    let mut x = match normalize(&pair.b, &u0) {
        Ok(x) => x,
        Err(Error::DegenerateNormalization { .. }) => return Ok(degenerate(u0, f64::NAN, f64::NAN, f64::NAN, 0, trace)),
        Err(e) => return Err(e),
    };

    let mut k = 0;
    loop {
        // B x^m = 1 after normalization, so the quotient reduces to A x^m
        let lambda = rayleigh(pair, &x)?;
        let y = residual_map(pair, &x, lambda)?;
        let s = norm(&y);
        if let Some(t) = trace.as_mut() {
            t.rows.push(TraceRow {
                k,
                lambda,
                s_k: s,
                rel_err: s,
            });
            t.iterates.push(x.clone());
        }
        let stop_value = match params.stop {
            StopRule::ResidualNorm => s,
            StopRule::DualResidual => {
                let w: Vec<f64> = y.iter().map(|v| -v).collect();
                cone.dual_residual(&w)?
            }
        };
        if stop_value <= params.tol {
            let eigenpair = verify_eigenpair(pair, cone, lambda, &x, 10.0 * params.tol)?;
            return Ok(SolveResult {
                status: SolveStatus::Converged,
                eigenpair: Some(eigenpair),
                iterations: k,
                lambda,
                x,
                rel_err: s,
                stop_value,
                trace,
            });
        }
        if k == params.max_iter {
            return Ok(SolveResult {
                status: SolveStatus::MaxIterReached,
                eigenpair: None,
                iterations: k,
                lambda,
                x,
                rel_err: s,
                stop_value,
                trace,
            });
        }
        let step = params.alpha * s;
        let z: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| xi + step * yi).collect();
        let u = cone.project(&z)?;
        x = match normalize(&pair.b, &u) {
            Ok(next) => next,
            Err(Error::DegenerateNormalization { .. }) => return Ok(degenerate(x, lambda, s, stop_value, k, trace)),
            Err(e) => return Err(e),
        };
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{naive_contract_m, naive_contract_m1, seeded_positive_tensor, seeded_tensor};

    #[test]
    fn rayleigh_examples() {
        let t = seeded_positive_tensor(3, 3, 2);
        let same = TensorPair::new(t.clone(), t).unwrap();
        assert!((rayleigh(&same, &[0.3, 0.2, 0.9]).unwrap() - 1.0).abs() < 1e-15);

        let pair = TensorPair::new(seeded_tensor(4, 3, 3, true), seeded_positive_tensor(4, 3, 4)).unwrap();
        let x = [0.4, 0.1, 0.7];
        let x3: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let l1 = rayleigh(&pair, &x).unwrap();
        assert!((l1 - rayleigh(&pair, &x3).unwrap()).abs() < 1e-12);
        let oracle = naive_contract_m(&pair.a, &x) / naive_contract_m(&pair.b, &x);
        assert!((l1 - oracle).abs() < 1e-12);

        let degenerate = TensorPair::new(Tensor::unit(2, 2).unwrap(), Tensor::diagonal(2, &[1.0, -1.0]).unwrap()).unwrap();
        assert!(matches!(rayleigh(&degenerate, &[1.0, 1.0]), Err(Error::DegenerateNormalization { .. })));
    }

    #[test]
    fn residual_examples() {
        let t = seeded_positive_tensor(3, 2, 8);
        let same = TensorPair::new(t.clone(), t).unwrap();
        assert!(norm(&residual_map(&same, &[0.5, 2.0], 1.0).unwrap()) < 1e-14);
        let diag = TensorPair::with_unit(Tensor::diagonal(2, &[1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(residual_map(&diag, &[0.0, 1.0], 2.0).unwrap(), vec![0.0, 0.0]);

        let pair = TensorPair::new(seeded_tensor(4, 3, 5, false), seeded_positive_tensor(4, 3, 6)).unwrap();
        let x = [0.2, 0.9, 0.4];
        let lambda = rayleigh(&pair, &x).unwrap();
        let y = residual_map(&pair, &x, lambda).unwrap();
        let inner: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!(inner.abs() <= 1e-9 * norm(&x) * norm(&y));
        let ay = naive_contract_m1(&pair.a, &x);
        let by = naive_contract_m1(&pair.b, &x);
        for i in 0..3 {
            assert!((y[i] - (ay[i] - lambda * by[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_examples() {
        let b = Tensor::unit(2, 2).unwrap();
        let x = normalize(&b, &[3.0, 4.0]).unwrap();
        assert!((x[0] - 0.6).abs() < 1e-15 && (x[1] - 0.8).abs() < 1e-15);
        let again = normalize(&b, &x).unwrap();
        assert!((again[0] - x[0]).abs() < 1e-15 && (again[1] - x[1]).abs() < 1e-15);
        let b4 = seeded_positive_tensor(4, 2, 1);
        let x = normalize(&b4, &[1.0, 1.0]).unwrap();
        assert!((naive_contract_m(&b4, &x) - 1.0).abs() < 1e-10);
        assert!(normalize(&b, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn params_are_validated() {
        let pair = TensorPair::with_unit(Tensor::unit(3, 2).unwrap()).unwrap();
        let k = Cone::orthant(2).unwrap();
        for bad in [
            SolveParams { tol: 0.0, ..Default::default() },
            SolveParams { alpha: -1.0, ..Default::default() },
            SolveParams { max_iter: 0, ..Default::default() },
            SolveParams { start: Start::Explicit(vec![-1.0, -1.0]), ..Default::default() },
            SolveParams { start: Start::Explicit(vec![1.0]), ..Default::default() },
        ] {
            assert!(solve(&pair, &k, &bad).is_err());
        }
        assert!(solve(&pair, &Cone::orthant(3).unwrap(), &SolveParams::default()).is_err());
    }

    #[test]
    fn diagonal_problem_converges() {
        let pair = TensorPair::with_unit(Tensor::diagonal(2, &[1.0, 2.0, 3.0]).unwrap()).unwrap();
        let params = SolveParams {
            tol: 1e-4,
            record_trace: true,
            ..Default::default()
        };
        let r = solve(&pair, &Cone::orthant(3).unwrap(), &params).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        let ep = r.eigenpair.unwrap();
        assert!(ep.report.passed);
        let trace = r.trace.unwrap();
        assert_eq!(trace.rows.len(), r.iterations + 1);
        assert!(trace.rows.last().unwrap().rel_err <= params.tol);
        for (k, row) in trace.rows.iter().enumerate() {
            assert_eq!(row.k, k);
            assert_eq!(row.s_k, row.rel_err);
        }
    }

    #[test]
    fn dual_rule_stops_at_boundary_solution() {
        // the eigenpair (1, e_0) has y = (0, -1): stalled under the norm rule, done under the dual rule
        let pair = TensorPair::with_unit(Tensor::new(2, 2, vec![1.0, -1.0, -1.0, 0.0]).unwrap()).unwrap();
        let k = Cone::orthant(2).unwrap();
        let start = Start::Explicit(vec![1.0, 0.0]);
        let norm_rule = SolveParams { max_iter: 50, start: start.clone(), ..Default::default() };
        let r = solve(&pair, &k, &norm_rule).unwrap();
        assert_eq!(r.status, SolveStatus::MaxIterReached);
        assert_eq!(r.x, vec![1.0, 0.0]);
        let dual_rule = SolveParams { stop: StopRule::DualResidual, ..norm_rule };
        let r = solve(&pair, &k, &dual_rule).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert_eq!(r.iterations, 0);
        assert!(r.eigenpair.unwrap().report.passed);
    }

    #[test]
    fn runs_are_deterministic() {
        let pair = TensorPair::new(seeded_tensor(3, 3, 11, true), seeded_positive_tensor(3, 3, 12)).unwrap();
        let k = Cone::orthant(3).unwrap();
        let params = SolveParams {
            tol: 1e-6,
            start: Start::Random { seed: 99 },
            record_trace: true,
            ..Default::default()
        };
        let a = solve(&pair, &k, &params).unwrap();
        let b = solve(&pair, &k, &params).unwrap();
        let bits = |r: &SolveResult| {
            r.trace.as_ref().unwrap().rows.iter().map(|row| (row.lambda.to_bits(), row.s_k.to_bits())).collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn second_order_cone_run_keeps_iterates_in_cone() {
        let pair = TensorPair::new(seeded_tensor(3, 3, 21, true), seeded_positive_tensor(3, 3, 22)).unwrap();
        let k = Cone::second_order(3).unwrap();
        let params = SolveParams {
            tol: 1e-6,
            max_iter: 5000,
            record_trace: true,
            ..Default::default()
        };
        let r = solve(&pair, &k, &params).unwrap();
        for x in &r.trace.unwrap().iterates {
            assert!(k.membership_residual(x).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn indefinite_b_reports_degenerate_start() {
        let pair = TensorPair::new(
            Tensor::new(2, 2, vec![1.0, 3.0, 4.0, 1.0]).unwrap(),
            Tensor::diagonal(2, &[1.0, -1.0]).unwrap(),
        )
        .unwrap();
        let r = solve(&pair, &Cone::orthant(2).unwrap(), &SolveParams::default()).unwrap();
        assert_eq!(r.status, SolveStatus::DegenerateNormalization);
        assert_eq!(r.iterations, 0);
    }
}
