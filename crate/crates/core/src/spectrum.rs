//! Brute-force Pareto spectrum of small instances.
//!
//! `lambda` is a Pareto eigenvalue of (A, B) iff for some nonempty J there is a
//! `w > 0` with `A_J w^{m-1} = lambda B_J w^{m-1}` and, for every `i` outside J,
//! `(lambda B x^{m-1} - A x^{m-1})_i >= 0` where x pads w with zeros.
//! Every subset is searched with multi-start damped Newton.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::verify_eigenpair;
use crate::bounds::{self, BoundCatalog};
use crate::cone::{lift_solution, reduce_polyhedral, Cone};
use crate::error::{Error, Result};
use crate::simplex;
use crate::spa::rayleigh;
use crate::tensor::{norm, IndexSubset, TensorPair};

/// Tolerance used to verify each padded witness on the orthant.
pub const WITNESS_TOL: f64 = 1e-8;
/// Slack on the sign condition for indices outside the subset.
pub const FILTER_TOL: f64 = 1e-9;
const SINGULAR_SAMPLES: usize = 50;
const SINGULAR_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumParams {
    pub restarts_per_subset: usize,
    pub newton_tol: f64,
    pub positivity_eps: f64,
    pub dedup_rel_tol: f64,
    pub seed: u64,
    pub max_dim: usize,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams {
            restarts_per_subset: 200,
            newton_tol: 1e-12,
            positivity_eps: 1e-8,
            dedup_rel_tol: 1e-6,
            seed: 0,
            max_dim: 4,
        }
    }
}

impl SpectrumParams {
    pub fn validate(&self) -> Result<()> {
        if self.restarts_per_subset == 0 {
            return Err(Error::InvalidParameter("restarts_per_subset must be at least 1".into()));
        }
        for (name, v) in [
            ("newton_tol", self.newton_tol),
            ("positivity_eps", self.positivity_eps),
            ("dedup_rel_tol", self.dedup_rel_tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub subset: IndexSubset,
    /// Strictly positive solution on the subset, summing to one.
    pub w: Vec<f64>,
    /// `w` padded with zeros to the full dimension.
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// Distinct eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// `witnesses[i]` holds one witness per subset producing `eigenvalues[i]`.
    pub witnesses: Vec<Vec<Witness>>,
    pub subsets_examined: usize,
    pub applicable_bound: u64,
    pub singular_subsets: Vec<IndexSubset>,
    pub warnings: Vec<String>,
}

impl SpectrumReport {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Whether some eigenvalue lies within `tol` of `lambda`.
    pub fn contains(&self, lambda: f64, tol: f64) -> bool {
        self.eigenvalues.iter().any(|&v| (v - lambda).abs() <= tol)
    }
}

// splitmix64 finalizer; gives each (subset, restart) pair its own stream
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn start_rng(seed: u64, subset: &IndexSubset, restart: usize) -> ChaCha8Rng {
    let mask = subset.members().iter().fold(0u64, |acc, &i| acc | 1 << i);
    ChaCha8Rng::seed_from_u64(mix(mix(seed ^ mix(mask)) ^ restart as u64))
}

fn scaled_residual(pair: &TensorPair, w: &[f64], lambda: f64) -> Option<(Vec<f64>, f64)> {
    let aw = pair.a.contract_m1(w).ok()?;
    let bw = pair.b.contract_m1(w).ok()?;
    let mut f: Vec<f64> = aw.iter().zip(&bw).map(|(a, b)| a - lambda * b).collect();
    f.push(w.iter().sum::<f64>() - 1.0);
    let scale = (norm(&aw) + lambda.abs() * norm(&bw)).max(1.0);
    let r = norm(&f) / scale;
    r.is_finite().then_some((f, r))
}

/// Damped Newton on `[A w^{m-1} - lambda B w^{m-1}; sum(w) - 1] = 0` from `(w0, lambda0)`.
///
/// Returns the root when the scale-relative residual drops to `params.newton_tol`.
/// Positivity of the root is not checked here.
pub(crate) fn newton_on_subset(
    pair: &TensorPair,
    mut w: Vec<f64>,
    mut lambda: f64,
    params: &SpectrumParams,
) -> Option<(f64, Vec<f64>)> {
    let k = pair.dim();
    let (mut f, mut r) = scaled_residual(pair, &w, lambda)?;
    for _ in 0..NEWTON_MAX_ITER {
        if r <= params.newton_tol {
            return Some((lambda, w));
        }
        let ja = pair.a.contract_m1_jacobian(&w).ok()?;
        let jb = pair.b.contract_m1_jacobian(&w).ok()?;
        let bw = pair.b.contract_m1(&w).ok()?;
        let mut jac = DMatrix::zeros(k + 1, k + 1);
        for i in 0..k {
            for j in 0..k {
                jac[(i, j)] = ja[i * k + j] - lambda * jb[i * k + j];
            }
            jac[(i, k)] = -bw[i];
            jac[(k, i)] = 1.0;
        }
        let rhs = DVector::from_iterator(k + 1, f.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs)?;
        if step.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let wt: Vec<f64> = w.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let lt = lambda + t * step[k];
            if let Some((ft, rt)) = scaled_residual(pair, &wt, lt) {
                if rt < r {
                    w = wt;
                    lambda = lt;
                    f = ft;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    (r <= params.newton_tol).then_some((lambda, w))
}

fn is_identically_singular(pair: &TensorPair, seed: u64) -> bool {
    let k = pair.dim();
    if k == 1 {
        return pair.a.entries()[0] == 0.0 && pair.b.entries()[0] == 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ 0x5151));
    (0..SINGULAR_SAMPLES).any(|_| {
        let x = simplex::uniform_point(k, &mut rng);
        let ax = pair.a.contract_m1(&x).map(|v| norm(&v)).unwrap_or(f64::INFINITY);
        let bx = pair.b.contract_m1(&x).map(|v| norm(&v)).unwrap_or(f64::INFINITY);
        ax < SINGULAR_TOL && bx < SINGULAR_TOL
    })
}

fn dedup_push(found: &mut Vec<(f64, Vec<f64>)>, lambda: f64, w: Vec<f64>, rel_tol: f64) {
    let dup = found
        .iter()
        .any(|(l, _)| (l - lambda).abs() <= rel_tol * l.abs().max(lambda.abs()).max(1.0));
    if !dup {
        found.push((lambda, w));
    }
}

fn subproblem(sub: &TensorPair, subset: &IndexSubset, params: &SpectrumParams) -> Vec<(f64, Vec<f64>)> {
    let k = sub.dim();
    let mut found = Vec::new();
    if k == 1 {
        let (a, b) = (sub.a.entries()[0], sub.b.entries()[0]);
        if b != 0.0 {
            found.push((a / b, vec![1.0]));
        }
        return found;
    }
    for restart in 0..params.restarts_per_subset {
        let mut rng = start_rng(params.seed, subset, restart);
        let w0 = simplex::uniform_point(k, &mut rng);
        let lambda0 = rayleigh(sub, &w0).unwrap_or(0.0);
        if let Some((lambda, w)) = newton_on_subset(sub, w0, lambda0, params) {
            if w.iter().all(|&v| v > params.positivity_eps) {
                dedup_push(&mut found, lambda, w, params.dedup_rel_tol);
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    found
}

/// Strictly positive solutions `(lambda, w)` of `A_J w^{m-1} = lambda B_J w^{m-1}`, `sum(w) = 1`.
///
/// `sub` is the principal pair on J. A one-dimensional pair uses the closed form
/// `a / b`. Fails with [`Error::IdenticallySingular`] when both tensors vanish at a sampled point.
pub fn strict_eigenpairs_subproblem(sub: &TensorPair, params: &SpectrumParams) -> Result<Vec<(f64, Vec<f64>)>> {
    params.validate()?;
    if is_identically_singular(sub, params.seed) {
        return Err(Error::IdenticallySingular);
    }
    let subset = IndexSubset::full(sub.dim())?;
    Ok(subproblem(sub, &subset, params))
}

/// Sign condition for the indices outside J: `(lambda B x^{m-1} - A x^{m-1})_i >= -1e-9`.
pub fn complementarity_filter(pair: &TensorPair, subset: &IndexSubset, lambda: f64, w: &[f64]) -> Result<bool> {
    let x = subset.pad(w)?;
    let ax = pair.a.contract_m1(&x)?;
    let bx = pair.b.contract_m1(&x)?;
    Ok(subset
        .complement()
        .into_iter()
        .all(|i| lambda * bx[i] - ax[i] >= -FILTER_TOL))
}

struct Candidate {
    lambda: f64,
    witness: Witness,
}

/// Enumerates the Pareto spectrum of `pair` over all `2^n - 1` principal subproblems.
pub fn enumerate_pareto_spectrum(pair: &TensorPair, params: &SpectrumParams) -> Result<SpectrumReport> {
    params.validate()?;
    let n = pair.dim();
    if n > params.max_dim {
        return Err(Error::DimensionCap { dim: n, cap: params.max_dim });
    }
    let catalog = bounds::catalog(pair)?;
    let orthant = Cone::orthant(n)?;
    let mut candidates = Vec::new();
    let mut singular_subsets = Vec::new();
    let mut warnings = Vec::new();
    let mut rejected = 0;
    let subset_count = (1u64 << n) - 1;

    for mask in 1..=subset_count {
        let subset = IndexSubset::from_mask(n, mask)?;
        let sub = pair.principal(&subset)?;
        if is_identically_singular(&sub, params.seed ^ mask) {
            warnings.push(format!("subset {:?} skipped: identically singular pair", subset.members()));
            singular_subsets.push(subset);
            continue;
        }
        for (lambda, w) in subproblem(&sub, &subset, params) {
            if !complementarity_filter(pair, &subset, lambda, &w)? {
                continue;
            }
            let x = subset.pad(&w)?;
            if !verify_eigenpair(pair, &orthant, lambda, &x, WITNESS_TOL)?.report.passed {
                rejected += 1;
                continue;
            }
            candidates.push(Candidate {
                lambda,
                witness: Witness {
                    subset: subset.clone(),
                    w,
                    x,
                },
            });
        }
    }
    if rejected > 0 {
        warnings.push(format!("{rejected} candidate(s) failed witness verification at {WITNESS_TOL:e}"));
    }
    let mut report = merge(candidates, params.dedup_rel_tol, subset_count as usize, &catalog, singular_subsets, warnings);
    cap_at_bound(&mut report, catalog.delta);
    Ok(report)
}

fn merge(
    mut candidates: Vec<Candidate>,
    rel_tol: f64,
    subsets_examined: usize,
    catalog: &BoundCatalog,
    singular_subsets: Vec<IndexSubset>,
    warnings: Vec<String>,
) -> SpectrumReport {
    candidates.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then_with(|| a.witness.subset.members().cmp(b.witness.subset.members()))
    });
    let mut eigenvalues: Vec<f64> = Vec::new();
    let mut witnesses: Vec<Vec<Witness>> = Vec::new();
    for c in candidates {
        let same = eigenvalues
            .last()
            .is_some_and(|&l| (c.lambda - l).abs() <= rel_tol * l.abs().max(c.lambda.abs()).max(1.0));
        if same {
            let group = witnesses.last_mut().expect("parallel vectors");
            if !group.iter().any(|w| w.subset == c.witness.subset) {
                group.push(c.witness);
            }
        } else {
            eigenvalues.push(c.lambda);
            witnesses.push(vec![c.witness]);
        }
    }
    SpectrumReport {
        eigenvalues,
        witnesses,
        subsets_examined,
        applicable_bound: catalog.applicable,
        singular_subsets,
        warnings,
    }
}

fn cap_at_bound(report: &mut SpectrumReport, delta: u64) {
    if report.eigenvalues.len() as u64 > delta {
        report.warnings.push(format!(
            "found {} distinct eigenvalues, more than the bound {delta}; keeping the first {delta}",
            report.eigenvalues.len()
        ));
        report.eigenvalues.truncate(delta as usize);
        report.witnesses.truncate(delta as usize);
    }
}

/// Spectrum for an orthant or a polyhedral cone.
///
/// A polyhedral cone is handled by enumerating the Pareto spectrum of the reduced pair
/// on generator coefficients and lifting each witness through `x = C^T alpha`.
pub fn enumerate_cone_spectrum(pair: &TensorPair, cone: &Cone, params: &SpectrumParams) -> Result<SpectrumReport> {
    match cone {
        Cone::Orthant { .. } => enumerate_pareto_spectrum(pair, params),
        Cone::Polyhedral(generators) => {
            let reduced = reduce_polyhedral(pair, generators)?;
            let mut report = enumerate_pareto_spectrum(&reduced.pair, params)?;
            let bound = bounds::polyhedral_bound(pair.order() as u64, generators.count() as u64)?;
            report.applicable_bound = bound;
            for group in &mut report.witnesses {
                for w in group.iter_mut() {
                    w.x = lift_solution(generators, &w.x)?;
                }
            }
            Ok(report)
        }
        Cone::SecondOrder { .. } => Err(Error::InvalidParameter(
            "spectrum enumeration supports orthant and polyhedral cones only".into(),
        )),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaturationReport {
    pub base_restarts: usize,
    pub base_count: usize,
    pub doubled_count: usize,
    /// Eigenvalues found only with doubled restarts.
    pub new_eigenvalues: Vec<f64>,
    pub saturated: bool,
}

/// Reruns the enumeration with twice the restarts and reports any eigenvalue the base run missed.
///
/// Starts are seeded per (subset, restart index), so the doubled run repeats every base start.
pub fn saturation_check(pair: &TensorPair, params: &SpectrumParams) -> Result<SaturationReport> {
    let base = enumerate_pareto_spectrum(pair, params)?;
    let doubled_params = SpectrumParams {
        restarts_per_subset: params.restarts_per_subset * 2,
        ..params.clone()
    };
    let doubled = enumerate_pareto_spectrum(pair, &doubled_params)?;
    let new_eigenvalues: Vec<f64> = doubled
        .eigenvalues
        .iter()
        .copied()
        .filter(|&l| !base.contains(l, params.dedup_rel_tol * l.abs().max(1.0)))
        .collect();
    Ok(SaturationReport {
        base_restarts: params.restarts_per_subset,
        base_count: base.len(),
        doubled_count: doubled.len(),
        saturated: new_eigenvalues.is_empty(),
        new_eigenvalues,
    })
}
