//! Eigenpair verification, the Rayleigh-quotient gradient, the magnitude bound
//! for unit-B problems, and a multi-start search over the simplex.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::simplex;
use crate::spa::{rayleigh, residual_map};
use crate::spectrum::{newton_on_subset, SpectrumParams};
use crate::tensor::{dot, norm, IndexSubset, Tensor, TensorPair};

/// Tolerance for [`simplex_stationary_search`] candidates.
pub const SEARCH_VERIFY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub x_cone_residual: f64,
    pub dual_residual: f64,
    pub complementarity_gap: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub x: Vec<f64>,
    /// `A x^{m-1} - lambda B x^{m-1}`; the cone condition applies to its negation.
    pub residual_y: Vec<f64>,
    pub report: VerifyReport,
}

/// Checks the three complementarity conditions at `x` exactly as given (no rescaling):
///
/// * `||x - P_K x||`
/// * the dual-cone violation of `w = lambda B x^{m-1} - A x^{m-1}`
/// * `|<x, w>| / max(1, ||x|| ||w||)`
pub fn verify_eigenpair(pair: &TensorPair, cone: &Cone, lambda: f64, x: &[f64], tol: f64) -> Result<EigenPair> {
    if cone.ambient_dim() != pair.dim() {
        return Err(Error::DimensionMismatch {
            context: "verify_eigenpair cone",
            expected: pair.dim(),
            found: cone.ambient_dim(),
        });
    }
    if norm(x) <= 1e-12 {
        return Err(Error::ZeroVector("eigenvector candidate"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let y = residual_map(pair, x, lambda)?;
    let w: Vec<f64> = y.iter().map(|v| -v).collect();
    let x_cone_residual = cone.membership_residual(x)?;
    let dual_residual = cone.dual_residual(&w)?;
    let complementarity_gap = dot(x, &w).abs() / (norm(x) * norm(&w)).max(1.0);
    let passed = x_cone_residual <= tol && dual_residual <= tol && complementarity_gap <= tol;
    Ok(EigenPair {
        lambda,
        x: x.to_vec(),
        residual_y: y,
        report: VerifyReport {
            x_cone_residual,
            dual_residual,
            complementarity_gap,
            tol,
            passed,
        },
    })
}

/// `(m / B x^m) (A x^{m-1} - lambda(x) B x^{m-1})`, valid only for symmetric pairs.
pub fn rayleigh_gradient(pair: &TensorPair, x: &[f64]) -> Result<Vec<f64>> {
    if !pair.is_symmetric() {
        let dev = pair.a.symmetry_deviation().max(pair.b.symmetry_deviation());
        return Err(Error::NotSymmetric { max_deviation: dev });
    }
    let lambda = rayleigh(pair, x)?;
    let bxm = pair.b.contract_m(x)?;
    let scale = pair.order() as f64 / bxm;
    Ok(residual_map(pair, x, lambda)?.into_iter().map(|v| scale * v).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub frobenius_bound: f64,
    pub entry_bound: f64,
    pub combined: f64,
}

/// Upper bound on `|lambda|` over the Pareto spectrum of `(A, I)`:
/// `min(n^{(m-2)/2} ||A||_F, max|a| n^{m-1})`.
pub fn magnitude_bound(a: &Tensor) -> BoundReport {
    let n = a.dim() as f64;
    let m = a.order() as f64;
    let frobenius_bound = n.powf((m - 2.0) / 2.0) * a.frobenius_norm();
    let entry_bound = a.max_abs_entry() * n.powf(m - 1.0);
    BoundReport {
        frobenius_bound,
        entry_bound,
        combined: frobenius_bound.min(entry_bound),
    }
}

/// The magnitude bound divided by a positive estimate of `min { B x^m : x in simplex }`.
///
/// Heuristic: the estimate usually comes from the copositivity probe, which can only
/// overestimate the true minimum, so the result is not a certified bound.
pub fn heuristic_generalized_bound(a: &Tensor, b_min_estimate: f64) -> Result<f64> {
    if !(b_min_estimate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "minimum of B x^m on the simplex must be positive, got {b_min_estimate}"
        )));
    }
    Ok(magnitude_bound(a).combined / b_min_estimate)
}

const ASCENT_MAX_STEPS: usize = 20_000;
const ASCENT_PG_TOL: f64 = 1e-10;
const SUPPORT_EPS: f64 = 1e-9;

/// Multi-start projected-gradient ascent of `lambda(x)` over the standard simplex.
///
/// Each stationary point is polished by Newton's method on its support, then checked
/// with [`verify_eigenpair`] on the orthant at [`SEARCH_VERIFY_TOL`]. Returns the verified
/// candidate with the largest eigenvalue (ties broken by lexicographically smallest x).
pub fn simplex_stationary_search(pair: &TensorPair, restarts: usize, seed: u64) -> Result<EigenPair> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be positive".into()));
    }
    if !pair.is_symmetric() {
        let dev = pair.a.symmetry_deviation().max(pair.b.symmetry_deviation());
        return Err(Error::NotSymmetric { max_deviation: dev });
    }
    let n = pair.dim();
    let orthant = Cone::orthant(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![simplex::barycenter(n)];
    starts.extend((0..n).map(|i| simplex::vertex(n, i)));
    starts.extend((0..restarts).map(|_| simplex::uniform_point(n, &mut rng)));

    let mut best: Option<EigenPair> = None;
    for start in starts {
        let Some(x) = ascend(pair, start) else { continue };
        let Some(candidate) = polish_and_verify(pair, &orthant, &x)? else { continue };
        let better = match &best {
            None => true,
            Some(b) => {
                candidate.lambda > b.lambda
                    || (candidate.lambda == b.lambda
                        && candidate.x.iter().zip(&b.x).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne())
                            == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or(Error::NoneFound)
}

fn ascend(pair: &TensorPair, mut x: Vec<f64>) -> Option<Vec<f64>> {
    let mut f = rayleigh(pair, &x).ok()?;
    let mut step = 1.0;
    for _ in 0..ASCENT_MAX_STEPS {
        let g = rayleigh_gradient(pair, &x).ok()?;
        let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + b).collect();
        let pg: Vec<f64> = simplex::project_simplex(&trial).iter().zip(&x).map(|(a, b)| a - b).collect();
        if norm(&pg) < ASCENT_PG_TOL {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            let cand = simplex::project_simplex(&trial);
            let d: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
            if let Ok(fc) = rayleigh(pair, &cand) {
                if fc >= f + dot(&g, &d) - dot(&d, &d) / (2.0 * step) {
                    x = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(1e6);
    }
    Some(x)
}

fn polish_and_verify(pair: &TensorPair, orthant: &Cone, x: &[f64]) -> Result<Option<EigenPair>> {
    let n = pair.dim();
    let members: Vec<usize> = (0..n).filter(|&i| x[i] > SUPPORT_EPS).collect();
    let mut candidates = Vec::new();
    if let Ok(support) = IndexSubset::new(n, members) {
        let sub = pair.principal(&support)?;
        let w0: Vec<f64> = support.members().iter().map(|&i| x[i]).collect();
        let s: f64 = w0.iter().sum();
        let w0: Vec<f64> = w0.iter().map(|v| v / s).collect();
        if let Ok(lambda0) = rayleigh(&sub, &w0) {
            if let Some((lambda, w)) = newton_on_subset(&sub, w0, lambda0, &SpectrumParams::default()) {
                if w.iter().all(|&v| v > 0.0) {
                    candidates.push((lambda, support.pad(&w)?));
                }
            }
        }
    }
    if let Ok(lambda) = rayleigh(pair, x) {
        candidates.push((lambda, x.to_vec()));
    }
    for (lambda, x) in candidates {
        let ep = verify_eigenpair(pair, orthant, lambda, &x, SEARCH_VERIFY_TOL)?;
        if ep.report.passed {
            return Ok(Some(ep));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{naive_contract_m, seeded_positive_tensor, seeded_tensor};
    use rand::Rng;

    fn diag_pair() -> TensorPair {
        TensorPair::with_unit(Tensor::diagonal(2, &[1.0, 2.0]).unwrap()).unwrap()
    }

    #[test]
    fn exact_pair_has_zero_residuals() {
        let ep = verify_eigenpair(&diag_pair(), &Cone::orthant(2).unwrap(), 2.0, &[0.0, 1.0], 1e-12).unwrap();
        assert_eq!(ep.report.x_cone_residual, 0.0);
        assert_eq!(ep.report.dual_residual, 0.0);
        assert_eq!(ep.report.complementarity_gap, 0.0);
        assert!(ep.report.passed);
    }

    #[test]
    fn perturbed_lambda_fails() {
        let ep = verify_eigenpair(&diag_pair(), &Cone::orthant(2).unwrap(), 2.1, &[0.0, 1.0], 1e-3).unwrap();
        assert!(!ep.report.passed);
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert!(verify_eigenpair(&diag_pair(), &Cone::orthant(2).unwrap(), 1.0, &[0.0, 0.0], 1e-3).is_err());
    }

    #[test]
    fn verification_is_scale_consistent() {
        let pair = diag_pair();
        let k = Cone::orthant(2).unwrap();
        for (lambda, x) in [(2.0, vec![0.0, 1.0]), (1.0, vec![1.0, 0.0]), (1.5, vec![0.3, 1.0])] {
            let a = verify_eigenpair(&pair, &k, lambda, &x, 1e-8).unwrap();
            let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
            let b = verify_eigenpair(&pair, &k, lambda, &x2, 1e-8).unwrap();
            assert_eq!(a.report.passed, b.report.passed);
        }
    }

    #[test]
    fn gradient_vanishes_for_equal_tensors() {
        let t = seeded_positive_tensor(3, 3, 1);
        let pair = TensorPair::new(t.clone(), t).unwrap();
        let g = rayleigh_gradient(&pair, &[0.2, 0.5, 0.3]).unwrap();
        assert!(norm(&g) < 1e-14);
    }

    #[test]
    fn gradient_rejects_asymmetric_pair() {
        let pair = TensorPair::with_unit(Tensor::new(2, 2, vec![1.0, 3.0, 4.0, 1.0]).unwrap()).unwrap();
        assert!(matches!(rayleigh_gradient(&pair, &[1.0, 1.0]), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for seed in 0..5 {
            let pair = TensorPair::new(seeded_tensor(4, 3, seed, true), seeded_positive_tensor(4, 3, seed + 100)).unwrap();
            // naive-summation Rayleigh quotient as the finite-difference oracle
            let lam = |x: &[f64]| naive_contract_m(&pair.a, x) / naive_contract_m(&pair.b, x);
            for _ in 0..10 {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
                let g = rayleigh_gradient(&pair, &x).unwrap();
                assert!(dot(&x, &g).abs() <= 1e-9);
                let h = 1e-5;
                let fd: Vec<f64> = (0..3)
                    .map(|i| {
                        let mut p = x.clone();
                        let mut q = x.clone();
                        p[i] += h;
                        q[i] -= h;
                        (lam(&p) - lam(&q)) / (2.0 * h)
                    })
                    .collect();
                let err: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
                assert!(norm(&err) <= 1e-5 * norm(&fd).max(1.0));
            }
        }
    }

    #[test]
    fn magnitude_bound_examples() {
        let r = magnitude_bound(&Tensor::unit(4, 3).unwrap());
        assert!((r.frobenius_bound - 3.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((r.entry_bound - 27.0).abs() < 1e-12);
        assert_eq!(r.combined, r.frobenius_bound);
        let z = magnitude_bound(&Tensor::zeros(3, 2).unwrap());
        assert_eq!((z.frobenius_bound, z.entry_bound, z.combined), (0.0, 0.0, 0.0));
        let r = magnitude_bound(&Tensor::new(2, 2, vec![1.0, 3.0, 4.0, 1.0]).unwrap());
        assert!((r.frobenius_bound - 27f64.sqrt()).abs() < 1e-12);
        assert!((r.entry_bound - 8.0).abs() < 1e-12);
        assert!(heuristic_generalized_bound(&Tensor::unit(2, 2).unwrap(), 0.0).is_err());
    }

    #[test]
    fn search_on_diagonal_matrix() {
        let ep = simplex_stationary_search(&diag_pair(), 8, 0).unwrap();
        assert!((ep.lambda - 2.0).abs() < 1e-9);
        assert!(ep.x[0].abs() < 1e-9);
        assert!(ep.report.passed);
    }

    #[test]
    fn search_on_equal_tensors_returns_one() {
        let t = seeded_positive_tensor(4, 2, 9);
        let pair = TensorPair::new(t.clone(), t).unwrap();
        let ep = simplex_stationary_search(&pair, 4, 1).unwrap();
        assert!((ep.lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn search_value_is_scale_free() {
        // maximizing over the simplex and over {B x^m = 1} agree by homogeneity
        let pair = TensorPair::new(seeded_tensor(3, 3, 4, true), seeded_positive_tensor(3, 3, 5)).unwrap();
        let ep = simplex_stationary_search(&pair, 16, 2).unwrap();
        let bxm = pair.b.contract_m(&ep.x).unwrap();
        let xs: Vec<f64> = ep.x.iter().map(|v| v / bxm.cbrt()).collect();
        assert!((pair.b.contract_m(&xs).unwrap() - 1.0).abs() < 1e-12);
        assert!((rayleigh(&pair, &xs).unwrap() - ep.lambda).abs() < 1e-10 * ep.lambda.abs().max(1.0));
    }
}
