//! Heuristic search for a witness that a tensor is not strictly copositive.
//!
//! Minimizes `T x^m` over the standard simplex from many starts. A value
//! `<= 0` disproves strict copositivity; otherwise only the smallest value
//! seen is reported, since deciding copositivity exactly is NP-hard.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::simplex;
use crate::tensor::{dot, norm, Tensor};

pub const DEFAULT_BUDGET: usize = 64;
const PG_TOL: f64 = 1e-8;
const MAX_STEPS: usize = 5_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CopositivityVerdict {
    Falsified { witness: Vec<f64>, value: f64 },
    NotFalsified { min_value: f64, argmin: Vec<f64> },
}

impl CopositivityVerdict {
    pub fn is_falsified(&self) -> bool {
        matches!(self, CopositivityVerdict::Falsified { .. })
    }
}

/// Runs projected-gradient descent from the barycenter, every vertex, and
/// `budget` uniformly random simplex points.
pub fn strict_copositivity_probe(t: &Tensor, budget: usize, seed: u64) -> Result<CopositivityVerdict> {
    if budget == 0 {
        return Err(Error::InvalidParameter("probe budget must be positive".into()));
    }
    let n = t.dim();
    let m = t.order() as f64;
    // the gradient of T x^m is m * sym(T) x^{m-1} even for non-symmetric T
    let sym = if t.is_symmetric() { t.clone() } else { t.symmetrize() };
    let value = |x: &[f64]| sym.contract_m(x).expect("dimension checked");
    let grad = |x: &[f64]| -> Vec<f64> {
        sym.contract_m1(x)
            .expect("dimension checked")
            .into_iter()
            .map(|g| m * g)
            .collect()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![simplex::barycenter(n)];
    starts.extend((0..n).map(|i| simplex::vertex(n, i)));
    starts.extend((0..budget).map(|_| simplex::uniform_point(n, &mut rng)));

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starts {
        let (fx, x) = descend(start, &value, &grad);
        if best.as_ref().is_none_or(|(bv, _)| fx < *bv) {
            best = Some((fx, x));
        }
        if fx <= 0.0 {
            break;
        }
    }
    let (min_value, argmin) = best.expect("at least one start");
    Ok(if min_value <= 0.0 {
        CopositivityVerdict::Falsified {
            witness: argmin,
            value: min_value,
        }
    } else {
        CopositivityVerdict::NotFalsified { min_value, argmin }
    })
}

fn descend(
    mut x: Vec<f64>,
    value: &impl Fn(&[f64]) -> f64,
    grad: &impl Fn(&[f64]) -> Vec<f64>,
) -> (f64, Vec<f64>) {
    let mut fx = value(&x);
    let mut step = 1.0;
    for _ in 0..MAX_STEPS {
        let g = grad(&x);
        let unit: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - b).collect();
        let pg: Vec<f64> = x.iter().zip(simplex::project_simplex(&unit)).map(|(a, b)| a - b).collect();
        if norm(&pg) < PG_TOL || fx <= 0.0 {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let cand = simplex::project_simplex(&trial);
            let d: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
            let fc = value(&cand);
            if fc <= fx + dot(&g, &d) + dot(&d, &d) / (2.0 * step) {
                x = cand;
                fx = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(1e6);
    }
    (fx, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::seeded_positive_tensor;

    #[test]
    fn unit_tensor_minimum_is_at_barycenter() {
        for (m, n) in [(3, 2), (4, 3), (2, 4)] {
            let t = Tensor::unit(m, n).unwrap();
            let verdict = strict_copositivity_probe(&t, 8, 0).unwrap();
            let expected = (n as f64).powi(1 - m as i32);
            // grid oracle: sum x_i^m on a fine simplex grid never goes below the barycenter value
            if n == 2 {
                let grid_min = (0..=1000)
                    .map(|k| {
                        let a = k as f64 / 1000.0;
                        a.powi(m as i32) + (1.0 - a).powi(m as i32)
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!((grid_min - expected).abs() < 1e-12);
            }
            match verdict {
                CopositivityVerdict::NotFalsified { min_value, .. } => {
                    assert!((min_value - expected).abs() < 1e-12, "{min_value} vs {expected}")
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn zero_principal_block_is_falsified() {
        // T e_0^m = 0
        let t = Tensor::diagonal(3, &[0.0, 1.0, 2.0]).unwrap();
        match strict_copositivity_probe(&t, 4, 1).unwrap() {
            CopositivityVerdict::Falsified { witness, value } => {
                assert_eq!(value, 0.0);
                assert_eq!(witness, vec![1.0, 0.0, 0.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn indefinite_matrix_is_falsified() {
        let t = Tensor::new(2, 2, vec![1.0, -3.0, -3.0, 1.0]).unwrap();
        assert!(strict_copositivity_probe(&t, 4, 2).unwrap().is_falsified());
    }

    #[test]
    fn positive_tensor_is_not_falsified() {
        let t = seeded_positive_tensor(4, 3, 5);
        assert!(!strict_copositivity_probe(&t, DEFAULT_BUDGET, 3).unwrap().is_falsified());
    }

    #[test]
    fn zero_budget_is_rejected() {
        let t = Tensor::unit(3, 2).unwrap();
        assert!(strict_copositivity_probe(&t, 0, 0).is_err());
    }
}
