//! Independent reference computations for unit tests.
//!
//! Nothing here reuses the production contraction kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::Tensor;

/// Explicit nested summation over every index tuple.
pub fn naive_contract_m1(t: &Tensor, x: &[f64]) -> Vec<f64> {
    let n = t.dim();
    let m = t.order();
    let mut out = vec![0.0; n];
    let total = n.pow(m as u32);
    for flat in 0..total {
        let mut idx = vec![0; m];
        let mut f = flat;
        for k in (0..m).rev() {
            idx[k] = f % n;
            f /= n;
        }
        let mut term = t.entries()[flat];
        for &i in &idx[1..] {
            term *= x[i];
        }
        out[idx[0]] += term;
    }
    out
}

pub fn naive_contract_m(t: &Tensor, x: &[f64]) -> f64 {
    naive_contract_m1(t, x).iter().zip(x).map(|(a, b)| a * b).sum()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn seeded_tensor(order: usize, dim: usize, seed: u64, symmetric: bool) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = dim.pow(order as u32);
    let t = Tensor::new(order, dim, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    if symmetric {
        t.symmetrize()
    } else {
        t
    }
}

pub fn seeded_positive_tensor(order: usize, dim: usize, seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = dim.pow(order as u32);
    Tensor::new(order, dim, (0..len).map(|_| rng.random_range(0.1..1.0)).collect())
        .unwrap()
        .symmetrize()
}
