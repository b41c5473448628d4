//! Upper bounds on the number of Pareto (and polyhedral-cone) eigenvalues.
//!
//! All arithmetic is exact on `u64`; overflow is an error.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{Tensor, TensorPair};

fn pow(base: u64, exp: u64) -> Result<u64> {
    let exp = u32::try_from(exp).map_err(|_| Error::Overflow("exponent"))?;
    base.checked_pow(exp).ok_or(Error::Overflow("power"))
}

fn mul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or(Error::Overflow("product"))
}

fn check_order_dim(m: u64, n: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("order must be at least 2, got {m}")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(())
}

fn check_l(n: u64, l: u64) -> Result<()> {
    if l < 1 || l > n {
        return Err(Error::InvalidParameter(format!("l must lie in 1..={n}, got {l}")));
    }
    Ok(())
}

/// `n m^{n-1}`: Pareto eigenvalues of any order-m, dimension-n pair.
pub fn delta_bound(m: u64, n: u64) -> Result<u64> {
    check_order_dim(m, n)?;
    mul(n, pow(m, n - 1)?)
}

/// `p m^{p-1}`: eigenvalues for a cone with p independent generators.
pub fn polyhedral_bound(m: u64, p: u64) -> Result<u64> {
    delta_bound(m, p)
}

/// `2^n - 1`: when B is the unit tensor and A or -A is a Z-tensor.
pub fn rho_bound(n: u64) -> Result<u64> {
    if n < 1 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(pow(2, n)? - 1)
}

/// `[n(m-1) + l] (m-1)^{l-1} m^{n-l-1}`, which is `n (m-1)^{n-1}` at `l = n`.
pub fn gamma_bound(m: u64, n: u64, l: u64) -> Result<u64> {
    check_order_dim(m, n)?;
    check_l(n, l)?;
    if l == n {
        return mul(n, pow(m - 1, n - 1)?);
    }
    let lead = mul(n, m - 1)?.checked_add(l).ok_or(Error::Overflow("sum"))?;
    mul(mul(lead, pow(m - 1, l - 1)?)?, pow(m, n - l - 1)?)
}

/// `2^{n-l}`: positive rows together with -A a Z-tensor.
pub fn alpha_count_bound(n: u64, l: u64) -> Result<u64> {
    check_l(n, l)?;
    pow(2, n - l)
}

/// Number of rows i with `a[i, i_2, ..., i_m] > 0` whenever every `i_k != i`.
pub fn positive_rows(a: &Tensor) -> usize {
    let n = a.dim();
    let m = a.order();
    let stride = n.pow(m as u32 - 1);
    (0..n)
        .filter(|&i| {
            a.entries()[i * stride..(i + 1) * stride]
                .iter()
                .enumerate()
                .all(|(rest, &v)| {
                    let full = a.multi_index(i * stride + rest);
                    full[1..].contains(&i) || v > 0.0
                })
        })
        .count()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCatalog {
    pub delta: u64,
    pub rho: u64,
    pub gamma: Option<u64>,
    pub alpha_count: Option<u64>,
    /// Size of the positive-row index set, 0 when no row qualifies.
    pub l: usize,
    pub applicable: u64,
    pub hypotheses_held: Vec<String>,
    /// `alpha <= rho <= gamma <= delta`, checked when gamma and alpha are defined.
    pub chain_holds: Option<bool>,
}

/// Evaluates every count bound and the structural hypotheses behind them.
pub fn catalog(pair: &TensorPair) -> Result<BoundCatalog> {
    let m = pair.order() as u64;
    let n = pair.dim() as u64;
    let delta = delta_bound(m, n)?;
    let rho = rho_bound(n)?;
    let l = positive_rows(&pair.a);
    let (gamma, alpha_count) = if l >= 1 {
        (Some(gamma_bound(m, n, l as u64)?), Some(alpha_count_bound(n, l as u64)?))
    } else {
        (None, None)
    };

    let unit_b = pair.b.is_unit();
    let z = pair.a.is_z_tensor();
    let neg_z = pair.a.is_neg_z_tensor();
    let mut held = vec![("delta".to_string(), delta)];
    if unit_b && z {
        held.push(("rho: A is a Z-tensor".into(), rho));
    }
    if unit_b && neg_z {
        held.push(("rho: -A is a Z-tensor".into(), rho));
    }
    if unit_b {
        if let Some(g) = gamma {
            held.push(("gamma: positive rows".into(), g));
        }
        if let (Some(a), true) = (alpha_count, neg_z) {
            held.push(("alpha: positive rows and -A is a Z-tensor".into(), a));
        }
    }
    let applicable = held.iter().map(|(_, v)| *v).min().expect("delta always holds");
    let chain_holds = match (alpha_count, gamma) {
        (Some(a), Some(g)) => Some(a <= rho && rho <= g && g <= delta),
        _ => None,
    };
    Ok(BoundCatalog {
        delta,
        rho,
        gamma,
        alpha_count,
        l,
        applicable,
        hypotheses_held: held.into_iter().map(|(name, _)| name).collect(),
        chain_holds,
    })
}
