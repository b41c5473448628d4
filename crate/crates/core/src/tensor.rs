//! Dense order-m, dimension-n real tensors and their multilinear contractions.
//!
//! Entries are stored in row-major order: the flat position of the index
//! tuple `(i_1, ..., i_m)` is `((i_1 * n + i_2) * n + ...) * n + i_m`, so the
//! last index varies fastest. All contractions treat the first index as the
//! free one, i.e. `(T x^{m-1})_i = sum T[i, i_2, ..., i_m] x_{i_2} ... x_{i_m}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when deciding whether a tensor is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
    symmetric: bool,
}

fn checked_len(order: usize, dim: usize) -> Result<usize> {
    if order < 2 {
        return Err(Error::InvalidShape(format!("order must be at least 2, got {order}")));
    }
    if dim < 1 {
        return Err(Error::InvalidShape("dimension must be at least 1".into()));
    }
    u32::try_from(order)
        .ok()
        .and_then(|m| dim.checked_pow(m))
        .ok_or_else(|| Error::InvalidShape(format!("{dim}^{order} entries overflow")))
}

impl Tensor {
    pub fn new(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        let expected = checked_len(order, dim)?;
        if entries.len() != expected {
            return Err(Error::EntryCount {
                order,
                dim,
                expected,
                found: entries.len(),
            });
        }
        let mut t = Tensor {
            order,
            dim,
            entries,
            symmetric: false,
        };
        t.symmetric = t.symmetry_deviation() <= SYMMETRY_TOL;
        Ok(t)
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        let len = checked_len(order, dim)?;
        Tensor::new(order, dim, vec![0.0; len])
    }

    /// The unit tensor: one on the full diagonal, zero elsewhere.
    pub fn unit(order: usize, dim: usize) -> Result<Self> {
        Tensor::diagonal(order, &vec![1.0; dim])
    }

    pub fn diagonal(order: usize, diag: &[f64]) -> Result<Self> {
        let mut t = Tensor::zeros(order, diag.len())?;
        let step = t.diagonal_step();
        for (i, &d) in diag.iter().enumerate() {
            t.entries[i * step] = d;
        }
        t.symmetric = true;
        Ok(t)
    }

    /// Builds a tensor by evaluating `f` at every index tuple in row-major order.
    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = checked_len(order, dim)?;
        let mut entries = Vec::with_capacity(len);
        let mut idx = vec![0; order];
        for _ in 0..len {
            entries.push(f(&idx));
            advance(&mut idx, dim);
        }
        Tensor::new(order, dim, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[self.flat_index(idx)]
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.order];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    // stride between consecutive diagonal entries (i,...,i) -> (i+1,...,i+1)
    fn diagonal_step(&self) -> usize {
        (0..self.order).fold(0, |acc, _| acc * self.dim + 1)
    }

    fn check_vector(&self, x: &[f64], context: &'static str) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `T x^{m-1}`: the n-vector whose i-th entry contracts every index but the first.
    pub fn contract_m1(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_vector(x, "contract_m1")?;
        let kp = kron_power(x, self.order - 1);
        let stride = kp.len();
        Ok(self
            .entries
            .chunks_exact(stride)
            .map(|row| row.iter().zip(&kp).map(|(t, p)| t * p).sum())
            .collect())
    }

    /// `T x^m`, the homogeneous form of degree m.
    pub fn contract_m(&self, x: &[f64]) -> Result<f64> {
        let v = self.contract_m1(x)?;
        Ok(dot(x, &v))
    }

    /// Jacobian of `x -> T x^{m-1}` as an n-by-n row-major matrix.
    ///
    /// Valid for non-symmetric tensors: every non-free mode contributes.
    pub fn contract_m1_jacobian(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_vector(x, "contract_m1_jacobian")?;
        let n = self.dim;
        let m = self.order;
        let mut jac = vec![0.0; n * n];
        let mut idx = vec![0; m];
        for &t in &self.entries {
            if t != 0.0 {
                for p in 1..m {
                    let prod: f64 = (1..m).filter(|&q| q != p).map(|q| x[idx[q]]).product();
                    jac[idx[0] * n + idx[p]] += t * prod;
                }
            }
            advance(&mut idx, n);
        }
        Ok(jac)
    }

    /// Restriction of the tensor to the index subset `j` in every mode.
    pub fn principal_subtensor(&self, j: &IndexSubset) -> Result<Tensor> {
        if j.parent_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "principal_subtensor",
                expected: self.dim,
                found: j.parent_dim(),
            });
        }
        let members = j.members();
        let mut parent = vec![0; self.order];
        let mut sub = Tensor::from_fn(self.order, members.len(), |idx| {
            for (slot, &k) in parent.iter_mut().zip(idx) {
                *slot = members[k];
            }
            self.get(&parent)
        })?;
        sub.symmetric = sub.symmetric || self.symmetric;
        Ok(sub)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let step = self.diagonal_step();
        self.entries
            .iter()
            .enumerate()
            .filter(move |(f, _)| f % step != 0 || f / step >= self.dim)
            .map(|(_, &v)| v)
    }

    /// True iff every off-diagonal entry is nonpositive.
    pub fn is_z_tensor(&self) -> bool {
        self.off_diagonal().all(|v| v <= 0.0)
    }

    /// True iff the negated tensor is a Z-tensor (off-diagonal entries nonnegative).
    pub fn is_neg_z_tensor(&self) -> bool {
        self.off_diagonal().all(|v| v >= 0.0)
    }

    /// True iff the tensor equals the unit tensor exactly.
    pub fn is_unit(&self) -> bool {
        let step = self.diagonal_step();
        self.entries.iter().enumerate().all(|(f, &v)| {
            let on_diag = f % step == 0 && f / step < self.dim;
            v == if on_diag { 1.0 } else { 0.0 }
        })
    }

    // flat index of the sorted index tuple, i.e. the representative of the
    // permutation orbit of `flat`
    fn canonical(&self, flat: usize, scratch: &mut Vec<usize>) -> usize {
        scratch.clear();
        let mut f = flat;
        for _ in 0..self.order {
            scratch.push(f % self.dim);
            f /= self.dim;
        }
        scratch.sort_unstable();
        scratch.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    /// Largest spread (max - min) of entries within one permutation orbit.
    pub fn symmetry_deviation(&self) -> f64 {
        let mut lo = vec![f64::INFINITY; self.entries.len()];
        let mut hi = vec![f64::NEG_INFINITY; self.entries.len()];
        let mut scratch = Vec::with_capacity(self.order);
        for (f, &v) in self.entries.iter().enumerate() {
            let c = self.canonical(f, &mut scratch);
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
        lo.iter()
            .zip(&hi)
            .filter(|(l, _)| l.is_finite())
            .fold(0.0, |acc, (l, h)| acc.max(h - l))
    }

    /// Replaces each entry by the mean over all permutations of its index tuple.
    pub fn symmetrize(&self) -> Tensor {
        let len = self.entries.len();
        let mut sum = vec![0.0; len];
        let mut count = vec![0usize; len];
        let mut uniform = vec![true; len];
        let mut scratch = Vec::with_capacity(self.order);
        let canon: Vec<usize> = (0..len).map(|f| self.canonical(f, &mut scratch)).collect();
        for (f, &c) in canon.iter().enumerate() {
            sum[c] += self.entries[f];
            count[c] += 1;
            if self.entries[f] != self.entries[c] {
                uniform[c] = false;
            }
        }
        let entries = canon
            .iter()
            .map(|&c| {
                if uniform[c] {
                    self.entries[c]
                } else {
                    sum[c] / count[c] as f64
                }
            })
            .collect();
        Tensor {
            order: self.order,
            dim: self.dim,
            entries,
            symmetric: true,
        }
    }

    /// Multiplies every mode by the p-by-n matrix `mat` (row-major):
    /// `out[i_1..i_m] = sum_j T[j_1..j_m] mat[i_1][j_1] ... mat[i_m][j_m]`.
    pub fn multilinear_transform(&self, mat: &[f64], rows: usize) -> Result<Tensor> {
        let n = self.dim;
        if rows == 0 || mat.len() != rows * n {
            return Err(Error::DimensionMismatch {
                context: "multilinear_transform",
                expected: rows * n,
                found: mat.len(),
            });
        }
        // contract one mode at a time; after step k the first k modes have extent `rows`
        let mut cur = self.entries.clone();
        let mut shape = vec![n; self.order];
        for mode in 0..self.order {
            let outer: usize = shape[..mode].iter().product();
            let inner: usize = shape[mode + 1..].iter().product();
            let mut next = vec![0.0; outer * rows * inner];
            for o in 0..outer {
                for r in 0..rows {
                    let dst = &mut next[(o * rows + r) * inner..(o * rows + r + 1) * inner];
                    for j in 0..n {
                        let c = mat[r * n + j];
                        if c == 0.0 {
                            continue;
                        }
                        let src = &cur[(o * n + j) * inner..(o * n + j + 1) * inner];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += c * s;
                        }
                    }
                }
            }
            shape[mode] = rows;
            cur = next;
        }
        let mut out = Tensor::new(self.order, rows, cur)?;
        out.symmetric = out.symmetric || self.symmetric;
        Ok(out)
    }
}

/// Advances a row-major multi-index by one position (last index fastest).
pub(crate) fn advance(idx: &mut [usize], dim: usize) {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < dim {
            return;
        }
        *slot = 0;
    }
}

/// `x (x) x (x) ... (x) x` with `times` factors, row-major.
fn kron_power(x: &[f64], times: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..times {
        out = out.iter().flat_map(|&a| x.iter().map(move |&b| a * b)).collect();
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A nonempty, strictly increasing set of zero-based indices into `0..parent_dim`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "SubsetRepr", into = "SubsetRepr")]
pub struct IndexSubset {
    parent_dim: usize,
    members: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SubsetRepr {
    parent_dim: usize,
    members: Vec<usize>,
}

impl TryFrom<SubsetRepr> for IndexSubset {
    type Error = Error;
    fn try_from(r: SubsetRepr) -> Result<Self> {
        IndexSubset::new(r.parent_dim, r.members)
    }
}

impl From<IndexSubset> for SubsetRepr {
    fn from(s: IndexSubset) -> Self {
        SubsetRepr {
            parent_dim: s.parent_dim,
            members: s.members,
        }
    }
}

impl IndexSubset {
    pub fn new(parent_dim: usize, members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidSubset("subset is empty".into()));
        }
        if let Some(&bad) = members.iter().find(|&&i| i >= parent_dim) {
            return Err(Error::InvalidSubset(format!(
                "index {bad} out of range for dimension {parent_dim}"
            )));
        }
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(
                "members must be strictly increasing".into(),
            ));
        }
        Ok(IndexSubset {
            parent_dim,
            members,
        })
    }

    pub fn full(parent_dim: usize) -> Result<Self> {
        IndexSubset::new(parent_dim, (0..parent_dim).collect())
    }

    /// Subset whose members are the set bits of `mask`.
    pub fn from_mask(parent_dim: usize, mask: u64) -> Result<Self> {
        let members = (0..parent_dim.min(64)).filter(|&i| mask >> i & 1 == 1).collect();
        if parent_dim < 64 && mask >> parent_dim != 0 {
            return Err(Error::InvalidSubset(format!(
                "mask {mask:#b} has bits beyond dimension {parent_dim}"
            )));
        }
        IndexSubset::new(parent_dim, members)
    }

    pub fn parent_dim(&self) -> usize {
        self.parent_dim
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.parent_dim).filter(|&i| !self.contains(i)).collect()
    }

    /// Embeds `w` (indexed by members) into an n-vector that is zero off the subset.
    pub fn pad(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.members.len() {
            return Err(Error::DimensionMismatch {
                context: "IndexSubset::pad",
                expected: self.members.len(),
                found: w.len(),
            });
        }
        let mut x = vec![0.0; self.parent_dim];
        for (&i, &v) in self.members.iter().zip(w) {
            x[i] = v;
        }
        Ok(x)
    }
}

/// An (A, B) pair of equal order and dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorPair {
    pub a: Tensor,
    pub b: Tensor,
}

impl TensorPair {
    pub fn new(a: Tensor, b: Tensor) -> Result<Self> {
        if a.order() != b.order() {
            return Err(Error::OrderMismatch {
                left: a.order(),
                right: b.order(),
            });
        }
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                context: "TensorPair",
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(TensorPair { a, b })
    }

    /// Pair with B the unit tensor.
    pub fn with_unit(a: Tensor) -> Result<Self> {
        let b = Tensor::unit(a.order(), a.dim())?;
        TensorPair::new(a, b)
    }

    pub fn order(&self) -> usize {
        self.a.order()
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn is_symmetric(&self) -> bool {
        self.a.is_symmetric() && self.b.is_symmetric()
    }

    pub fn symmetrize(&self) -> TensorPair {
        TensorPair {
            a: self.a.symmetrize(),
            b: self.b.symmetrize(),
        }
    }

    pub fn principal(&self, j: &IndexSubset) -> Result<TensorPair> {
        TensorPair::new(self.a.principal_subtensor(j)?, self.b.principal_subtensor(j)?)
    }
}
