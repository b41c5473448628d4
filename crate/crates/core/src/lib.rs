//! Cone eigenvalue complementarity problems for pairs of higher-order tensors.
//!
//! Given order-m, dimension-n tensors A and B and a closed convex cone K, a
//! K-eigenpair is a scalar λ and a nonzero x with
//!
//! ```text
//! x ∈ K,   w := λ B x^{m-1} - A x^{m-1} ∈ K*,   <x, w> = 0.
//! ```
//!
//! With K the nonnegative orthant these are the Pareto eigenpairs. The crate
//! provides the scaling-and-projection iteration ([`spa::solve`]), brute-force
//! Pareto-spectrum enumeration for small instances ([`spectrum`]), eigenpair
//! verification and Rayleigh-quotient tools ([`analysis`]), eigenvalue count
//! bounds ([`bounds`]), and a JSON problem format with embedded reference
//! fixtures ([`io`], [`fixtures`]).

pub mod analysis;
pub mod bounds;
pub mod cone;
pub mod copositivity;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod simplex;
pub mod spa;
pub mod spectrum;
pub mod tensor;

#[cfg(test)]
mod test_util;

pub use analysis::{verify_eigenpair, EigenPair, VerifyReport};
pub use cone::{Cone, Generators};
pub use error::{Error, Result};
pub use spa::{solve, SolveParams, SolveResult, SolveStatus, Start, StopRule};
pub use spectrum::{enumerate_pareto_spectrum, SpectrumParams, SpectrumReport};
pub use tensor::{IndexSubset, Tensor, TensorPair};
