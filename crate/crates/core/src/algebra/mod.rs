//! Exact arithmetic in the complex exterior algebra over a declared generator
//! set, plus Berezin calculus: derivatives, integrals, shifts, nilpotent
//! exponentials and Gaussian integrals.
//!
//! All values are immutable after construction and every operation is pure.

mod element;
mod gaussian;
mod signature;

pub use element::{DerivativeSide, GrassmannElement, Monomial};
pub use gaussian::gaussian_integral;
pub(crate) use gaussian::det_and_inverse as gaussian_det_and_inverse;
pub use signature::{
    AlgebraSignature, GeneratorId, GeneratorKind, OperatorConvention, Parity, MAX_GENERATORS,
};

#[cfg(test)]
mod tests;
