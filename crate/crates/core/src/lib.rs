//! Fermionic phase-space quantum mechanics by exact Grassmann-algebra
//! computation.
//!
//! The library builds up from Berezin calculus on a sparse exterior algebra
//! (`algebra`) to finite matrix representations of fermionic operators
//! (`fock`), the Stratonovich-Weyl correspondence between symbols and
//! operators (`weyl`), the fermionic Moyal star product (`star`),
//! star-exponentials computed by independent routes (`starexp`), two concrete
//! oscillator models (`models`), and ground-state energy extraction through
//! the imaginary-time decay of phase-space traces (`fkac`).
//!
//! Every route that admits a closed form is implemented verbatim next to an
//! independent matrix oracle; agreements and disagreements are first-class,
//! reportable outputs rather than assumptions.

pub mod algebra;
pub mod fock;
pub mod star;
pub mod weyl;
pub mod error;

pub use algebra::{
    gaussian_integral, AlgebraSignature, DerivativeSide, GeneratorId, GeneratorKind,
    GrassmannElement, Monomial, OperatorConvention, Parity,
};
pub use error::{AlgebraError, FkError, ModelError};
