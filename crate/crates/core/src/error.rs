//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("elements belong to different algebra signatures")]
    SignatureMismatch,
    #[error("unknown generator: {0}")]
    UnknownGenerator(String),
    #[error("duplicate generator: {0}")]
    DuplicateGenerator(String),
    #[error("expected a Grassmann-odd element")]
    NotOdd,
    #[error("element depends on generator {0}")]
    DependsOnGenerator(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("signature would exceed the {0}-generator limit")]
    TooManyGenerators(usize),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("driven model requires a coupling")]
    MissingCoupling,
    #[error("frequency must be nonzero here: {0}")]
    ZeroFrequency(String),
    #[error("coupling magnitude must be nonnegative")]
    NegativeCoupling,
    #[error("expected a Grassmann-even Hamiltonian symbol")]
    OddHamiltonian,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum FkError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("tau grid must be non-empty, positive and strictly increasing")]
    BadGrid,
    #[error("need at least {need} samples spanning a decade in tau, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("trace vanished at tau = {0}; no decay rate to fit")]
    VanishingTrace(f64),
    #[error("limit classifier needs at least one nonzero coefficient")]
    AllCoefficientsZero,
}
