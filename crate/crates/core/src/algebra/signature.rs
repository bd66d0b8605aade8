//! Generator signatures for the complex exterior (Grassmann) algebra.
//!
//! A signature declares `n` phase-space pairs (ψ₁..ψₙ, π₁..πₙ), a set of
//! named parameter generators (couplings such as α, α*), the value of ħ and
//! the operator convention. The generator ordering is total and immutable:
//! ψ₁ < … < ψₙ < π₁ < … < πₙ < param₁ < … . Auxiliary generators appended by
//! `extend` sort after everything declared before them, so monomial bitmasks
//! of a base signature remain valid in any extension.

use std::fmt;
use std::sync::Arc;

use crate::error::AlgebraError;

/// Index of a generator in a signature's canonical ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorId(pub usize);

/// Grassmann parity of a homogeneous element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Parity {
    Even,
    Odd,
    /// Inhomogeneous: both even and odd monomials present.
    Mixed,
}

/// Operator representation convention.
///
/// `Canonical` realizes {ψ̂ⱼ, π̂ₖ}₊ = iħ δⱼₖ (π̂ = i√ħ · creation);
/// `MatrixBasis` realizes {ψ̂ⱼ, π̂ₖ}₊ = δⱼₖ with ħ fixed to 1 there
/// (ψ̂ = [[0,1],[0,0]], π̂ = [[0,0],[1,0]] for n = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OperatorConvention {
    Canonical,
    MatrixBasis,
}

impl fmt::Display for OperatorConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorConvention::Canonical => write!(f, "canonical"),
            OperatorConvention::MatrixBasis => write!(f, "matrix_basis"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// ψⱼ, 1-based mode index.
    FieldPsi(usize),
    /// πⱼ, 1-based mode index.
    FieldPi(usize),
    /// Coupling or auxiliary integration generator.
    Parameter,
}

/// Immutable generator signature shared by all elements of one algebra.
#[derive(Debug)]
pub struct AlgebraSignature {
    n: usize,
    hbar: f64,
    convention: OperatorConvention,
    prune_eps: f64,
    names: Vec<String>,
    kinds: Vec<GeneratorKind>,
}

/// Hard cap so monomials fit a u32 bitmask.
pub const MAX_GENERATORS: usize = 32;

impl AlgebraSignature {
    /// Signature with `n` phase-space pairs and named parameter generators.
    pub fn new(
        n: usize,
        params: &[&str],
        hbar: f64,
        convention: OperatorConvention,
    ) -> Result<Arc<Self>, AlgebraError> {
        if n == 0 {
            return Err(AlgebraError::InvalidSignature("n must be >= 1".into()));
        }
        if hbar <= 0.0 {
            return Err(AlgebraError::InvalidSignature("hbar must be > 0".into()));
        }
        let mut names = Vec::with_capacity(2 * n + params.len());
        let mut kinds = Vec::with_capacity(2 * n + params.len());
        for j in 1..=n {
            names.push(format!("psi{j}"));
            kinds.push(GeneratorKind::FieldPsi(j));
        }
        for j in 1..=n {
            names.push(format!("pi{j}"));
            kinds.push(GeneratorKind::FieldPi(j));
        }
        for p in params {
            if names.iter().any(|q| q == p) {
                return Err(AlgebraError::InvalidSignature(format!(
                    "duplicate generator name {p}"
                )));
            }
            names.push((*p).to_string());
            kinds.push(GeneratorKind::Parameter);
        }
        if names.len() > MAX_GENERATORS {
            return Err(AlgebraError::TooManyGenerators(names.len()));
        }
        Ok(Arc::new(Self {
            n,
            hbar,
            convention,
            prune_eps: 1e-14,
            names,
            kinds,
        }))
    }

    /// Single-mode canonical signature, the workhorse for tests.
    pub fn single_mode(hbar: f64) -> Arc<Self> {
        Self::new(1, &[], hbar, OperatorConvention::Canonical).expect("valid")
    }

    /// New signature with additional parameter generators appended.
    ///
    /// Monomial bitmasks of `self` stay valid in the extension, so elements
    /// can be lifted without re-encoding.
    pub fn extend(self: &Arc<Self>, aux: &[&str]) -> Result<Arc<Self>, AlgebraError> {
        let mut names = self.names.clone();
        let mut kinds = self.kinds.clone();
        for a in aux {
            if names.iter().any(|q| q == a) {
                return Err(AlgebraError::InvalidSignature(format!(
                    "duplicate generator name {a}"
                )));
            }
            names.push((*a).to_string());
            kinds.push(GeneratorKind::Parameter);
        }
        if names.len() > MAX_GENERATORS {
            return Err(AlgebraError::TooManyGenerators(names.len()));
        }
        Ok(Arc::new(Self {
            n: self.n,
            hbar: self.hbar,
            convention: self.convention,
            prune_eps: self.prune_eps,
            names,
            kinds,
        }))
    }

    /// Same signature with a different coefficient-pruning threshold.
    pub fn with_prune_eps(self: &Arc<Self>, eps: f64) -> Arc<Self> {
        Arc::new(Self {
            n: self.n,
            hbar: self.hbar,
            convention: self.convention,
            prune_eps: eps,
            names: self.names.clone(),
            kinds: self.kinds.clone(),
        })
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn convention(&self) -> OperatorConvention {
        self.convention
    }

    pub fn prune_eps(&self) -> f64 {
        self.prune_eps
    }

    pub fn num_generators(&self) -> usize {
        self.names.len()
    }

    /// ψⱼ (1-based mode).
    pub fn psi(&self, j: usize) -> GeneratorId {
        assert!(j >= 1 && j <= self.n, "mode out of range");
        GeneratorId(j - 1)
    }

    /// πⱼ (1-based mode).
    pub fn pi(&self, j: usize) -> GeneratorId {
        assert!(j >= 1 && j <= self.n, "mode out of range");
        GeneratorId(self.n + j - 1)
    }

    /// Generator by name.
    pub fn generator(&self, name: &str) -> Result<GeneratorId, AlgebraError> {
        self.names
            .iter()
            .position(|q| q == name)
            .map(GeneratorId)
            .ok_or_else(|| AlgebraError::UnknownGenerator(name.to_string()))
    }

    pub fn name(&self, g: GeneratorId) -> &str {
        &self.names[g.0]
    }

    pub fn kind(&self, g: GeneratorId) -> GeneratorKind {
        self.kinds[g.0]
    }

    pub fn contains(&self, g: GeneratorId) -> bool {
        g.0 < self.names.len()
    }

    /// Scalar value of the anticommutator {ψ̂ⱼ, π̂ⱼ}₊ in this convention.
    pub fn car_constant(&self) -> num_complex::Complex64 {
        match self.convention {
            OperatorConvention::Canonical => num_complex::Complex64::new(0.0, self.hbar),
            OperatorConvention::MatrixBasis => num_complex::Complex64::new(1.0, 0.0),
        }
    }

    /// Structural compatibility: same ordering, ħ and convention.
    pub fn compatible(&self, other: &Self) -> bool {
        self.n == other.n
            && self.hbar == other.hbar
            && self.convention == other.convention
            && self.names == other.names
    }

    /// True when every generator of `self` appears, in order, as a prefix of `ext`.
    pub fn is_prefix_of(&self, ext: &Self) -> bool {
        self.n == ext.n
            && self.hbar == ext.hbar
            && self.convention == ext.convention
            && ext.names.len() >= self.names.len()
            && ext.names[..self.names.len()] == self.names[..]
    }

    /// Conjugate generator and the scalar factor picked up by the involution.
    ///
    /// Phase-space generators conjugate according to π = iψ*: in the canonical
    /// convention ψⱼ* = −iπⱼ and πⱼ* = −iψⱼ; in the matrix basis ψⱼ* = πⱼ and
    /// πⱼ* = ψⱼ. Parameter generators pair by trailing-star naming
    /// (`alpha` ↔ `alpha*`); unpaired parameters are self-conjugate.
    pub fn conjugate_generator(&self, g: GeneratorId) -> (GeneratorId, num_complex::Complex64) {
        use num_complex::Complex64 as C;
        match self.kinds[g.0] {
            GeneratorKind::FieldPsi(j) => {
                let factor = match self.convention {
                    OperatorConvention::Canonical => C::new(0.0, -1.0),
                    OperatorConvention::MatrixBasis => C::new(1.0, 0.0),
                };
                (self.pi(j), factor)
            }
            GeneratorKind::FieldPi(j) => {
                let factor = match self.convention {
                    OperatorConvention::Canonical => C::new(0.0, -1.0),
                    OperatorConvention::MatrixBasis => C::new(1.0, 0.0),
                };
                (self.psi(j), factor)
            }
            GeneratorKind::Parameter => {
                let name = &self.names[g.0];
                let partner = if let Some(stem) = name.strip_suffix('*') {
                    stem.to_string()
                } else {
                    format!("{name}*")
                };
                match self.generator(&partner) {
                    Ok(p) => (p, C::new(1.0, 0.0)),
                    Err(_) => (g, C::new(1.0, 0.0)),
                }
            }
        }
    }
}
