//! Finite matrix representation of the fermionic operators on the
//! 2ⁿ-dimensional Fock space: Grassmann-valued matrices and state vectors,
//! coherent kets and bras, matrix exponentials and the graded phase-space
//! trace. This layer is the ground-truth oracle everything else is checked
//! against.
//!
//! Scalars and operators are kept in the same formal algebra: a matrix entry
//! is a `GrassmannElement`, a Grassmann coefficient attached to an operator
//! multiplies the resulting entries from the left, and all sign bookkeeping
//! reduces to products inside entries. Occupation basis: index bit (n−j)
//! holds mode j, so mode 1 is the most significant bit and `|0⟩` is index 0.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{AlgebraSignature, GeneratorId, GrassmannElement, Parity};
use crate::error::AlgebraError;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2ⁿ×2ⁿ matrix with Grassmann-element entries, row-major.
#[derive(Clone)]
pub struct OperatorMatrix {
    sig: Arc<AlgebraSignature>,
    dim: usize,
    entries: Vec<GrassmannElement>,
}

/// Ket or bra over the Fock basis with Grassmann-element components.
#[derive(Clone)]
pub struct StateVector {
    sig: Arc<AlgebraSignature>,
    pub flavor: StateFlavor,
    components: Vec<GrassmannElement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFlavor {
    Ket,
    Bra,
}

impl OperatorMatrix {
    pub fn zeros(sig: &Arc<AlgebraSignature>, dim: usize) -> Self {
        Self {
            sig: sig.clone(),
            dim,
            entries: vec![GrassmannElement::zero(sig); dim * dim],
        }
    }

    pub fn identity(sig: &Arc<AlgebraSignature>, dim: usize) -> Self {
        let mut m = Self::zeros(sig, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = GrassmannElement::one(sig);
        }
        m
    }

    pub fn from_complex(sig: &Arc<AlgebraSignature>, rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(sig, dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "square matrix required");
            for (j, &v) in row.iter().enumerate() {
                m.entries[i * dim + j] = GrassmannElement::scalar(sig, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn entry(&self, i: usize, j: usize) -> &GrassmannElement {
        &self.entries[i * self.dim + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: GrassmannElement) {
        self.entries[i * self.dim + j] = v;
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.dim != other.dim || !self.sig.compatible(&other.sig) {
            return Err(AlgebraError::SignatureMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut m = self.clone();
        for (e, o) in m.entries.iter_mut().zip(&other.entries) {
            *e = e.add(o)?;
        }
        Ok(m)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut m = self.clone();
        for (e, o) in m.entries.iter_mut().zip(&other.entries) {
            *e = e.sub(o)?;
        }
        Ok(m)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = self.clone();
        for e in m.entries.iter_mut() {
            *e = e.scale(s);
        }
        m
    }

    /// λ·M with a Grassmann coefficient: left-multiplies every entry.
    pub fn scale_left(&self, s: &GrassmannElement) -> Result<Self, AlgebraError> {
        let mut m = self.clone();
        for e in m.entries.iter_mut() {
            *e = s.mul(e)?;
        }
        Ok(m)
    }

    /// M·λ: right-multiplies every entry.
    pub fn scale_right(&self, s: &GrassmannElement) -> Result<Self, AlgebraError> {
        let mut m = self.clone();
        for e in m.entries.iter_mut() {
            *e = e.mul(s)?;
        }
        Ok(m)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let d = self.dim;
        let mut m = Self::zeros(&self.sig, d);
        for i in 0..d {
            for k in 0..d {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = other.entry(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(b)?;
                    m.entries[i * d + j] = m.entries[i * d + j].add(&prod)?;
                }
            }
        }
        Ok(m)
    }

    /// Graded composition: with entries decomposed as scalar·operator pieces,
    /// (q·E)(r·F) = (−1)^{|E||r|}(qr)(EF), where |E| is the occupation parity
    /// of the basis pair an entry connects and |r| the Grassmann parity of
    /// the right factor's scalar. This is the super-tensor-product rule under
    /// which odd coupling parameters anticommute with odd operators; it
    /// coincides with `mul` whenever the right factor's entries are even.
    pub fn graded_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let d = self.dim;
        let mut m = Self::zeros(&self.sig, d);
        for i in 0..d {
            for k in 0..d {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                let op_parity = (i.count_ones() + k.count_ones()) % 2;
                for j in 0..d {
                    let b = other.entry(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let factor = if op_parity == 1 {
                        let (be, bo) = b.parity_split();
                        be.sub(&bo)?
                    } else {
                        b.clone()
                    };
                    let prod = a.mul(&factor)?;
                    m.entries[i * d + j] = m.entries[i * d + j].add(&prod)?;
                }
            }
        }
        Ok(m)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    pub fn graded_commutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.graded_mul(other)?.sub(&other.graded_mul(self)?)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Hermitian adjoint: transpose plus the algebra involution on entries.
    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let mut m = Self::zeros(&self.sig, d);
        for i in 0..d {
            for j in 0..d {
                m.entries[j * d + i] = self.entry(i, j).conjugate();
            }
        }
        m
    }

    /// Matrix trace Σᵢ Mᵢᵢ (not the graded phase-space trace).
    pub fn matrix_trace(&self) -> GrassmannElement {
        let mut t = GrassmannElement::zero(&self.sig);
        for i in 0..self.dim {
            t = t.add(self.entry(i, i)).expect("same signature");
        }
        t
    }

    /// Body of the matrix: scalar part of every entry.
    pub fn body(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j).body()).collect())
            .collect()
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector, AlgebraError> {
        assert_eq!(v.flavor, StateFlavor::Ket, "apply expects a ket");
        if self.dim != v.components.len() || !self.sig.compatible(&v.sig) {
            return Err(AlgebraError::SignatureMismatch);
        }
        let mut out = StateVector::zero_ket(&self.sig, self.dim);
        for i in 0..self.dim {
            let mut acc = GrassmannElement::zero(&self.sig);
            for j in 0..self.dim {
                acc = acc.add(&self.entry(i, j).mul(&v.components[j])?)?;
            }
            out.components[i] = acc;
        }
        Ok(out)
    }

    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_coeff_distance(b))
            .fold(0.0, f64::max)
    }

    pub fn inf_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.inf_norm()).fold(0.0, f64::max)
    }

    /// Max row sum of entry 1-norms; sub-multiplicative over the algebra.
    fn scaling_norm(&self) -> f64 {
        let d = self.dim;
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        self.entry(i, j)
                            .terms()
                            .map(|(_, co)| co.norm())
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Grassmann parity of the operator, combining entry parity with the
    /// occupation parity of the basis states an entry connects.
    pub fn operator_parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let e = self.entry(i, j);
                if e.is_zero() {
                    continue;
                }
                let basis_parity = ((i.count_ones() + j.count_ones()) % 2) as u32;
                match e.parity() {
                    Parity::Even => {
                        if basis_parity == 0 {
                            even = true;
                        } else {
                            odd = true;
                        }
                    }
                    Parity::Odd => {
                        if basis_parity == 0 {
                            odd = true;
                        } else {
                            even = true;
                        }
                    }
                    Parity::Mixed => {
                        even = true;
                        odd = true;
                    }
                }
            }
        }
        match (even, odd) {
            (true, true) => Parity::Mixed,
            (false, true) => Parity::Odd,
            _ => Parity::Even,
        }
    }

    /// Reinterpret in an extended signature.
    pub fn lift(&self, ext: &Arc<AlgebraSignature>) -> Result<Self, AlgebraError> {
        let mut m = Self::zeros(ext, self.dim);
        for (k, e) in self.entries.iter().enumerate() {
            m.entries[k] = e.lift(ext)?;
        }
        Ok(m)
    }

    pub fn restrict(&self, base: &Arc<AlgebraSignature>) -> Result<Self, AlgebraError> {
        let mut m = Self::zeros(base, self.dim);
        for (k, e) in self.entries.iter().enumerate() {
            m.entries[k] = e.restrict(base)?;
        }
        Ok(m)
    }
}

impl StateVector {
    pub fn zero_ket(sig: &Arc<AlgebraSignature>, dim: usize) -> Self {
        Self {
            sig: sig.clone(),
            flavor: StateFlavor::Ket,
            components: vec![GrassmannElement::zero(sig); dim],
        }
    }

    pub fn zero_bra(sig: &Arc<AlgebraSignature>, dim: usize) -> Self {
        Self {
            sig: sig.clone(),
            flavor: StateFlavor::Bra,
            components: vec![GrassmannElement::zero(sig); dim],
        }
    }

    pub fn component(&self, i: usize) -> &GrassmannElement {
        &self.components[i]
    }

    pub fn components(&self) -> &[GrassmannElement] {
        &self.components
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        assert_eq!(self.flavor, other.flavor);
        let mut v = self.clone();
        for (a, b) in v.components.iter_mut().zip(&other.components) {
            *a = a.add(b)?;
        }
        Ok(v)
    }

    /// λ·v, coefficient to the left of each component.
    pub fn scale_left(&self, s: &GrassmannElement) -> Result<Self, AlgebraError> {
        let mut v = self.clone();
        for a in v.components.iter_mut() {
            *a = s.mul(a)?;
        }
        Ok(v)
    }

    /// v·λ, coefficient to the right.
    pub fn scale_right(&self, s: &GrassmannElement) -> Result<Self, AlgebraError> {
        let mut v = self.clone();
        for a in v.components.iter_mut() {
            *a = a.mul(s)?;
        }
        Ok(v)
    }

    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_coeff_distance(b))
            .fold(0.0, f64::max)
    }
}

/// ⟨bra|M|ket⟩-style pairing: Σₐ braₐ·ketₐ with the bra factor on the left.
pub fn inner(bra: &StateVector, ket: &StateVector) -> Result<GrassmannElement, AlgebraError> {
    assert_eq!(bra.flavor, StateFlavor::Bra);
    assert_eq!(ket.flavor, StateFlavor::Ket);
    if bra.components.len() != ket.components.len() || !bra.sig.compatible(&ket.sig) {
        return Err(AlgebraError::SignatureMismatch);
    }
    let mut acc = GrassmannElement::zero(&bra.sig);
    for (b, k) in bra.components.iter().zip(&ket.components) {
        acc = acc.add(&b.mul(k)?)?;
    }
    Ok(acc)
}

/// bra·M as a new bra.
pub fn bra_apply(bra: &StateVector, m: &OperatorMatrix) -> Result<StateVector, AlgebraError> {
    assert_eq!(bra.flavor, StateFlavor::Bra);
    if bra.components.len() != m.dim || !bra.sig.compatible(&m.sig) {
        return Err(AlgebraError::SignatureMismatch);
    }
    let mut out = StateVector::zero_bra(&m.sig, m.dim);
    for j in 0..m.dim {
        let mut acc = GrassmannElement::zero(&m.sig);
        for i in 0..m.dim {
            acc = acc.add(&bra.components[i].mul(m.entry(i, j))?)?;
        }
        out.components[j] = acc;
    }
    Ok(out)
}

/// |ket⟩⟨bra| with entries ketₐ·bra_b.
pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<OperatorMatrix, AlgebraError> {
    assert_eq!(ket.flavor, StateFlavor::Ket);
    assert_eq!(bra.flavor, StateFlavor::Bra);
    let d = ket.components.len();
    let mut m = OperatorMatrix::zeros(&ket.sig, d);
    for a in 0..d {
        for b in 0..d {
            m.set_entry(a, b, ket.components[a].mul(&bra.components[b])?);
        }
    }
    Ok(m)
}

/// The representation: ladder matrices and derived operators for a signature.
pub struct FockSpace {
    sig: Arc<AlgebraSignature>,
    dim: usize,
    psi_ops: Vec<OperatorMatrix>,
    pi_ops: Vec<OperatorMatrix>,
}

impl FockSpace {
    /// Standard fermion-ladder construction with alternating-sign chain
    /// factors on earlier modes, in the signature's convention:
    /// canonical sets ψ̂ⱼ = √ħ bⱼ, π̂ⱼ = i√ħ b†ⱼ ({ψ̂ⱼ,π̂ₖ}₊ = iħδⱼₖ);
    /// the matrix basis sets ψ̂ⱼ = bⱼ, π̂ⱼ = b†ⱼ ({ψ̂ⱼ,π̂ₖ}₊ = δⱼₖ).
    pub fn new(sig: &Arc<AlgebraSignature>) -> Self {
        let n = sig.modes();
        let dim = 1usize << n;
        let (s_psi, s_pi) = match sig.convention() {
            crate::algebra::OperatorConvention::Canonical => {
                let r = sig.hbar().sqrt();
                (c64(r, 0.0), c64(0.0, r))
            }
            crate::algebra::OperatorConvention::MatrixBasis => (c64(1.0, 0.0), c64(1.0, 0.0)),
        };
        let mut psi_ops = Vec::with_capacity(n);
        let mut pi_ops = Vec::with_capacity(n);
        for j in 1..=n {
            let p = n - j; // bit position of mode j
            let mut lower = OperatorMatrix::zeros(sig, dim);
            for x in 0..dim {
                if x & (1 << p) != 0 {
                    let chain = (x >> (p + 1)).count_ones();
                    let sgn = if chain % 2 == 0 { 1.0 } else { -1.0 };
                    lower.set_entry(
                        x & !(1 << p),
                        x,
                        GrassmannElement::scalar(sig, c64(sgn, 0.0)),
                    );
                }
            }
            let mut raise = OperatorMatrix::zeros(sig, dim);
            for x in 0..dim {
                if x & (1 << p) == 0 {
                    let chain = (x >> (p + 1)).count_ones();
                    let sgn = if chain % 2 == 0 { 1.0 } else { -1.0 };
                    raise.set_entry(
                        x | (1 << p),
                        x,
                        GrassmannElement::scalar(sig, c64(sgn, 0.0)),
                    );
                }
            }
            psi_ops.push(lower.scale(s_psi));
            pi_ops.push(raise.scale(s_pi));
        }
        Self {
            sig: sig.clone(),
            dim,
            psi_ops,
            pi_ops,
        }
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// ψ̂ⱼ, 1-based mode.
    pub fn psi_op(&self, j: usize) -> &OperatorMatrix {
        &self.psi_ops[j - 1]
    }

    /// π̂ⱼ, 1-based mode.
    pub fn pi_op(&self, j: usize) -> &OperatorMatrix {
        &self.pi_ops[j - 1]
    }

    /// Number operator π̂ⱼψ̂ⱼ normalized by the convention constant.
    pub fn number_op(&self, j: usize) -> OperatorMatrix {
        let c = self.sig.car_constant();
        self.pi_op(j)
            .mul(self.psi_op(j))
            .expect("same signature")
            .scale(c.inv())
    }

    pub fn identity(&self) -> OperatorMatrix {
        OperatorMatrix::identity(&self.sig, self.dim)
    }

    pub fn vacuum_ket(&self) -> StateVector {
        let mut v = StateVector::zero_ket(&self.sig, self.dim);
        v.components[0] = GrassmannElement::one(&self.sig);
        v
    }

    pub fn vacuum_bra(&self) -> StateVector {
        let mut v = StateVector::zero_bra(&self.sig, self.dim);
        v.components[0] = GrassmannElement::one(&self.sig);
        v
    }

    /// Coherent ket |ψ⟩ = Πⱼ(1 + κ π̂ⱼvⱼ)|0⟩ with κ = 1/{ψ̂,π̂}₊, satisfying
    /// ψ̂ⱼ|ψ⟩ = vⱼ|ψ⟩ entrywise.
    pub fn coherent_ket(&self, values: &[GrassmannElement]) -> Result<StateVector, AlgebraError> {
        self.check_values(values)?;
        let kappa = self.sig.car_constant().inv();
        let mut state = self.vacuum_ket();
        for (j, v) in values.iter().enumerate() {
            let step = self.pi_ops[j].apply(&state)?.scale_left(v)?;
            state = state.add(&step.scale_left(&GrassmannElement::scalar(&self.sig, kappa))?)?;
        }
        Ok(state)
    }

    /// Coherent bra ⟨ψ| = ⟨0|(ψ̂₁⋯ψ̂ₙ) Πⱼ(1 − κ π̂ⱼvⱼ); pairs with kets to the
    /// Grassmann delta ⟨ψ'|ψ⟩ = Πⱼ(vⱼ − v'ⱼ).
    pub fn coherent_bra(&self, values: &[GrassmannElement]) -> Result<StateVector, AlgebraError> {
        self.check_values(values)?;
        let kappa = self.sig.car_constant().inv();
        let mut bra = self.vacuum_bra();
        for j in 1..=self.sig.modes() {
            bra = bra_apply(&bra, self.psi_op(j))?;
        }
        for (j, v) in values.iter().enumerate() {
            let step = bra_apply(&bra, &self.pi_ops[j])?.scale_right(v)?;
            bra = bra.add(&step.scale_right(&GrassmannElement::scalar(&self.sig, -kappa))?)?;
        }
        Ok(bra)
    }

    /// Momentum-basis ket |π⟩ = Πⱼ(1 − κ ψ̂ⱼvⱼ)(π̂₁⋯π̂ₙ)|0⟩.
    pub fn coherent_ket_pi(
        &self,
        values: &[GrassmannElement],
    ) -> Result<StateVector, AlgebraError> {
        self.check_values(values)?;
        let kappa = self.sig.car_constant().inv();
        let mut state = self.vacuum_ket();
        for j in (1..=self.sig.modes()).rev() {
            state = self.pi_op(j).apply(&state)?;
        }
        for (j, v) in values.iter().enumerate() {
            let step = self.psi_ops[j].apply(&state)?.scale_left(v)?;
            state = state.add(&step.scale_left(&GrassmannElement::scalar(&self.sig, -kappa))?)?;
        }
        Ok(state)
    }

    /// Momentum-basis bra ⟨π| = ⟨0| Πⱼ(1 + κ ψ̂ⱼvⱼ); pairs with ψ-kets to
    /// ⟨π|ψ⟩ = exp(κ Σⱼ πⱼψⱼ).
    pub fn coherent_bra_pi(
        &self,
        values: &[GrassmannElement],
    ) -> Result<StateVector, AlgebraError> {
        self.check_values(values)?;
        let kappa = self.sig.car_constant().inv();
        let mut bra = self.vacuum_bra();
        for (j, v) in values.iter().enumerate() {
            let step = bra_apply(&bra, &self.psi_ops[j])?.scale_right(v)?;
            bra = bra.add(&step.scale_right(&GrassmannElement::scalar(&self.sig, kappa))?)?;
        }
        Ok(bra)
    }

    fn check_values(&self, values: &[GrassmannElement]) -> Result<(), AlgebraError> {
        if values.len() != self.sig.modes() {
            return Err(AlgebraError::InvalidSignature(
                "one coherent value per mode required".into(),
            ));
        }
        for v in values {
            if !v.is_zero() && v.parity() != Parity::Odd {
                return Err(AlgebraError::NotOdd);
            }
        }
        Ok(())
    }

    /// Graded trace tr Ô = c⁻ⁿ ∫ ⟨ψ̃|Ô|ψ̃⟩ Dψ̃ over fresh coherent arguments,
    /// c = {ψ̂,π̂}₊. Satisfies tr{ÔÔ'} = (−1)^{eₒeₒ'} tr{Ô'Ô} and pairs with
    /// phase-space integration: ∫ symbol(Ô·Ô') = tr{ÔÔ'}. Note tr(1) = 0:
    /// opposite-occupation states contribute with opposite signs.
    pub fn trace_grassmann(&self, m: &OperatorMatrix) -> Result<GrassmannElement, AlgebraError> {
        let n = self.sig.modes();
        let names: Vec<String> = (1..=n).map(|j| format!("@tr_psi{j}")).collect();
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let ext = self.sig.extend(&name_refs)?;
        let fock_ext = FockSpace::new(&ext);
        let vals: Vec<GrassmannElement> = name_refs
            .iter()
            .map(|nm| GrassmannElement::generator(&ext, ext.generator(nm).unwrap()))
            .collect();
        let ket = fock_ext.coherent_ket(&vals)?;
        let bra = fock_ext.coherent_bra(&vals)?;
        let sandwich = inner(&bra, &m.lift(&ext)?.apply(&ket)?)?;
        let measure: Vec<GeneratorId> = name_refs
            .iter()
            .map(|nm| ext.generator(nm).unwrap())
            .collect();
        let integrated = sandwich.berezin_integrate(&measure)?;
        let c = self.sig.car_constant();
        let norm = c.powi(-(n as i32));
        integrated.scale(norm).restrict(&self.sig)
    }

    /// Same trace evaluated in the momentum basis: c⁻ⁿ ∫ ⟨π̃|Ô|π̃⟩ Dπ̃.
    pub fn trace_grassmann_pi(
        &self,
        m: &OperatorMatrix,
    ) -> Result<GrassmannElement, AlgebraError> {
        let n = self.sig.modes();
        let names: Vec<String> = (1..=n).map(|j| format!("@tr_pi{j}")).collect();
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let ext = self.sig.extend(&name_refs)?;
        let fock_ext = FockSpace::new(&ext);
        let vals: Vec<GrassmannElement> = name_refs
            .iter()
            .map(|nm| GrassmannElement::generator(&ext, ext.generator(nm).unwrap()))
            .collect();
        let ket = fock_ext.coherent_ket_pi(&vals)?;
        let bra = fock_ext.coherent_bra_pi(&vals)?;
        let sandwich = inner(&bra, &m.lift(&ext)?.apply(&ket)?)?;
        let measure: Vec<GeneratorId> = name_refs
            .iter()
            .map(|nm| ext.generator(nm).unwrap())
            .collect();
        let integrated = sandwich.berezin_integrate(&measure)?;
        let c = self.sig.car_constant();
        let norm = c.powi(-(n as i32));
        integrated.scale(norm).restrict(&self.sig)
    }

    /// ∫ |ψ̃⟩ Dψ̃ ⟨ψ̃| with the measure between ket and bra: each Berezin
    /// differential anticommutes past the bra component before integrating.
    pub fn completeness_integral(&self) -> Result<OperatorMatrix, AlgebraError> {
        let n = self.sig.modes();
        let names: Vec<String> = (1..=n).map(|j| format!("@cp_psi{j}")).collect();
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let ext = self.sig.extend(&name_refs)?;
        let fock_ext = FockSpace::new(&ext);
        let vals: Vec<GrassmannElement> = name_refs
            .iter()
            .map(|nm| GrassmannElement::generator(&ext, ext.generator(nm).unwrap()))
            .collect();
        let ket = fock_ext.coherent_ket(&vals)?;
        let bra = fock_ext.coherent_bra(&vals)?;
        let measure: Vec<GeneratorId> = name_refs
            .iter()
            .map(|nm| ext.generator(nm).unwrap())
            .collect();
        let mut out = OperatorMatrix::zeros(&ext, self.dim);
        for a in 0..self.dim {
            for b in 0..self.dim {
                let (bra_even, bra_odd) = bra.component(b).parity_split();
                // moving n odd measure symbols across the odd bra part
                let odd_sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let integrand = ket
                    .component(a)
                    .mul(&bra_even)?
                    .add(&ket.component(a).mul(&bra_odd)?.scale(c64(odd_sign, 0.0)))?;
                out.set_entry(a, b, integrand.berezin_integrate(&measure)?);
            }
        }
        out.restrict(&self.sig)
    }
}

/// exp(s·M) by scaling and squaring with a Taylor kernel, over the finite
/// dimensional algebra of Grassmann-entry matrices. The body is handled with
/// the usual norm-controlled scaling; the nilpotent part converges inside the
/// same series (every coefficient is a finite polynomial in converged
/// scalars).
pub fn matrix_exp(m: &OperatorMatrix, s: Complex64) -> OperatorMatrix {
    let scaled = m.scale(s);
    let norm = scaled.scaling_norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let factor = c64(1.0 / f64::powi(2.0, squarings as i32), 0.0);
    let base = scaled.scale(factor);

    let sig = m.signature();
    let mut acc = OperatorMatrix::identity(sig, m.dim());
    let mut term = OperatorMatrix::identity(sig, m.dim());
    for k in 1..=20u32 {
        term = term.mul(&base).expect("same signature");
        term = term.scale(c64(1.0 / k as f64, 0.0));
        acc = acc.add(&term).expect("same signature");
        if term.inf_norm() < 1e-19 {
            break;
        }
    }
    for _ in 0..squarings {
        acc = acc.mul(&acc).expect("same signature");
    }
    acc
}

/// exp(s·M) in the graded composition: same scaling-and-squaring kernel with
/// `graded_mul` powers. Coincides with `matrix_exp` when M's entries are
/// Grassmann-even (in particular for numeric couplings).
pub fn matrix_exp_graded(m: &OperatorMatrix, s: Complex64) -> OperatorMatrix {
    let scaled = m.scale(s);
    let norm = scaled.scaling_norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let factor = c64(1.0 / f64::powi(2.0, squarings as i32), 0.0);
    let base = scaled.scale(factor);

    let sig = m.signature();
    let mut acc = OperatorMatrix::identity(sig, m.dim());
    let mut term = OperatorMatrix::identity(sig, m.dim());
    for k in 1..=20u32 {
        term = term.graded_mul(&base).expect("same signature");
        term = term.scale(c64(1.0 / k as f64, 0.0));
        acc = acc.add(&term).expect("same signature");
        if term.inf_norm() < 1e-19 {
            break;
        }
    }
    for _ in 0..squarings {
        acc = acc.graded_mul(&acc).expect("same signature");
    }
    acc
}

/// exp(s·M) factored as (log-scale, bounded matrix): returns (ℓ, E) with
/// exp(sM) = e^ℓ·E and E's dominant entries of order one. Used for
/// imaginary-time evolution at large τ where the raw exponential overflows.
/// The shift is the minimum real part of the body spectrum (exact for 2×2,
/// a Gershgorin lower bound otherwise).
pub fn matrix_exp_shifted(m: &OperatorMatrix, s: Complex64) -> (f64, OperatorMatrix) {
    let body = m.body();
    let mu = min_real_spectrum_bound(&body);
    let shifted = m.sub(&OperatorMatrix::identity(m.signature(), m.dim()).scale(c64(mu, 0.0)))
        .expect("same signature");
    let log_scale = (s * mu).re;
    // the imaginary part of s·mu is a phase; keep it inside the matrix
    let phase = c64(0.0, (s * mu).im).exp();
    (log_scale, matrix_exp(&shifted, s).scale(phase))
}

/// Candidate prefactors for the mixed coherent overlap ⟨ψ|π⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedOverlapFactor {
    /// (iⁿħ)ⁿ = i^{n²}ħⁿ. This is the reading under which
    /// ⟨ψ|π⟩ = (iⁿħ)ⁿ exp{(i/ħ)Σπⱼψⱼ} is consistent with the delta overlaps
    /// and the completeness and trace identities.
    PowerTower,
    /// (iħ)ⁿ: coincides with the above at n = 1, fails the identities at n = 2.
    PowerOfIHbar,
}

/// Convention-flagged prefactor of ⟨ψ|π⟩ relative to exp{(i/ħ)Σπⱼψⱼ}.
pub fn mixed_overlap_prefactor(n: usize, hbar: f64, which: MixedOverlapFactor) -> Complex64 {
    match which {
        MixedOverlapFactor::PowerTower => {
            c64(0.0, 1.0).powi((n * n) as i32) * c64(hbar, 0.0).powi(n as i32)
        }
        MixedOverlapFactor::PowerOfIHbar => c64(0.0, hbar).powi(n as i32),
    }
}

/// Minimum real part of the spectrum of a complex matrix body: exact closed
/// form for dim ≤ 2, Gershgorin lower bound for larger matrices.
pub fn min_real_spectrum_bound(body: &[Vec<Complex64>]) -> f64 {
    let d = body.len();
    if d == 1 {
        return body[0][0].re;
    }
    if d == 2 {
        let tr = body[0][0] + body[1][1];
        let det = body[0][0] * body[1][1] - body[0][1] * body[1][0];
        let disc = (tr * tr - det.scale(4.0)).sqrt();
        let l1 = (tr + disc) * 0.5;
        let l2 = (tr - disc) * 0.5;
        return l1.re.min(l2.re);
    }
    (0..d)
        .map(|i| {
            let radius: f64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| body[i][j].norm())
                .sum();
            body[i][i].re - radius
        })
        .fold(f64::INFINITY, f64::min)
}
