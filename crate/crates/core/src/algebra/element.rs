//! Sparse canonical-form elements of the complex Grassmann algebra and the
//! Berezin calculus on them.
//!
//! Monomials are encoded as bitmasks over the signature's total generator
//! ordering; a set bit k means generator k is present. Canonical form lists
//! generators in strictly increasing order, so every product reduces to a
//! bitmask pair: disjointness check, crossing-count sign, OR-merge.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::signature::{AlgebraSignature, GeneratorId, Parity};
use crate::error::AlgebraError;

/// Monomial bitmask in a signature's generator ordering.
pub type Monomial = u32;

/// Element of the exterior algebra: finite map monomial → complex coefficient.
#[derive(Clone)]
pub struct GrassmannElement {
    sig: Arc<AlgebraSignature>,
    terms: BTreeMap<Monomial, Complex64>,
}

/// Sign of merging canonical monomial `a` with `b` (a before b): parity of
/// the number of generator crossings. Caller guarantees disjointness.
fn merge_sign(a: Monomial, b: Monomial) -> f64 {
    let mut crossings = 0u32;
    let mut bits = b;
    while bits != 0 {
        let j = bits.trailing_zeros();
        // generators of `a` strictly above position j must cross b's generator j
        crossings += (a >> (j + 1)).count_ones();
        bits &= bits - 1;
    }
    if crossings % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl GrassmannElement {
    pub fn zero(sig: &Arc<AlgebraSignature>) -> Self {
        Self {
            sig: sig.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(sig: &Arc<AlgebraSignature>, c: Complex64) -> Self {
        let mut e = Self::zero(sig);
        if c.norm() > sig.prune_eps() {
            e.terms.insert(0, c);
        }
        e
    }

    pub fn one(sig: &Arc<AlgebraSignature>) -> Self {
        Self::scalar(sig, Complex64::new(1.0, 0.0))
    }

    pub fn generator(sig: &Arc<AlgebraSignature>, g: GeneratorId) -> Self {
        assert!(sig.contains(g), "generator outside signature");
        let mut e = Self::zero(sig);
        e.terms.insert(1 << g.0, Complex64::new(1.0, 0.0));
        e
    }

    /// Build from explicit (monomial, coefficient) pairs; monomials must
    /// already be canonical bitmasks.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Complex64)>>(
        sig: &Arc<AlgebraSignature>,
        it: I,
    ) -> Self {
        let mut e = Self::zero(sig);
        for (m, c) in it {
            e.add_term(m, c);
        }
        e
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Complex64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: Monomial) -> Complex64 {
        self.terms.get(&m).copied().unwrap_or_default()
    }

    /// Coefficient of the empty monomial.
    pub fn body(&self) -> Complex64 {
        self.coefficient(0)
    }

    /// Nilpotent remainder after removing the body.
    pub fn soul(&self) -> Self {
        let mut e = self.clone();
        e.terms.remove(&0);
        e
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for &m in self.terms.keys() {
            if m.count_ones() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (true, true) => Parity::Mixed,
            (false, true) => Parity::Odd,
            _ => Parity::Even,
        }
    }

    /// Even/odd split: (even part, odd part).
    pub fn parity_split(&self) -> (Self, Self) {
        let mut even = Self::zero(&self.sig);
        let mut odd = Self::zero(&self.sig);
        for (&m, &c) in &self.terms {
            if m.count_ones() % 2 == 0 {
                even.terms.insert(m, c);
            } else {
                odd.terms.insert(m, c);
            }
        }
        (even, odd)
    }

    /// True when no monomial involves `g`.
    pub fn independent_of(&self, g: GeneratorId) -> bool {
        self.terms.keys().all(|&m| m & (1 << g.0) == 0)
    }

    /// Bitmask union of all generators appearing in the element.
    pub fn support(&self) -> Monomial {
        self.terms.keys().fold(0, |acc, &m| acc | m)
    }

    fn add_term(&mut self, m: Monomial, c: Complex64) {
        let entry = self.terms.entry(m).or_insert_with(Complex64::default);
        *entry += c;
        if entry.norm() <= self.sig.prune_eps() {
            self.terms.remove(&m);
        }
    }

    fn check_sig(&self, other: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.sig, &other.sig) || self.sig.compatible(&other.sig) {
            Ok(())
        } else {
            Err(AlgebraError::SignatureMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_sig(other)?;
        let mut e = self.clone();
        for (&m, &c) in &other.terms {
            e.add_term(m, c);
        }
        Ok(e)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_sig(other)?;
        let mut e = self.clone();
        for (&m, &c) in &other.terms {
            e.add_term(m, -c);
        }
        Ok(e)
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut e = Self::zero(&self.sig);
        if c.norm() == 0.0 {
            return e;
        }
        for (&m, &k) in &self.terms {
            e.add_term(m, k * c);
        }
        e
    }

    /// Canonical-form product. Associative; generators anticommute.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_sig(other)?;
        let mut e = Self::zero(&self.sig);
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                if ma & mb != 0 {
                    continue; // repeated generator, nilpotent
                }
                let s = merge_sign(ma, mb);
                e.add_term(ma | mb, ca * cb * s);
            }
        }
        Ok(e)
    }

    /// Left or right derivative with respect to one generator.
    ///
    /// Left anticommutes `g` to the front of each monomial before stripping;
    /// right anticommutes it to the back.
    pub fn derivative(&self, g: GeneratorId, side: DerivativeSide) -> Result<Self, AlgebraError> {
        if !self.sig.contains(g) {
            return Err(AlgebraError::UnknownGenerator(format!("id {}", g.0)));
        }
        let bit = 1u32 << g.0;
        let mut e = Self::zero(&self.sig);
        for (&m, &c) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let crossings = match side {
                DerivativeSide::Left => (m & (bit - 1)).count_ones(),
                DerivativeSide::Right => (m >> (g.0 + 1)).count_ones(),
            };
            let s = if crossings % 2 == 0 { 1.0 } else { -1.0 };
            e.add_term(m & !bit, c * s);
        }
        Ok(e)
    }

    /// Iterated Berezin integral with the convention ∫g dg = 1, measure acting
    /// from the right. `gens` is the integration sequence: `gens[0]` first.
    pub fn berezin_integrate(&self, gens: &[GeneratorId]) -> Result<Self, AlgebraError> {
        let mut seen = 0u32;
        for g in gens {
            if !self.sig.contains(*g) {
                return Err(AlgebraError::UnknownGenerator(format!("id {}", g.0)));
            }
            if seen & (1 << g.0) != 0 {
                return Err(AlgebraError::DuplicateGenerator(
                    self.sig.name(*g).to_string(),
                ));
            }
            seen |= 1 << g.0;
        }
        let mut e = self.clone();
        for g in gens {
            e = e.derivative(*g, DerivativeSide::Right)?;
        }
        Ok(e)
    }

    /// Substitute `g → g + delta`. `delta` must be odd and independent of `g`.
    pub fn shift(&self, g: GeneratorId, delta: &Self) -> Result<Self, AlgebraError> {
        self.check_sig(delta)?;
        if !delta.is_zero() && delta.parity() != Parity::Odd {
            return Err(AlgebraError::NotOdd);
        }
        if !delta.independent_of(g) {
            return Err(AlgebraError::DependsOnGenerator(
                self.sig.name(g).to_string(),
            ));
        }
        // f = f_indep + g·(∂ᴸ_g f), so the shift adds delta·(∂ᴸ_g f).
        let h = self.derivative(g, DerivativeSide::Left)?;
        self.add(&delta.mul(&h)?)
    }

    /// Substitute `g → replacement` (need not contain `g`; must be odd).
    pub fn substitute(&self, g: GeneratorId, replacement: &Self) -> Result<Self, AlgebraError> {
        self.check_sig(replacement)?;
        if !replacement.is_zero() && replacement.parity() != Parity::Odd {
            return Err(AlgebraError::NotOdd);
        }
        let h = self.derivative(g, DerivativeSide::Left)?;
        let mut indep = self.clone();
        let bit = 1u32 << g.0;
        indep.terms.retain(|&m, _| m & bit == 0);
        indep.add(&replacement.mul(&h)?)
    }

    /// Rename generators through a bijective map, re-canonicalizing with the
    /// permutation sign. Entries absent from `map` keep their generator.
    pub fn rename_generators(
        &self,
        map: &[(GeneratorId, GeneratorId)],
    ) -> Result<Self, AlgebraError> {
        let mut table: Vec<usize> = (0..self.sig.num_generators()).collect();
        for (from, to) in map {
            if !self.sig.contains(*from) || !self.sig.contains(*to) {
                return Err(AlgebraError::UnknownGenerator("rename target".into()));
            }
            table[from.0] = to.0;
        }
        let mut e = Self::zero(&self.sig);
        for (&m, &c) in &self.terms {
            // list original positions ascending, map them, then sort counting swaps
            let mut mapped: Vec<usize> = Vec::with_capacity(m.count_ones() as usize);
            let mut bits = m;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                mapped.push(table[j]);
                bits &= bits - 1;
            }
            let mut sign = 1.0;
            // insertion sort, tracking transposition parity
            for i in 1..mapped.len() {
                let mut k = i;
                while k > 0 && mapped[k - 1] > mapped[k] {
                    mapped.swap(k - 1, k);
                    sign = -sign;
                    k -= 1;
                }
            }
            let mut new_m = 0u32;
            let mut dup = false;
            for &p in &mapped {
                if new_m & (1 << p) != 0 {
                    dup = true;
                    break;
                }
                new_m |= 1 << p;
            }
            if dup {
                return Err(AlgebraError::DuplicateGenerator(
                    "rename collision".to_string(),
                ));
            }
            e.add_term(new_m, c * sign);
        }
        Ok(e)
    }

    /// Reinterpret in an extended signature (prefix check enforced).
    pub fn lift(&self, ext: &Arc<AlgebraSignature>) -> Result<Self, AlgebraError> {
        if !self.sig.is_prefix_of(ext) {
            return Err(AlgebraError::SignatureMismatch);
        }
        Ok(Self {
            sig: ext.clone(),
            terms: self.terms.clone(),
        })
    }

    /// Reinterpret in a base signature of which `self.sig` is an extension;
    /// fails if any monomial touches a generator outside the base.
    pub fn restrict(&self, base: &Arc<AlgebraSignature>) -> Result<Self, AlgebraError> {
        if !base.is_prefix_of(&self.sig) {
            return Err(AlgebraError::SignatureMismatch);
        }
        let allowed: u32 = if base.num_generators() == 32 {
            u32::MAX
        } else {
            (1u32 << base.num_generators()) - 1
        };
        if self.terms.keys().any(|&m| m & !allowed != 0) {
            return Err(AlgebraError::DependsOnGenerator(
                "element supported outside base signature".into(),
            ));
        }
        Ok(Self {
            sig: base.clone(),
            terms: self.terms.clone(),
        })
    }

    /// exp(f) with the soul series truncated when a power vanishes. The body
    /// exponentiates as a complex scalar.
    pub fn exp_nilpotent(&self) -> Self {
        let body = self.body();
        let soul = self.soul();
        let mut acc = Self::one(&self.sig);
        let mut power = Self::one(&self.sig);
        let mut k = 1.0;
        loop {
            power = match power.mul(&soul) {
                Ok(p) => p,
                Err(_) => unreachable!("same signature"),
            };
            if power.is_zero() {
                break;
            }
            power = power.scale(Complex64::new(1.0 / k, 0.0));
            acc = acc.add(&power).expect("same signature");
            k += 1.0;
            if k as usize > super::signature::MAX_GENERATORS + 1 {
                break; // soul powers must have vanished by now
            }
        }
        acc.scale(body.exp())
    }

    /// Involution: conjugate coefficients, reverse factor order, map each
    /// generator through the signature's conjugation table.
    pub fn conjugate(&self) -> Self {
        let mut e = Self::zero(&self.sig);
        for (&m, &c) in &self.terms {
            let mut factor = Self::scalar(&self.sig, c.conj());
            // reversed order: highest generator first
            let mut bits = m;
            let mut positions: Vec<usize> = Vec::with_capacity(m.count_ones() as usize);
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                positions.push(j);
                bits &= bits - 1;
            }
            for &j in positions.iter().rev() {
                let (tg, tf) = self.sig.conjugate_generator(GeneratorId(j));
                let gen = Self::generator(&self.sig, tg).scale(tf);
                factor = factor.mul(&gen).expect("same signature");
            }
            e = e.add(&factor).expect("same signature");
        }
        e
    }

    /// Largest coefficient magnitude.
    pub fn inf_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude of (self − other).
    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (&m, &c) in &self.terms {
            worst = worst.max((c - other.coefficient(m)).norm());
        }
        for (&m, &c) in &other.terms {
            if !self.terms.contains_key(&m) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// Human-readable monomial name, e.g. `psi1*pi1`.
    pub fn monomial_name(&self, m: Monomial) -> String {
        if m == 0 {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        let mut bits = m;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            parts.push(self.sig.name(GeneratorId(j)).to_string());
            bits &= bits - 1;
        }
        parts.join("*")
    }
}

/// Which side a derivative acts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSide {
    Left,
    Right,
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&m, &c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)", c.re, c.im)?;
            if m != 0 {
                write!(f, "·{}", self.monomial_name(m))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
