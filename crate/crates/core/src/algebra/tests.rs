use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sig2() -> Arc<AlgebraSignature> {
    AlgebraSignature::new(2, &[], 1.0, OperatorConvention::Canonical).unwrap()
}

pub(crate) fn random_element(
    sig: &Arc<AlgebraSignature>,
    rng: &mut ChaCha8Rng,
    parity: Option<Parity>,
) -> GrassmannElement {
    let gens = sig.num_generators();
    let mut e = GrassmannElement::zero(sig);
    for m in 0u32..(1 << gens) {
        let keep = match parity {
            Some(Parity::Even) => m.count_ones() % 2 == 0,
            Some(Parity::Odd) => m.count_ones() % 2 == 1,
            _ => true,
        };
        if keep {
            let coeff = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            e = e
                .add(&GrassmannElement::from_terms(sig, [(m, coeff)]))
                .unwrap();
        }
    }
    e
}

#[test]
fn generators_are_nilpotent() {
    let sig = AlgebraSignature::single_mode(1.0);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    assert!(psi.mul(&psi).unwrap().is_zero());
}

#[test]
fn product_canonicalizes_with_anticommutation_sign() {
    let sig = AlgebraSignature::single_mode(1.0);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));
    // π₁·ψ₁ = −ψ₁π₁
    let prod = pi.mul(&psi).unwrap();
    let expected = psi.mul(&pi).unwrap().neg();
    assert_eq!(prod.max_coeff_distance(&expected), 0.0);
}

#[test]
fn binomial_product_expands_term_by_term() {
    // (1+ψ₁)(1+π₁) expanded by the distributive law by hand:
    // 1 + ψ₁ + π₁ + ψ₁π₁.
    let sig = AlgebraSignature::single_mode(1.0);
    let one = GrassmannElement::one(&sig);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));
    let lhs = one.add(&psi).unwrap().mul(&one.add(&pi).unwrap()).unwrap();
    let rhs = one
        .add(&psi)
        .unwrap()
        .add(&pi)
        .unwrap()
        .add(&psi.mul(&pi).unwrap())
        .unwrap();
    assert!(lhs.max_coeff_distance(&rhs) == 0.0);
}

#[test]
fn anticommutation_exact_for_all_generator_pairs() {
    let sig = AlgebraSignature::new(3, &["a", "b"], 1.0, OperatorConvention::Canonical).unwrap();
    for i in 0..sig.num_generators() {
        for j in 0..sig.num_generators() {
            let gi = GrassmannElement::generator(&sig, GeneratorId(i));
            let gj = GrassmannElement::generator(&sig, GeneratorId(j));
            let anti = gi.mul(&gj).unwrap().add(&gj.mul(&gi).unwrap()).unwrap();
            assert!(anti.is_zero(), "pair ({i},{j})");
        }
    }
}

#[test]
fn associativity_on_random_triples() {
    let sig = sig2();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..500 {
        let a = random_element(&sig, &mut rng, None);
        let b = random_element(&sig, &mut rng, None);
        let cc = random_element(&sig, &mut rng, None);
        let left = a.mul(&b).unwrap().mul(&cc).unwrap();
        let right = a.mul(&b.mul(&cc).unwrap()).unwrap();
        assert!(left.max_coeff_distance(&right) <= 1e-12);
    }
}

#[test]
fn left_and_right_derivatives() {
    let sig = AlgebraSignature::single_mode(1.0);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));
    let psipi = psi.mul(&pi).unwrap();

    let dl = psipi.derivative(sig.psi(1), DerivativeSide::Left).unwrap();
    assert_eq!(dl.max_coeff_distance(&pi), 0.0);

    // ψ₁π₁ = −π₁ψ₁, stripping ψ₁ from the right leaves −π₁
    let dr = psipi.derivative(sig.psi(1), DerivativeSide::Right).unwrap();
    assert_eq!(dr.max_coeff_distance(&pi.neg()), 0.0);

    let dnone = pi.derivative(sig.psi(1), DerivativeSide::Left).unwrap();
    assert!(dnone.is_zero());
}

#[test]
fn berezin_basic_rules() {
    let sig = AlgebraSignature::single_mode(1.0);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let one = GrassmannElement::one(&sig);

    let i1 = psi.berezin_integrate(&[sig.psi(1)]).unwrap();
    assert_eq!(i1.body(), c(1.0, 0.0));
    assert_eq!(i1.num_terms(), 1);

    assert!(one.berezin_integrate(&[sig.psi(1)]).unwrap().is_zero());

    // ∫(a + bψ₁)dψ₁ = b by linearity and the two rules above
    let a = c(0.3, -0.7);
    let b = c(-1.1, 0.2);
    let f = GrassmannElement::scalar(&sig, a).add(&psi.scale(b)).unwrap();
    let int = f.berezin_integrate(&[sig.psi(1)]).unwrap();
    assert_eq!(int.body(), b);
    assert_eq!(int.num_terms(), 1);
}

#[test]
fn berezin_iterated_integrals_anticommute() {
    let sig = sig2();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let f = random_element(&sig, &mut rng, None);
        let ab = f.berezin_integrate(&[sig.psi(1), sig.psi(2)]).unwrap();
        let ba = f.berezin_integrate(&[sig.psi(2), sig.psi(1)]).unwrap();
        assert!(ab.max_coeff_distance(&ba.neg()) <= 1e-14);
    }
}

#[test]
fn berezin_rejects_duplicates() {
    let sig = AlgebraSignature::single_mode(1.0);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    assert!(psi.berezin_integrate(&[sig.psi(1), sig.psi(1)]).is_err());
}

#[test]
fn shift_examples() {
    let sig = AlgebraSignature::new(1, &["xi"], 1.0, OperatorConvention::Canonical).unwrap();
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));
    let xi = GrassmannElement::generator(&sig, sig.generator("xi").unwrap());

    let s1 = psi.shift(sig.psi(1), &xi).unwrap();
    assert_eq!(s1.max_coeff_distance(&psi.add(&xi).unwrap()), 0.0);

    // ψ₁π₁ → ψ₁π₁ + ξπ₁ after expansion and canonicalization
    let s2 = psi.mul(&pi).unwrap().shift(sig.psi(1), &xi).unwrap();
    let expected = psi
        .mul(&pi)
        .unwrap()
        .add(&xi.mul(&pi).unwrap())
        .unwrap();
    assert_eq!(s2.max_coeff_distance(&expected), 0.0);

    let zero = GrassmannElement::zero(&sig);
    let f = psi.mul(&pi).unwrap().add(&pi.scale(c(2.0, 1.0))).unwrap();
    assert_eq!(f.shift(sig.psi(1), &zero).unwrap().max_coeff_distance(&f), 0.0);
}

#[test]
fn shift_roundtrip_is_identity() {
    let sig = AlgebraSignature::new(2, &["xi"], 1.0, OperatorConvention::Canonical).unwrap();
    let xi = GrassmannElement::generator(&sig, sig.generator("xi").unwrap()).scale(c(0.9, -0.4));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let f = random_element(&sig, &mut rng, None);
        let there = f.shift(sig.psi(1), &xi).unwrap();
        let back = there.shift(sig.psi(1), &xi.neg()).unwrap();
        assert!(back.max_coeff_distance(&f) <= 1e-13);
    }
}

#[test]
fn shift_rejects_bad_delta() {
    let sig = AlgebraSignature::single_mode(1.0);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let even = GrassmannElement::one(&sig);
    assert!(psi.shift(sig.psi(1), &even).is_err());
    assert!(psi.shift(sig.psi(1), &psi).is_err());
}

#[test]
fn exp_nilpotent_examples() {
    let sig = AlgebraSignature::single_mode(1.0);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));
    let bilinear = psi.mul(&pi).unwrap();

    // e^A = 1 + A for a nilpotent bilinear
    let e = bilinear.exp_nilpotent();
    let expected = GrassmannElement::one(&sig).add(&bilinear).unwrap();
    assert_eq!(e.max_coeff_distance(&expected), 0.0);

    let e0 = GrassmannElement::zero(&sig).exp_nilpotent();
    assert_eq!(e0.max_coeff_distance(&GrassmannElement::one(&sig)), 0.0);
}

#[test]
fn exp_nilpotent_two_modes_terminates_at_order_two() {
    let sig = sig2();
    let a = c(0.8, 0.1);
    let b = c(-0.4, 0.9);
    let b1 = GrassmannElement::generator(&sig, sig.psi(1))
        .mul(&GrassmannElement::generator(&sig, sig.pi(1)))
        .unwrap();
    let b2 = GrassmannElement::generator(&sig, sig.psi(2))
        .mul(&GrassmannElement::generator(&sig, sig.pi(2)))
        .unwrap();
    let f = b1.scale(a).add(&b2.scale(b)).unwrap();
    let e = f.exp_nilpotent();
    let expected = GrassmannElement::one(&sig)
        .add(&b1.scale(a))
        .unwrap()
        .add(&b2.scale(b))
        .unwrap()
        .add(&b1.mul(&b2).unwrap().scale(a * b))
        .unwrap();
    assert!(e.max_coeff_distance(&expected) <= 1e-15);
}

#[test]
fn exp_nilpotent_inverse_for_even_soul() {
    let sig = sig2();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let f = random_element(&sig, &mut rng, Some(Parity::Even)).soul();
        let prod = f.exp_nilpotent().mul(&f.neg().exp_nilpotent()).unwrap();
        assert!(prod.max_coeff_distance(&GrassmannElement::one(&sig)) <= 1e-12);
    }
}

#[test]
fn body_parity_conjugate() {
    let sig = AlgebraSignature::single_mode(1.0);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));
    let f = GrassmannElement::scalar(&sig, c(3.0, 0.0))
        .add(&psi.mul(&pi).unwrap())
        .unwrap();
    assert_eq!(f.body(), c(3.0, 0.0));
    assert_eq!(psi.parity(), Parity::Odd);
    assert_eq!(f.parity(), Parity::Even);
    assert_eq!(f.add(&psi).unwrap().parity(), Parity::Mixed);

    // (ψ₁π₁)* = π₁*ψ₁* = (−iψ₁)(−iπ₁) = −ψ₁π₁ under π = iψ*
    let conj = psi.mul(&pi).unwrap().conjugate();
    assert_eq!(conj.max_coeff_distance(&psi.mul(&pi).unwrap().neg()), 0.0);
}

#[test]
fn conjugate_is_an_involution() {
    let sig =
        AlgebraSignature::new(2, &["alpha", "alpha*"], 1.0, OperatorConvention::Canonical).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..40 {
        let f = random_element(&sig, &mut rng, None);
        assert!(f.conjugate().conjugate().max_coeff_distance(&f) <= 1e-13);
    }
}

/// Truncated exponential series built only from `mul`, independent of
/// `exp_nilpotent`, for the Gaussian brute-force oracle.
fn exp_series(x: &GrassmannElement, order: usize) -> GrassmannElement {
    let sig = x.signature().clone();
    let mut acc = GrassmannElement::one(&sig);
    let mut pow = GrassmannElement::one(&sig);
    let mut fact = 1.0f64;
    for k in 1..=order {
        pow = pow.mul(x).unwrap();
        fact *= k as f64;
        acc = acc.add(&pow.scale(c(1.0 / fact, 0.0))).unwrap();
    }
    acc
}

/// Brute-force left-hand side of the Gaussian identity: expand
/// exp(vᵀMu + uᵀa + vᵀb) and integrate with measure du₁dv₁⋯du_kdv_k.
fn gaussian_brute_force(
    sig: &Arc<AlgebraSignature>,
    u: &[GeneratorId],
    v: &[GeneratorId],
    m: &[Vec<Complex64>],
    a: &[GrassmannElement],
    b: &[GrassmannElement],
) -> GrassmannElement {
    let k = u.len();
    let mut exponent = GrassmannElement::zero(sig);
    for i in 0..k {
        let vi = GrassmannElement::generator(sig, v[i]);
        let ui = GrassmannElement::generator(sig, u[i]);
        for j in 0..k {
            let uj = GrassmannElement::generator(sig, u[j]);
            exponent = exponent.add(&vi.mul(&uj).unwrap().scale(m[i][j])).unwrap();
        }
        exponent = exponent.add(&a[i].mul(&ui).unwrap()).unwrap();
        exponent = exponent.add(&vi.mul(&b[i]).unwrap()).unwrap();
    }
    let integrand = exp_series(&exponent, 2 * sig.num_generators());
    let mut measure = Vec::new();
    for i in 0..k {
        measure.push(u[i]);
        measure.push(v[i]);
    }
    integrand.berezin_integrate(&measure).unwrap()
}

#[test]
fn gaussian_k1_no_sources() {
    let sig = AlgebraSignature::new(1, &["u1", "v1"], 1.0, OperatorConvention::Canonical).unwrap();
    let u = [sig.generator("u1").unwrap()];
    let v = [sig.generator("v1").unwrap()];
    let m = vec![vec![c(0.7, -1.3)]];
    let zero = [GrassmannElement::zero(&sig)];

    let brute = gaussian_brute_force(&sig, &u, &v, &m, &zero, &zero);
    let closed = gaussian_integral(&m, &zero, &zero).unwrap();
    assert!(brute.max_coeff_distance(&closed) <= 1e-14);
    assert_eq!(closed.body(), m[0][0]);
}

#[test]
fn gaussian_det_only_for_zero_sources() {
    for k in 1..=3usize {
        let names: Vec<String> = (0..k)
            .flat_map(|i| [format!("u{i}"), format!("v{i}")])
            .collect();
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let sig = AlgebraSignature::new(1, &name_refs, 1.0, OperatorConvention::Canonical).unwrap();
        let u: Vec<GeneratorId> = (0..k).map(|i| sig.generator(&format!("u{i}")).unwrap()).collect();
        let v: Vec<GeneratorId> = (0..k).map(|i| sig.generator(&format!("v{i}")).unwrap()).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        let m: Vec<Vec<Complex64>> = (0..k)
            .map(|_| {
                (0..k)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let zero: Vec<GrassmannElement> = (0..k).map(|_| GrassmannElement::zero(&sig)).collect();

        let brute = gaussian_brute_force(&sig, &u, &v, &m, &zero, &zero);
        let closed = gaussian_integral(&m, &zero, &zero).unwrap();
        assert!(
            brute.max_coeff_distance(&closed) <= 1e-12,
            "k = {k}: brute {brute} vs closed {closed}"
        );
    }
}

#[test]
fn gaussian_matches_brute_force_with_random_sources() {
    // k ≤ 3, 100 random (M, a, b): closed form vs direct Berezin expansion.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let k = 1 + (trial % 3);
        let mut names: Vec<String> = (0..k)
            .flat_map(|i| [format!("u{i}"), format!("v{i}")])
            .collect();
        for i in 0..k {
            names.push(format!("s{i}"));
            names.push(format!("t{i}"));
        }
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let sig = AlgebraSignature::new(1, &name_refs, 1.0, OperatorConvention::Canonical).unwrap();
        let u: Vec<GeneratorId> = (0..k).map(|i| sig.generator(&format!("u{i}")).unwrap()).collect();
        let v: Vec<GeneratorId> = (0..k).map(|i| sig.generator(&format!("v{i}")).unwrap()).collect();

        let m: Vec<Vec<Complex64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let diag = if i == j { 2.0 } else { 0.0 };
                        c(rng.gen_range(-1.0..1.0) + diag, rng.gen_range(-1.0..1.0))
                    })
                    .collect()
            })
            .collect();
        // odd sources built on generators disjoint from the integration set
        let a: Vec<GrassmannElement> = (0..k)
            .map(|i| {
                GrassmannElement::generator(&sig, sig.generator(&format!("s{i}")).unwrap())
                    .scale(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let b: Vec<GrassmannElement> = (0..k)
            .map(|i| {
                GrassmannElement::generator(&sig, sig.generator(&format!("t{i}")).unwrap())
                    .scale(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            })
            .collect();

        let brute = gaussian_brute_force(&sig, &u, &v, &m, &a, &b);
        let closed = gaussian_integral(&m, &a, &b).unwrap();
        assert!(
            brute.max_coeff_distance(&closed) <= 1e-10,
            "trial {trial} (k = {k})"
        );
    }
}

#[test]
fn gaussian_transform_kernel_instance() {
    // The star-exponential transform's internal Gaussian: M = −(3i/ħ)·I,
    // a = −(i/ħ)(2η' + Π), b = −(i/ħ)(Ψ + 2χ'), giving
    // (−3i/ħ)·exp{(i/3ħ)(2η'+Π)(Ψ+2χ')} at one mode.
    let hbar = 1.3;
    let sig = AlgebraSignature::new(
        1,
        &["eta'", "chi'", "Pi", "Psi", "u0", "v0"],
        hbar,
        OperatorConvention::Canonical,
    )
    .unwrap();
    let eta = GrassmannElement::generator(&sig, sig.generator("eta'").unwrap());
    let chi = GrassmannElement::generator(&sig, sig.generator("chi'").unwrap());
    let big_pi = GrassmannElement::generator(&sig, sig.generator("Pi").unwrap());
    let big_psi = GrassmannElement::generator(&sig, sig.generator("Psi").unwrap());

    let m = vec![vec![c(0.0, -3.0 / hbar)]];
    let a = [eta.scale(c(2.0, 0.0)).add(&big_pi).unwrap().scale(c(0.0, -1.0 / hbar))];
    let b = [big_psi.add(&chi.scale(c(2.0, 0.0))).unwrap().scale(c(0.0, -1.0 / hbar))];

    let closed = gaussian_integral(&m, &a, &b).unwrap();

    // hand form: det(M)·exp{(i/3ħ)(2η'+Π)(Ψ+2χ')}
    let quad = eta
        .scale(c(2.0, 0.0))
        .add(&big_pi)
        .unwrap()
        .mul(&big_psi.add(&chi.scale(c(2.0, 0.0))).unwrap())
        .unwrap()
        .scale(c(0.0, 1.0 / (3.0 * hbar)));
    let hand = quad.exp_nilpotent().scale(c(0.0, -3.0 / hbar));
    assert!(closed.max_coeff_distance(&hand) <= 1e-14);

    // and against the brute-force Berezin oracle
    let u = [sig.generator("u0").unwrap()];
    let v = [sig.generator("v0").unwrap()];
    let brute = gaussian_brute_force(&sig, &u, &v, &m, &a, &b);
    assert!(brute.max_coeff_distance(&closed) <= 1e-12);
}

#[test]
fn gaussian_rejects_singular() {
    let sig = AlgebraSignature::single_mode(1.0);
    let zero = [GrassmannElement::zero(&sig)];
    let m = vec![vec![c(0.0, 0.0)]];
    assert!(matches!(
        gaussian_integral(&m, &zero, &zero),
        Err(crate::error::AlgebraError::SingularMatrix)
    ));
}

#[test]
fn rename_generators_tracks_permutation_sign() {
    let sig = AlgebraSignature::new(1, &["a", "b"], 1.0, OperatorConvention::Canonical).unwrap();
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));
    let a = sig.generator("a").unwrap();
    let b = sig.generator("b").unwrap();
    // ψπ with ψ→b, π→a: bᵃ... b·a = −a·b in canonical order
    let f = psi.mul(&pi).unwrap();
    let renamed = f
        .rename_generators(&[(sig.psi(1), b), (sig.pi(1), a)])
        .unwrap();
    let expected = GrassmannElement::generator(&sig, a)
        .mul(&GrassmannElement::generator(&sig, b))
        .unwrap()
        .neg();
    assert_eq!(renamed.max_coeff_distance(&expected), 0.0);
}
