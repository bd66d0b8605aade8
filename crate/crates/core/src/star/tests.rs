use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::algebra::{AlgebraSignature, OperatorConvention, Parity};
use crate::weyl::WeylMap;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn canonical(n: usize, hbar: f64) -> Arc<AlgebraSignature> {
    AlgebraSignature::new(n, &[], hbar, OperatorConvention::Canonical).unwrap()
}

pub(crate) fn random_homogeneous(
    sig: &Arc<AlgebraSignature>,
    rng: &mut ChaCha8Rng,
    parity: Parity,
) -> GrassmannElement {
    let n = sig.modes();
    let mut e = GrassmannElement::zero(sig);
    for m in 0u32..(1 << (2 * n)) {
        let keep = match parity {
            Parity::Even => m.count_ones() % 2 == 0,
            Parity::Odd => m.count_ones() % 2 == 1,
            Parity::Mixed => true,
        };
        if keep {
            e = e
                .add(&GrassmannElement::from_terms(
                    sig,
                    [(m, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))],
                ))
                .unwrap();
        }
    }
    e
}

#[test]
fn star_with_unit_is_identity() {
    let sig = canonical(2, 1.3);
    let one = GrassmannElement::one(&sig);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let f = random_homogeneous(&sig, &mut rng, Parity::Mixed);
        assert!(star_differential(&f, &one).unwrap().max_coeff_distance(&f) <= 1e-14);
        assert!(star_differential(&one, &f).unwrap().max_coeff_distance(&f) <= 1e-14);
    }
    assert!(star_integral(&one, &one)
        .unwrap()
        .max_coeff_distance(&one)
        <= 1e-14);
}

#[test]
fn generator_star_products() {
    // ψ⋆π = ψπ + iħ/2 and π⋆ψ = −ψπ + iħ/2, hence {ψ,π}_⋆ = iħ
    let hbar = 0.9;
    let sig = canonical(1, hbar);
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));
    let psipi = psi.mul(&pi).unwrap();
    let half = GrassmannElement::scalar(&sig, c(0.0, hbar / 2.0));

    let sp = star_differential(&psi, &pi).unwrap();
    assert!(sp.max_coeff_distance(&psipi.add(&half).unwrap()) <= 1e-15);

    let ps = star_differential(&pi, &psi).unwrap();
    assert!(ps.max_coeff_distance(&psipi.neg().add(&half).unwrap()) <= 1e-15);

    let anti = star_anticommutator(&psi, &pi).unwrap();
    let i_hbar = GrassmannElement::scalar(&sig, c(0.0, hbar));
    assert!(anti.max_coeff_distance(&i_hbar) <= 1e-15);
}

#[test]
fn star_square_of_bilinear_matches_matrix_oracle() {
    // (ψπ)^{⋆2} and (πψ)^{⋆2} both equal −ħ²/4: square the quantized matrix,
    // dequantize, compare
    let hbar = 1.2;
    let sig = canonical(1, hbar);
    let map = WeylMap::new(&sig).unwrap();
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));

    for f in [psi.mul(&pi).unwrap(), pi.mul(&psi).unwrap()] {
        let direct = star_power(&f, 2).unwrap();
        let m = map.quantize(&f).unwrap();
        let oracle = map.dequantize(&m.mul(&m).unwrap()).unwrap();
        assert!(direct.max_coeff_distance(&oracle) <= 1e-14);
        let expected = GrassmannElement::scalar(&sig, c(-hbar * hbar / 4.0, 0.0));
        assert!(direct.max_coeff_distance(&expected) <= 1e-14);
    }
}

#[test]
fn star_power_basics() {
    let sig = canonical(1, 1.0);
    let f = GrassmannElement::generator(&sig, sig.psi(1))
        .mul(&GrassmannElement::generator(&sig, sig.pi(1)))
        .unwrap()
        .scale(c(0.0, 1.0));
    assert!(star_power(&f, 0)
        .unwrap()
        .max_coeff_distance(&GrassmannElement::one(&sig))
        <= 1e-15);
    assert!(star_power(&f, 1).unwrap().max_coeff_distance(&f) <= 1e-15);
}

#[test]
fn homomorphism_into_operator_products() {
    // Q_W(f⋆g) = Q_W(f)·Q_W(g) over random parity-homogeneous pairs
    for n in 1..=2usize {
        let sig = canonical(n, 1.1);
        let map = WeylMap::new(&sig).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(500 + n as u64);
        for trial in 0..20 {
            let pf = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
            let pg = if trial % 3 == 0 { Parity::Odd } else { Parity::Even };
            let f = random_homogeneous(&sig, &mut rng, pf);
            let g = random_homogeneous(&sig, &mut rng, pg);
            let lhs = map.quantize(&star_differential(&f, &g).unwrap()).unwrap();
            let rhs = map.quantize(&f).unwrap().mul(&map.quantize(&g).unwrap()).unwrap();
            assert!(
                lhs.max_coeff_distance(&rhs) <= 1e-10,
                "n={n} trial={trial}"
            );
        }
    }
}

#[test]
fn homomorphism_in_matrix_basis_convention() {
    let sig = AlgebraSignature::new(1, &[], 1.0, OperatorConvention::MatrixBasis).unwrap();
    let map = WeylMap::new(&sig).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    for _ in 0..15 {
        let f = random_homogeneous(&sig, &mut rng, Parity::Even);
        let g = random_homogeneous(&sig, &mut rng, Parity::Mixed);
        let lhs = map.quantize(&star_differential(&f, &g).unwrap()).unwrap();
        let rhs = map.quantize(&f).unwrap().mul(&map.quantize(&g).unwrap()).unwrap();
        assert!(lhs.max_coeff_distance(&rhs) <= 1e-12);
    }
}

#[test]
fn homomorphism_with_couplings_uses_graded_composition() {
    // symbols carrying odd parameters star-multiply onto the graded product
    let sig =
        AlgebraSignature::new(1, &["al", "al*"], 1.0, OperatorConvention::MatrixBasis).unwrap();
    let map = WeylMap::new(&sig).unwrap();
    let psi = GrassmannElement::generator(&sig, sig.psi(1));
    let pi = GrassmannElement::generator(&sig, sig.pi(1));
    let al = GrassmannElement::generator(&sig, sig.generator("al").unwrap());
    let alstar = GrassmannElement::generator(&sig, sig.generator("al*").unwrap());

    let f = pi.mul(&psi).unwrap().add(&al.mul(&psi).unwrap()).unwrap();
    let g = alstar.mul(&pi).unwrap().add(&GrassmannElement::one(&sig)).unwrap();

    let lhs = map.quantize(&star_differential(&f, &g).unwrap()).unwrap();
    let rhs = map
        .quantize(&f)
        .unwrap()
        .graded_mul(&map.quantize(&g).unwrap())
        .unwrap();
    assert!(lhs.max_coeff_distance(&rhs) <= 1e-13);
}

#[test]
fn differential_and_integral_representations_agree() {
    for n in 1..=2usize {
        let sig = canonical(n, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(700 + n as u64);
        for trial in 0..15 {
            let pf = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
            let f = random_homogeneous(&sig, &mut rng, pf);
            let g = random_homogeneous(&sig, &mut rng, Parity::Even);
            let a = star_differential(&f, &g).unwrap();
            let b = star_integral(&f, &g).unwrap();
            assert!(a.max_coeff_distance(&b) <= 1e-12, "n={n} trial={trial}");
        }
    }
}

#[test]
fn star_is_associative_on_symbols() {
    let sig = canonical(2, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    for _ in 0..15 {
        let f = random_homogeneous(&sig, &mut rng, Parity::Mixed);
        let g = random_homogeneous(&sig, &mut rng, Parity::Mixed);
        let h = random_homogeneous(&sig, &mut rng, Parity::Mixed);
        let left = star_differential(&star_differential(&f, &g).unwrap(), &h).unwrap();
        let right = star_differential(&f, &star_differential(&g, &h).unwrap()).unwrap();
        assert!(left.max_coeff_distance(&right) <= 1e-11);
    }
}

#[test]
fn classical_limit_recovers_the_pointwise_product() {
    // the deformation corrections scale linearly with ħ at leading order
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut deviations = Vec::new();
    for hbar in [1e-3, 1e-6] {
        let sig = canonical(1, hbar);
        let mut worst = 0.0f64;
        let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
        for _ in 0..10 {
            let f = random_homogeneous(&sig, &mut local, Parity::Even);
            let g = random_homogeneous(&sig, &mut local, Parity::Even);
            let star = star_differential(&f, &g).unwrap();
            worst = worst.max(star.max_coeff_distance(&f.mul(&g).unwrap()));
        }
        deviations.push(worst);
    }
    assert!(deviations[0] <= 1e-2);
    assert!(deviations[1] <= 1e-5);
}

#[test]
fn signature_mismatch_is_an_error() {
    let a = canonical(1, 1.0);
    let b = canonical(1, 2.0);
    let f = GrassmannElement::one(&a);
    let g = GrassmannElement::one(&b);
    assert!(star_differential(&f, &g).is_err());
    assert!(star_integral(&f, &g).is_err());
}
