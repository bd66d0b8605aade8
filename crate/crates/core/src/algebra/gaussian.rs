//! Grassmann Gaussian integrals.
//!
//! For an invertible complex k×k matrix M and Grassmann-odd source vectors
//! a, b independent of the integration generators,
//!
//! ```text
//! ∫ exp(vᵀM u + aᵀu + vᵀb) Du Dv = det(M) · exp(−aᵀM⁻¹b),
//! ```
//!
//! with the interleaved measure Du Dv = du₁dv₁ ⋯ du_k dv_k (u₁ integrated
//! first) and products ordered as written: the a-sources multiply u from the
//! left, the b-sources multiply v from the right, and the quadratic form on
//! the right-hand side is Σᵢⱼ aᵢ(M⁻¹)ᵢⱼbⱼ in that factor order. Since the
//! sources anticommute, any other pairing flips signs term by term.
//!
//! The closed form never references the integration generators, so this
//! function takes only M, a and b; the brute-force Berezin expansion of the
//! left-hand side lives in the test suite as the independent oracle.

use num_complex::Complex64;

use super::element::GrassmannElement;
use crate::error::AlgebraError;

/// det(M)·exp(−aᵀM⁻¹b) for complex square `m` and equal-length odd vectors.
pub fn gaussian_integral(
    m: &[Vec<Complex64>],
    a: &[GrassmannElement],
    b: &[GrassmannElement],
) -> Result<GrassmannElement, AlgebraError> {
    let k = m.len();
    if k == 0 || m.iter().any(|row| row.len() != k) {
        return Err(AlgebraError::InvalidSignature(
            "gaussian matrix must be square and non-empty".into(),
        ));
    }
    if a.len() != k || b.len() != k {
        return Err(AlgebraError::InvalidSignature(
            "source vectors must match the matrix dimension".into(),
        ));
    }
    let sig = a
        .first()
        .or_else(|| b.first())
        .map(|e| e.signature().clone())
        .ok_or_else(|| AlgebraError::InvalidSignature("empty sources".into()))?;

    let (det, inv) = det_and_inverse(m)?;

    // −aᵀ M⁻¹ b = −Σ_ij a_i (M⁻¹)_ij b_j
    let mut quad = GrassmannElement::zero(&sig);
    for i in 0..k {
        for j in 0..k {
            let term = a[i].mul(&b[j])?.scale(-inv[i][j]);
            quad = quad.add(&term)?;
        }
    }
    Ok(quad.exp_nilpotent().scale(det))
}

/// Determinant and inverse by Gaussian elimination with partial pivoting.
pub(crate) fn det_and_inverse(
    m: &[Vec<Complex64>],
) -> Result<(Complex64, Vec<Vec<Complex64>>), AlgebraError> {
    let k = m.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut inv: Vec<Vec<Complex64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::default()
                    }
                })
                .collect()
        })
        .collect();
    let mut det = Complex64::new(1.0, 0.0);
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|c| c.norm()))
        .fold(0.0f64, f64::max)
        .max(1.0);

    for col in 0..k {
        let (pivot_row, pivot_mag) = (col..k)
            .map(|r| (r, a[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty range");
        if pivot_mag <= 1e-300 * scale || pivot_mag == 0.0 {
            return Err(AlgebraError::SingularMatrix);
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            inv.swap(pivot_row, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for j in 0..k {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let factor = a[r][col];
            if factor.norm() == 0.0 {
                continue;
            }
            for j in 0..k {
                let ac = a[col][j];
                let ic = inv[col][j];
                a[r][j] -= factor * ac;
                inv[r][j] -= factor * ic;
            }
        }
    }
    Ok((det, inv))
}
