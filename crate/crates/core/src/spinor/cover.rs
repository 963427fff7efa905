//! The null-quadric map σ and the double cover SL(2,ℂ) → ℂ*×SO(3,ℂ).

use crate::numkit::CMatrix;
use crate::{Error, Result, C64, I};

/// σ(z₁, z₂) = (z₁² − z₂², i(z₁² + z₂²), 2z₁z₂), a null vector.
pub fn sigma_map(z1: C64, z2: C64) -> [C64; 3] {
    [z1 * z1 - z2 * z2, I * (z1 * z1 + z2 * z2), 2.0 * z1 * z2]
}

/// T(A) = λR with λ = det A and R ∈ SO(3, ℂ).
#[derive(Clone, Debug)]
pub struct SpinCover {
    pub lambda: C64,
    pub r: CMatrix,
    /// T(A) itself.
    pub t: CMatrix,
}

/// The linear map T(A) with σ(A·z) = T(A)·σ(z). σ is M·(z₁², z₂², z₁z₂) and
/// A acts on the quadratic monomials by S(A), so T(A) = M·S(A)·M⁻¹.
pub fn spin_cover(a: [[C64; 2]; 2]) -> Result<SpinCover> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.norm() < 1e-14 * (a[0][0].norm() + a[0][1].norm() + a[1][0].norm() + a[1][1].norm()).powi(2).max(1e-300) {
        return Err(Error::InvalidInput("spin_cover needs an invertible matrix".into()));
    }
    let (p, q, r, s) = (a[0][0], a[0][1], a[1][0], a[1][1]);
    let two = C64::new(2.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    // (pz₁+qz₂)², (rz₁+sz₂)², (pz₁+qz₂)(rz₁+sz₂) in the monomials z₁², z₂², z₁z₂.
    let sa = CMatrix::from_rows(&[
        vec![p * p, q * q, two * p * q],
        vec![r * r, s * s, two * r * s],
        vec![p * r, q * s, p * s + q * r],
    ]);
    let m = CMatrix::from_rows(&[
        vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0), zero],
        vec![I, I, zero],
        vec![zero, zero, two],
    ]);
    let m_inv = CMatrix::from_rows(&[
        vec![C64::new(0.5, 0.0), -0.5 * I, zero],
        vec![C64::new(-0.5, 0.0), -0.5 * I, zero],
        vec![zero, zero, C64::new(0.5, 0.0)],
    ]);
    let t = m.mul(&sa).mul(&m_inv);
    let r = CMatrix::from_fn(3, 3, |i, j| t[(i, j)] / det);
    Ok(SpinCover { lambda: det, r, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_map(c64(1.0, 0.0), c64(0.0, 0.0)), [c64(1.0, 0.0), I, c64(0.0, 0.0)]);
        assert_eq!(sigma_map(c64(0.0, 0.0), c64(1.0, 0.0)), [c64(-1.0, 0.0), I, c64(0.0, 0.0)]);
    }

    #[test]
    fn identity_and_scalar() {
        let one = c64(1.0, 0.0);
        let z = c64(0.0, 0.0);
        let c = spin_cover([[one, z], [z, one]]).unwrap();
        assert!((c.lambda - one).norm() < 1e-15);
        assert!((c.r.max_abs() - 1.0).abs() < 1e-15);
        let l = c64(0.3, 1.2);
        let c = spin_cover([[l, z], [z, l]]).unwrap();
        assert!((c.lambda - l * l).norm() < 1e-14);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { one } else { z };
                assert!((c.r[(i, j)] - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_rejected() {
        let one = c64(1.0, 0.0);
        assert!(spin_cover([[one, one], [one, one]]).is_err());
    }
}
