//! Projective planes with three ends: the direction-cosine surface Γ, its
//! order-24 symmetry group, and the Möbius-strip limit spinors.

use crate::numkit::{poly_roots, ComplexPolynomial};
use crate::spinor::{Domain, EndDivisor, Eval, SpinorSection};
use crate::{Error, Result, C64, I};
use serde::Serialize;
use std::sync::Arc;

/// (c₁²+3)(c₂²+3)(c₃²+3) − 32(c₁c₂c₃ + 1).
pub fn rp2_variety(c: [f64; 3]) -> f64 {
    (c[0] * c[0] + 3.0) * (c[1] * c[1] + 3.0) * (c[2] * c[2] + 3.0) - 32.0 * (c[0] * c[1] * c[2] + 1.0)
}

/// c ↦ (s₀c_{π(0)}, s₁c_{π(1)}, s₂c_{π(2)}) with an even number of sign flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SignedPermutation {
    pub perm: [usize; 3],
    pub sign: [i8; 3],
}

impl SignedPermutation {
    pub fn apply(&self, c: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.sign[i] as f64 * c[self.perm[i]])
    }

    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        // (self ∘ other)(c)_i = s_i · (other c)_{π(i)} = s_i s'_{π(i)} c_{π'(π(i))}
        SignedPermutation {
            perm: std::array::from_fn(|i| other.perm[self.perm[i]]),
            sign: std::array::from_fn(|i| self.sign[i] * other.sign[self.perm[i]]),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.perm == [0, 1, 2] && self.sign == [1, 1, 1]
    }

    pub fn order(&self) -> usize {
        let mut g = *self;
        for k in 1..=12 {
            if g.is_identity() {
                return k;
            }
            g = g.compose(self);
        }
        unreachable!("element of a group of order 24")
    }
}

/// The 24 maps generated by coordinate permutations and double sign flips.
pub fn rp2_group() -> Vec<SignedPermutation> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let signs = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];
    let mut out = Vec::with_capacity(24);
    for p in perms {
        for s in signs {
            out.push(SignedPermutation { perm: p, sign: s });
        }
    }
    out
}

/// Isomorphism type of a stabilizer subgroup of S₄.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SymmetryLabel {
    Trivial,
    Z2,
    Z3,
    Z4,
    Z2xZ2,
    /// S₃ ≅ D₃.
    S3,
    D4,
    A4,
    /// The whole group; only the omitted cube corners.
    S4Point,
}

impl SymmetryLabel {
    pub fn name(&self) -> &'static str {
        match self {
            SymmetryLabel::Trivial => "trivial",
            SymmetryLabel::Z2 => "Z2",
            SymmetryLabel::Z3 => "Z3",
            SymmetryLabel::Z4 => "Z4",
            SymmetryLabel::Z2xZ2 => "Z2xZ2",
            SymmetryLabel::S3 => "S3",
            SymmetryLabel::D4 => "D4",
            SymmetryLabel::A4 => "A4",
            SymmetryLabel::S4Point => "S4-point",
        }
    }
}

/// Stabilizer of c in the order-24 group, classified by order and element
/// orders. c must lie on Γ within `tol`.
pub fn rp2_symmetry_group(c: [f64; 3], tol: f64) -> Result<(SymmetryLabel, Vec<SignedPermutation>)> {
    let v = rp2_variety(c);
    if v.abs() > tol * 64.0 {
        return Err(Error::InvalidInput(format!("{c:?} is off the surface Γ (value {v:e})")));
    }
    let fix_tol = tol.max(1e-12);
    let stab: Vec<SignedPermutation> = rp2_group()
        .into_iter()
        .filter(|g| {
            let d = g.apply(c);
            (0..3).all(|i| (d[i] - c[i]).abs() <= fix_tol)
        })
        .collect();
    let has_order = |k: usize| stab.iter().any(|g| g.order() == k);
    let label = match stab.len() {
        1 => SymmetryLabel::Trivial,
        2 => SymmetryLabel::Z2,
        3 => SymmetryLabel::Z3,
        4 if has_order(4) => SymmetryLabel::Z4,
        4 => SymmetryLabel::Z2xZ2,
        6 => SymmetryLabel::S3,
        8 => SymmetryLabel::D4,
        12 => SymmetryLabel::A4,
        24 => SymmetryLabel::S4Point,
        k => return Err(Error::Inconsistent(format!("stabilizer of order {k} in a group of order 24"))),
    };
    Ok((label, stab))
}

/// The real root c ∈ (0, 1) of (c²+3)³ = 32(1 − c³), i.e. of
/// c⁶ + 9c⁴ + 32c³ + 27c² − 5; (c, c, −c) is the D₃-symmetric point.
pub fn rp2_d3_point() -> Result<f64> {
    let p = ComplexPolynomial::from_real(&[-5.0, 0.0, 27.0, 32.0, 9.0, 0.0, 1.0])?;
    let roots = poly_roots(&p)?;
    let mut c = roots
        .iter()
        .filter(|z| z.im.abs() < 1e-8 && z.re > 0.0 && z.re < 1.0)
        .map(|z| z.re)
        .next()
        .ok_or_else(|| Error::NoConvergence("no real root in (0, 1)".into()))?;
    // Newton polish on the real line.
    for _ in 0..5 {
        let f = c.powi(6) + 9.0 * c.powi(4) + 32.0 * c.powi(3) + 27.0 * c * c - 5.0;
        let d = 6.0 * c.powi(5) + 36.0 * c.powi(3) + 96.0 * c * c + 54.0 * c;
        c -= f / d;
    }
    Ok(c)
}

/// A sample of ∂D: a point of Γ with c₂ = c₃ and its stabilizer.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryPoint {
    pub c: [f64; 3],
    pub variety: f64,
    pub label: SymmetryLabel,
}

/// Points (c₁, t, t) ∈ Γ for `n` values of c₁ in (−1, 1). For fixed c₁ the
/// equation is the quartic (c₁²+3)(t²+3)² − 32(c₁t² + 1) = 0 in t.
pub fn rp2_boundary_scan(n: usize) -> Result<Vec<BoundaryPoint>> {
    let mut out = Vec::new();
    for k in 0..n {
        let c1 = -1.0 + 2.0 * (k as f64 + 0.5) / n as f64;
        let a = c1 * c1 + 3.0;
        // a(t⁴ + 6t² + 9) − 32c₁t² − 32
        let p = ComplexPolynomial::from_real(&[9.0 * a - 32.0, 0.0, 6.0 * a - 32.0 * c1, 0.0, a])?;
        let mut ts: Vec<f64> =
            poly_roots(&p)?.into_iter().filter(|z| z.im.abs() < 1e-7 && z.re.abs() < 1.0).map(|z| z.re).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
        for t in ts {
            let c = [c1, t, t];
            let variety = rp2_variety(c);
            let (label, _) = rp2_symmetry_group(c, 1e-9)?;
            out.push(BoundaryPoint { c, variety, label });
        }
    }
    Ok(out)
}

/// Möbius-strip spinors √i(−(w+1)/w², w − 1)√dw on ℂ*. The poles at 0 and ∞
/// are of second order, so no end divisor is attached.
pub fn mobius_strip_spinor() -> Result<(SpinorSection, SpinorSection)> {
    let div = Arc::new(EndDivisor::sphere(Vec::new())?);
    let sqrt_i = I.sqrt();
    let f1: Eval = Arc::new(move |w: C64| -sqrt_i * (w + 1.0) / (w * w));
    let f2: Eval = Arc::new(move |w: C64| sqrt_i * (w - 1.0));
    let s1 = SpinorSection::new(Domain::Sphere, "möbius s1", div.clone(), Vec::new(), f1, None)?;
    let s2 = SpinorSection::new(Domain::Sphere, "möbius s2", div, Vec::new(), f2, None)?;
    Ok((s1, s2))
}

/// Gauss map g = s₂/s₁ of the Möbius-strip data, −w²(w−1)/(w+1).
pub fn mobius_gauss(w: C64) -> C64 {
    -w * w * (w - 1.0) / (w + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn special_points() {
        let s = 5f64.sqrt() / 3.0;
        assert!(rp2_variety([s, 0.0, 0.0]).abs() < 1e-12);
        assert_eq!(rp2_variety([0.0, 0.0, 0.0]), -5.0);
        let (l, _) = rp2_symmetry_group([s, 0.0, 0.0], 1e-12).unwrap();
        assert_eq!(l, SymmetryLabel::Z2xZ2);
        let c = rp2_d3_point().unwrap();
        assert!(rp2_variety([c, c, -c]).abs() < 1e-12);
        let (l, _) = rp2_symmetry_group([c, c, -c], 1e-12).unwrap();
        assert_eq!(l, SymmetryLabel::S3);
        assert!(rp2_symmetry_group([0.0, 0.0, 0.0], 1e-12).is_err());
    }

    #[test]
    fn group_is_closed_and_preserves_variety() {
        let g = rp2_group();
        assert_eq!(g.len(), 24);
        for a in &g {
            for b in &g {
                assert!(g.contains(&a.compose(b)));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let v = rp2_variety(c);
            for h in &g {
                assert!((rp2_variety(h.apply(c)) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_points_have_a_reflection() {
        let pts = rp2_boundary_scan(40).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(p.variety.abs() < 1e-9);
            assert_ne!(p.label, SymmetryLabel::Trivial);
        }
        assert!(pts.iter().any(|p| p.label == SymmetryLabel::Z2));
    }

    #[test]
    fn mobius_values() {
        let (s1, s2) = mobius_strip_spinor().unwrap();
        assert!((s1.value(c64(1.0, 0.0)) + 2.0 * I.sqrt()).norm() < 1e-15);
        let w = c64(0.3, -1.2);
        assert!((s2.value(w) / s1.value(w) - mobius_gauss(w)).norm() < 1e-13);
    }
}
