//! Complex polynomials and simultaneous root finding (Aberth–Ehrlich).

use crate::{Error, Result, C64};

/// Polynomial with complex coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPolynomial {
    coeffs: Vec<C64>,
}

impl ComplexPolynomial {
    /// Trailing (highest-degree) zero coefficients are stripped. The zero
    /// polynomial is rejected since its degree is undefined.
    pub fn new(mut coeffs: Vec<C64>) -> Result<Self> {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("zero polynomial has no degree".into()));
        }
        Ok(ComplexPolynomial { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut c = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
            for (k, &a) in c.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            c = next;
        }
        ComplexPolynomial { coeffs: c }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> ComplexPolynomial {
        if self.degree() == 0 {
            return ComplexPolynomial { coeffs: vec![C64::new(0.0, 0.0)] };
        }
        ComplexPolynomial { coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect() }
    }

    /// Coefficient scale used for residual tolerances: Σ|cₖ|·max(1,|z|)ᵏ.
    pub fn scale_at(&self, z: C64) -> f64 {
        let r = z.norm().max(1.0);
        self.coeffs.iter().enumerate().map(|(k, c)| c.norm() * r.powi(k as i32)).sum()
    }

    pub fn mul(&self, other: &ComplexPolynomial) -> ComplexPolynomial {
        let mut c = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        ComplexPolynomial { coeffs: c }
    }
}

/// Iteration cap for [`poly_roots`].
pub const ROOT_MAX_ITER: usize = 500;

/// All roots (with multiplicity) by Aberth–Ehrlich iteration from a circle of
/// Cauchy-bound radius, followed by one Newton polish step per root.
///
/// Fails with [`Error::NoConvergence`] if the corrections have not settled
/// within [`ROOT_MAX_ITER`] sweeps, or if a root's residual exceeds
/// `1e-10 · scale`, where the scale is Σ|cₖ|·max(1,|z|)ᵏ.
pub fn poly_roots(p: &ComplexPolynomial) -> Result<Vec<C64>> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::InvalidInput("degree-0 polynomial has no roots".into()));
    }
    let lead = p.coeffs[n];
    if n == 1 {
        return Ok(vec![-p.coeffs[0] / lead]);
    }
    // Cauchy-type bound for starting radius; the offset angle breaks symmetry.
    let radius = 1.0 + p.coeffs[..n].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
    let r0 = radius.min(1e6) * 0.5 + 0.1;
    let mut z: Vec<C64> =
        (0..n).map(|k| C64::from_polar(r0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4)).collect();
    let mut converged = false;
    for _ in 0..ROOT_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (pv, dp) = p.eval_with_derivative(z[k]);
            if pv == C64::new(0.0, 0.0) {
                continue;
            }
            let ratio = pv / dp;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d != C64::new(0.0, 0.0) {
                        s += 1.0 / d;
                    }
                }
            }
            let step = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    for zk in z.iter_mut() {
        let (pv, dp) = p.eval_with_derivative(*zk);
        if dp.norm() > 0.0 {
            let polished = *zk - pv / dp;
            if polished.is_finite() && p.eval(polished).norm() <= pv.norm() {
                *zk = polished;
            }
        }
    }
    for &zk in &z {
        let res = p.eval(zk).norm();
        if !(res <= 1e-10 * p.scale_at(zk)) {
            return Err(Error::NoConvergence(format!(
                "poly_roots: residual {res:e} at {zk} (iteration converged: {converged})"
            )));
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn contains(roots: &[C64], z: C64, tol: f64) -> bool {
        roots.iter().any(|r| (r - z).norm() < tol)
    }

    #[test]
    fn z_squared_minus_one() {
        let p = ComplexPolynomial::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let r = poly_roots(&p).unwrap();
        assert!(contains(&r, c64(1.0, 0.0), 1e-12) && contains(&r, c64(-1.0, 0.0), 1e-12));
    }

    #[test]
    fn sphere_quartic_contains_first_quadrant_root() {
        let s3 = 3f64.sqrt();
        let a = ComplexPolynomial::from_real(&[1.0, -s3, 1.0]).unwrap();
        let b = ComplexPolynomial::from_real(&[1.0, s3, 1.0]).unwrap();
        let r = poly_roots(&a.mul(&b)).unwrap();
        assert_eq!(r.len(), 4);
        assert!(contains(&r, c64(s3 / 2.0, 0.5), 1e-12));
    }

    #[test]
    fn multiple_root_still_within_residual() {
        let p = ComplexPolynomial::from_roots(&[c64(1.0, 1.0), c64(1.0, 1.0), c64(-2.0, 0.0)]);
        let r = poly_roots(&p).unwrap();
        assert!(contains(&r, c64(-2.0, 0.0), 1e-10));
        assert!(r.iter().all(|z| p.eval(*z).norm() <= 1e-10 * p.scale_at(*z)));
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(ComplexPolynomial::new(vec![c64(0.0, 0.0)]).is_err());
    }

    #[test]
    fn derivative_of_cubic() {
        let p = ComplexPolynomial::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.derivative().coeffs(), &[c64(2.0, 0.0), c64(6.0, 0.0), c64(12.0, 0.0)]);
    }
}
