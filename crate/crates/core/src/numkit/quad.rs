//! Composite Gauss–Legendre quadrature along segments and circles.

use crate::{Error, Result, C64, I};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Integration path in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuadraturePath {
    /// Straight segment from `a` to `b`.
    Segment { a: C64, b: C64, samples: usize },
    /// Circle of the given radius; `orientation` is +1 (counter-clockwise) or −1.
    Circle { center: C64, radius: f64, orientation: i8, samples: usize },
}

impl QuadraturePath {
    pub fn segment(a: C64, b: C64) -> Self {
        QuadraturePath::Segment { a, b, samples: 8 }
    }

    pub fn circle(center: C64, radius: f64) -> Self {
        QuadraturePath::Circle { center, radius, orientation: 1, samples: 16 }
    }

    pub fn with_samples(self, n: usize) -> Self {
        match self {
            QuadraturePath::Segment { a, b, .. } => QuadraturePath::Segment { a, b, samples: n },
            QuadraturePath::Circle { center, radius, orientation, .. } => {
                QuadraturePath::Circle { center, radius, orientation, samples: n }
            }
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            QuadraturePath::Segment { a, b, samples } => QuadraturePath::Segment { a: b, b: a, samples },
            QuadraturePath::Circle { center, radius, orientation, samples } => {
                QuadraturePath::Circle { center, radius, orientation: -orientation, samples }
            }
        }
    }

    pub fn samples(&self) -> usize {
        match *self {
            QuadraturePath::Segment { samples, .. } | QuadraturePath::Circle { samples, .. } => samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min = if matches!(self, QuadraturePath::Segment { .. }) { 1 } else { 8 };
        if self.samples() < min {
            return Err(Error::InvalidInput(format!("path needs at least {min} samples, got {}", self.samples())));
        }
        if let QuadraturePath::Circle { radius, orientation, .. } = *self {
            if !(radius > 0.0) {
                return Err(Error::InvalidInput(format!("circle radius must be positive, got {radius}")));
            }
            if orientation != 1 && orientation != -1 {
                return Err(Error::InvalidInput("orientation must be ±1".into()));
            }
        }
        Ok(())
    }

    /// Point and derivative dz/dt for t ∈ [0, 1].
    pub fn point(&self, t: f64) -> (C64, C64) {
        match *self {
            QuadraturePath::Segment { a, b, .. } => (a + (b - a) * t, b - a),
            QuadraturePath::Circle { center, radius, orientation, .. } => {
                let s = orientation as f64 * 2.0 * PI;
                let e = C64::from_polar(radius, s * t);
                (center + e, I * s * e)
            }
        }
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1], from
/// Newton iteration on Pₙ seeded by the Chebyshev-like guesses cos(π(k−¼)/(n+½)).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut z = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[k] = -z;
        x[n - 1 - k] = z;
        w[k] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - k] = w[k];
    }
    (x, w)
}

const RULE_POINTS: usize = 16;
const MAX_PANELS: usize = 1 << 14;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(RULE_POINTS))
}

/// One pass of composite quadrature; returns (∫f dz, ∫|f||dz|) with the
/// magnitude taken over all components.
fn composite<const N: usize, F: Fn(C64) -> [C64; N] + ?Sized>(
    f: &F,
    path: &QuadraturePath,
    panels: usize,
) -> Result<([C64; N], f64)> {
    let (x, w) = rule();
    let h = 1.0 / panels as f64;
    let mut acc = [C64::new(0.0, 0.0); N];
    let mut mag = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            let (z, dz) = path.point(mid + 0.5 * h * xi);
            let vals = f(z);
            let wt = 0.5 * h * wi;
            for (a, v) in acc.iter_mut().zip(vals) {
                let v = v * dz;
                if !v.is_finite() {
                    return Err(Error::Pole(format!("integrand not finite at {z}")));
                }
                *a += v * wt;
                mag += v.norm() * wt;
            }
        }
    }
    Ok((acc, mag))
}

fn max_norm<const N: usize>(v: &[C64; N]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Quadrature nodes of the composite rule: (z, weight·dz/dt). Summing
/// g(z)·w over them integrates g along the path.
pub fn composite_nodes(path: &QuadraturePath, panels: usize) -> Vec<(C64, C64)> {
    let (x, w) = rule();
    let h = 1.0 / panels as f64;
    let mut out = Vec::with_capacity(panels * RULE_POINTS);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            let (z, dz) = path.point(mid + 0.5 * h * xi);
            out.push((z, dz * (0.5 * h * wi)));
        }
    }
    out
}

/// ∮ f dz along the path with the default tolerance 1e-8.
pub fn contour_integral<F: Fn(C64) -> C64 + ?Sized>(f: &F, path: &QuadraturePath) -> Result<C64> {
    contour_integral_tol(f, path, 1e-8)
}

/// Relative accuracy below which a stalled refinement is accepted.
pub const ROUNDOFF_FLOOR: f64 = 1e-9;

/// Composite 16-point Gauss–Legendre, starting from `samples` panels and
/// doubling until successive results differ by less than `tol` relative to
/// max(|I|, ∫|f||dz|·1e-3). The floor keeps integrals that cancel to zero
/// (e.g. vanishing periods) from never converging.
///
/// Integrands evaluated with cancellation (a removable 0·∞ in a chart) carry
/// a roundoff floor that no refinement removes. If the difference has
/// stopped shrinking for two doublings while already below
/// [`ROUNDOFF_FLOOR`], the current value is returned. Fails at 2¹⁴ panels.
pub fn contour_integral_tol<F: Fn(C64) -> C64 + ?Sized>(f: &F, path: &QuadraturePath, tol: f64) -> Result<C64> {
    contour_integral_vec_tol(&|z| [f(z)], path, tol).map(|[v]| v)
}

/// [`contour_integral_tol`] for several integrands sharing one evaluation per
/// node. Convergence is judged on the largest component difference.
pub fn contour_integral_vec_tol<const N: usize, F: Fn(C64) -> [C64; N] + ?Sized>(
    f: &F,
    path: &QuadraturePath,
    tol: f64,
) -> Result<[C64; N]> {
    path.validate()?;
    let mut panels = path.samples();
    let (mut prev, _) = composite(f, path, panels)?;
    let mut prev_diff = f64::INFINITY;
    let mut stalls = 0;
    while panels < MAX_PANELS {
        panels *= 2;
        let (cur, mag) = composite(f, path, panels)?;
        let diff = cur.iter().zip(&prev).map(|(c, p)| (c - p).norm()).fold(0.0, f64::max);
        let scale = max_norm(&cur).max(1e-3 * mag / N as f64);
        if diff <= tol * scale {
            return Ok(cur);
        }
        stalls = if diff >= 0.5 * prev_diff && diff <= ROUNDOFF_FLOOR * scale { stalls + 1 } else { 0 };
        if stalls >= 2 {
            return Ok(cur);
        }
        prev = cur;
        prev_diff = diff;
    }
    Err(Error::NoConvergence(format!("contour integral did not settle within {MAX_PANELS} panels")))
}
