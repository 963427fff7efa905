//! Spinor sections with Laurent data at the ends, the skew form Ω and its
//! kernel, and the spin double cover σ / T(A).
//!
//! A section s is stored through its chart function f = s/φ, where φ² = dz on
//! the sphere, φ₀² = du on the twisted torus and φ_r² = du/℘_r on the
//! untwisted tori. The Laurent pair (α₋₁, α₀) at an end is taken in a local
//! spinor chart √dζ, so on the untwisted tori it is the expansion of
//! f/√℘_r. At ∞ on the sphere the chart is w = 1/z with φ = i·w⁻¹·φ_w.

mod basis;
mod cover;

pub use basis::{basis_f_paired, basis_f_sphere, basis_f_torus_twisted, basis_f_torus_untwisted, PairedBasis};
pub use cover::{sigma_map, spin_cover, SpinCover};

use crate::elliptic::Lattice;
use crate::numkit::linalg::{rref, svd_jacobi, vnorm};
use crate::numkit::{composite_nodes, skew_rank_kernel_scaled, CMatrix, QuadraturePath, SkewMatrix};
use crate::par::{map_range, Exec};
use crate::{Error, Result, C64, I};
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Chart function handle.
pub type Eval = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// An end: a finite point of the chart, or ∞ on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EndPoint {
    Finite(C64),
    Infinity,
}

impl fmt::Display for EndPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndPoint::Finite(z) => write!(f, "{z}"),
            EndPoint::Infinity => write!(f, "∞"),
        }
    }
}

/// Divisor of distinct ends. On a torus, distinctness is modulo the lattice
/// and `avoid` lists points the section family must keep away from
/// (e.g. 0 and ω_r on the untwisted tori).
#[derive(Clone, Debug)]
pub struct EndDivisor {
    pub points: Vec<EndPoint>,
    pub lattice: Option<Lattice>,
    pub avoid: Vec<C64>,
}

const DISTINCT_TOL: f64 = 1e-10;

impl EndDivisor {
    pub fn sphere(points: Vec<EndPoint>) -> Result<Self> {
        if points.iter().filter(|p| **p == EndPoint::Infinity).count() > 1 {
            return Err(Error::InvalidInput("∞ listed twice".into()));
        }
        let d = EndDivisor { points, lattice: None, avoid: Vec::new() };
        d.check_distinct()?;
        Ok(d)
    }

    pub fn torus(lattice: Lattice, points: Vec<C64>, avoid: Vec<C64>) -> Result<Self> {
        let d =
            EndDivisor { points: points.into_iter().map(EndPoint::Finite).collect(), lattice: Some(lattice), avoid };
        d.check_distinct()?;
        for p in d.finite() {
            for &a in &d.avoid {
                if d.dist(p, a) < DISTINCT_TOL {
                    return Err(Error::InvalidInput(format!("end {p} sits on the forbidden point {a}")));
                }
            }
        }
        Ok(d)
    }

    fn check_distinct(&self) -> Result<()> {
        let f = self.finite();
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                if self.dist(f[i], f[j]) < DISTINCT_TOL {
                    return Err(Error::InvalidInput(format!("coincident ends {} and {}", f[i], f[j])));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Finite ends in order.
    pub fn finite(&self) -> Vec<C64> {
        self.points
            .iter()
            .filter_map(|p| match p {
                EndPoint::Finite(z) => Some(*z),
                EndPoint::Infinity => None,
            })
            .collect()
    }

    pub fn index_of(&self, p: &EndPoint) -> Option<usize> {
        self.points.iter().position(|q| match (p, q) {
            (EndPoint::Infinity, EndPoint::Infinity) => true,
            (EndPoint::Finite(a), EndPoint::Finite(b)) => self.dist(*a, *b) < DISTINCT_TOL,
            _ => false,
        })
    }

    /// Distance in the chart; modulo the lattice on a torus.
    pub fn dist(&self, a: C64, b: C64) -> f64 {
        match &self.lattice {
            Some(l) => l.lattice_distance(a - b),
            None => (a - b).norm(),
        }
    }

    /// Distance from end k to everything a small circle around it must avoid.
    fn clearance(&self, k: usize) -> f64 {
        let p = match self.points[k] {
            EndPoint::Finite(p) => p,
            EndPoint::Infinity => return f64::INFINITY,
        };
        let mut d = f64::INFINITY;
        for (j, q) in self.finite_indexed() {
            if j != k {
                d = d.min(self.dist(p, q));
            }
        }
        for &a in &self.avoid {
            d = d.min(self.dist(p, a));
        }
        if let Some(l) = &self.lattice {
            let shortest = [l.omega1, l.omega3, l.omega1 + l.omega3, l.omega1 - l.omega3]
                .iter()
                .map(|w| (2.0 * w).norm())
                .fold(f64::INFINITY, f64::min);
            d = d.min(shortest);
        }
        d
    }

    fn finite_indexed(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.points.iter().enumerate().filter_map(|(i, p)| match p {
            EndPoint::Finite(z) => Some((i, *z)),
            EndPoint::Infinity => None,
        })
    }

    /// Smallest pairwise distance between finite ends.
    pub fn min_separation(&self) -> f64 {
        let f = self.finite();
        let mut d = f64::INFINITY;
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                d = d.min(self.dist(f[i], f[j]));
            }
        }
        d
    }
}

/// Which spin structure the sections belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Domain {
    Sphere,
    TorusTwisted,
    /// φ_r² = du/℘_r with ℘_r = ℘ − e_r.
    TorusUntwisted {
        r: usize,
    },
}

/// Laurent coefficients (α₋₁, α₀) at one end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Laurent {
    pub am1: C64,
    pub a0: C64,
}

impl Laurent {
    pub fn new(am1: C64, a0: C64) -> Self {
        Laurent { am1, a0 }
    }
}

/// A meromorphic spinor section: chart evaluator plus Laurent data per end.
#[derive(Clone)]
pub struct SpinorSection {
    pub domain: Domain,
    pub label: String,
    pub divisor: Arc<EndDivisor>,
    /// Aligned with `divisor.points`.
    pub expansions: Vec<Laurent>,
    eval: Eval,
    /// φ²/du of the chart (1/℘_r on the untwisted tori), absent when 1.
    density: Option<Eval>,
}

impl fmt::Debug for SpinorSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpinorSection")
            .field("domain", &self.domain)
            .field("label", &self.label)
            .field("expansions", &self.expansions)
            .finish()
    }
}

impl SpinorSection {
    pub fn new(
        domain: Domain,
        label: impl Into<String>,
        divisor: Arc<EndDivisor>,
        expansions: Vec<Laurent>,
        eval: Eval,
        density: Option<Eval>,
    ) -> Result<Self> {
        if expansions.len() != divisor.n() {
            return Err(Error::Inconsistent(format!("{} expansions for {} ends", expansions.len(), divisor.n())));
        }
        Ok(SpinorSection { domain, label: label.into(), divisor, expansions, eval, density })
    }

    /// s/φ at u.
    pub fn value(&self, u: C64) -> C64 {
        (self.eval)(u)
    }

    /// φ²/du at u.
    pub fn density(&self, u: C64) -> C64 {
        match &self.density {
            Some(d) => d(u),
            None => C64::new(1.0, 0.0),
        }
    }

    /// s²/du at u (s²/dz on the sphere).
    pub fn square_density(&self, u: C64) -> C64 {
        let f = self.value(u);
        f * f * self.density(u)
    }

    pub fn evaluator(&self) -> Eval {
        self.eval.clone()
    }

    pub fn density_evaluator(&self) -> Option<Eval> {
        self.density.clone()
    }

    pub fn laurent(&self, p: &EndPoint) -> Result<Laurent> {
        self.divisor.index_of(p).map(|k| self.expansions[k]).ok_or_else(|| Error::MissingEnd(p.to_string()))
    }

    /// Coefficient of s in the local spinor chart √dζ at end k, at offset ζ.
    /// The square root of the density takes the principal branch at the end
    /// and follows it continuously.
    pub fn local(&self, k: usize, zeta: C64) -> C64 {
        match self.divisor.points[k] {
            EndPoint::Infinity => I * self.value(1.0 / zeta) / zeta,
            EndPoint::Finite(p) => {
                let f = self.value(p + zeta);
                match &self.density {
                    None => f,
                    Some(d) => {
                        let r0 = d(p + zeta * 1e-3).sqrt();
                        let r = d(p + zeta).sqrt();
                        f * if (r - r0).norm() <= (r + r0).norm() { r } else { -r }
                    }
                }
            }
        }
    }

    /// Laurent pair at end k estimated from the evaluator on a circle of the
    /// given radius (trapezoid rule, `samples` points).
    pub fn numeric_laurent(&self, k: usize, radius: f64, samples: usize) -> Laurent {
        let mut am1 = C64::new(0.0, 0.0);
        let mut a0 = C64::new(0.0, 0.0);
        for j in 0..samples {
            let z = C64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / samples as f64);
            let g = self.local(k, z);
            am1 += g * z;
            a0 += g;
        }
        Laurent::new(am1 / samples as f64, a0 / samples as f64)
    }

    /// Checks the stored expansions against the evaluator at radii 1e-3 and
    /// 1e-4; returns the worst discrepancy relative to the coefficient scale.
    pub fn expansion_consistency(&self) -> f64 {
        let scale = self.expansions.iter().map(|l| l.am1.norm().max(l.a0.norm())).fold(1e-300, f64::max);
        let mut worst: f64 = 0.0;
        for (k, l) in self.expansions.iter().enumerate() {
            for r in [1e-3, 1e-4] {
                let n = self.numeric_laurent(k, r, 16);
                worst = worst.max((n.am1 - l.am1).norm() / scale).max((n.a0 - l.a0).norm() / scale);
            }
        }
        worst
    }

    /// Σ cₖ sₖ over sections sharing one divisor.
    pub fn combine(sections: &[SpinorSection], coeffs: &[C64], label: impl Into<String>) -> Result<SpinorSection> {
        let first = sections.first().ok_or_else(|| Error::InvalidInput("empty combination".into()))?;
        if sections.len() != coeffs.len() {
            return Err(Error::InvalidInput("coefficient count mismatch".into()));
        }
        let n = first.divisor.n();
        let mut expansions = vec![Laurent::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); n];
        for (s, &c) in sections.iter().zip(coeffs) {
            if !Arc::ptr_eq(&s.divisor, &first.divisor) && s.divisor.points != first.divisor.points {
                return Err(Error::Inconsistent("sections live on different divisors".into()));
            }
            for (e, l) in expansions.iter_mut().zip(&s.expansions) {
                e.am1 += c * l.am1;
                e.a0 += c * l.a0;
            }
        }
        let parts: Vec<(C64, Eval)> = sections.iter().zip(coeffs).map(|(s, &c)| (c, s.eval.clone())).collect();
        let eval: Eval = Arc::new(move |u| parts.iter().map(|(c, f)| c * f(u)).sum());
        SpinorSection::new(first.domain, label, first.divisor.clone(), expansions, eval, first.density.clone())
    }

    /// Multiplies the section by a constant.
    pub fn scaled(&self, c: C64, label: impl Into<String>) -> SpinorSection {
        SpinorSection::combine(std::slice::from_ref(self), &[c], label).expect("single-section combination")
    }
}

/// Residue of the 1-form st at p: α₋₁(s)α₀(t) + α₀(s)α₋₁(t).
pub fn residue_pair(s: &SpinorSection, t: &SpinorSection, p: &EndPoint) -> Result<C64> {
    let a = s.laurent(p)?;
    let b = t.laurent(p)?;
    Ok(a.am1 * b.a0 + a.a0 * b.am1)
}

fn residue_sum_check(s: &SpinorSection, t: &SpinorSection) -> Result<()> {
    let mut sum = C64::new(0.0, 0.0);
    let mut scale: f64 = 0.0;
    for (a, b) in s.expansions.iter().zip(&t.expansions) {
        let r = a.am1 * b.a0 + a.a0 * b.am1;
        sum += r;
        scale = scale.max((a.am1 * b.a0).norm()).max((a.a0 * b.am1).norm());
    }
    if sum.norm() > 1e-8 * scale.max(1.0) {
        return Err(Error::Inconsistent(format!("residues of {}·{} sum to {sum} instead of 0", s.label, t.label)));
    }
    Ok(())
}

/// Ω(s, t) = Σₖ α₀ᵏ(s) α₋₁ᵏ(t), after checking that the residues of st sum to 0.
pub fn omega_pair(s: &SpinorSection, t: &SpinorSection) -> Result<C64> {
    if s.divisor.points != t.divisor.points {
        return Err(Error::Inconsistent("sections live on different divisors".into()));
    }
    residue_sum_check(s, t)?;
    Ok(s.expansions.iter().zip(&t.expansions).map(|(a, b)| a.a0 * b.am1).sum())
}

const DERIV_POINTS: usize = 24;

/// Samples (f, f′, density) of one section at the quadrature nodes around
/// end k; f′ from a Cauchy integral on a circle of radius `delta`.
fn end_samples(s: &SpinorSection, nodes: &[(C64, C64)], delta: f64) -> Vec<(C64, C64, C64)> {
    nodes
        .iter()
        .map(|&(z, _)| {
            let mut d = C64::new(0.0, 0.0);
            for j in 0..DERIV_POINTS {
                let e = C64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / DERIV_POINTS as f64);
                d += s.value(z + delta * e) / e;
            }
            (s.value(z), d / (DERIV_POINTS as f64 * delta), s.density(z))
        })
        .collect()
}

struct EndCircle {
    path: QuadraturePath,
    center: C64,
    delta: f64,
}

fn end_circle(div: &EndDivisor, k: usize) -> EndCircle {
    match div.points[k] {
        EndPoint::Infinity => {
            let rmax = div.finite().iter().map(|z| z.norm()).fold(0.0, f64::max);
            let r = 3.0 * rmax + 1.0;
            EndCircle {
                path: QuadraturePath::circle(C64::new(0.0, 0.0), r),
                center: C64::new(0.0, 0.0),
                delta: r / 6.0,
            }
        }
        EndPoint::Finite(p) => {
            let rho = 0.3 * div.clearance(k);
            EndCircle { path: QuadraturePath::circle(p, rho), center: p, delta: rho / 4.0 }
        }
    }
}

/// qres matrix of all pairs at one end: Q[i][j] = qres_p(sᵢ∂sⱼ − sⱼ∂sᵢ).
fn qres_at_end(sections: &[&SpinorSection], k: usize) -> Result<Vec<Vec<C64>>> {
    let div = &sections[0].divisor;
    let circle = end_circle(div, k);
    let m = sections.len();
    let integrate = |panels: usize| {
        let nodes = composite_nodes(&circle.path, panels);
        let samples: Vec<Vec<(C64, C64, C64)>> =
            sections.iter().map(|s| end_samples(s, &nodes, circle.delta)).collect();
        let mut q = vec![vec![C64::new(0.0, 0.0); m]; m];
        let mut mag = vec![vec![0.0f64; m]; m];
        for i in 0..m {
            for j in i + 1..m {
                let mut acc = C64::new(0.0, 0.0);
                let mut size = 0.0;
                for (n, &(z, w)) in nodes.iter().enumerate() {
                    let (fs, dfs, rho) = samples[i][n];
                    let (ft, dft, _) = samples[j][n];
                    let v = (z - circle.center) * rho * (fs * dft - ft * dfs) * w;
                    acc += v;
                    size += v.norm();
                }
                q[i][j] = acc / (2.0 * PI * I);
                q[j][i] = -q[i][j];
                mag[i][j] = size;
            }
        }
        (q, mag)
    };
    let mut panels = 8;
    let (mut prev, _) = integrate(panels);
    while panels < 512 {
        panels *= 2;
        let (cur, mag) = integrate(panels);
        let mut ok = true;
        for i in 0..m {
            for j in i + 1..m {
                let d = (cur[i][j] - prev[i][j]).norm();
                if d > 1e-10 * cur[i][j].norm().max(1e-3 * mag[i][j] / (2.0 * PI)) {
                    ok = false;
                }
            }
        }
        if ok {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence(format!("qres quadrature at end {} did not settle", div.points[k])))
}

/// Ω(s, t) = −½ Σ_p qres_p(s∂t − t∂s) computed from the evaluators alone:
/// derivatives by Cauchy integrals and qres by quadrature on a small circle
/// around each end. The expansion tables are not consulted.
pub fn omega_qres_oracle(s: &SpinorSection, t: &SpinorSection) -> Result<C64> {
    let m = omega_qres_matrix(&[s.clone(), t.clone()], Exec::Sequential)?;
    Ok(m[(0, 1)])
}

/// The oracle for every pair of a basis at once.
pub fn omega_qres_matrix(sections: &[SpinorSection], exec: Exec) -> Result<CMatrix> {
    let first = sections.first().ok_or_else(|| Error::InvalidInput("empty basis".into()))?;
    let refs: Vec<&SpinorSection> = sections.iter().collect();
    let per_end = map_range(exec, first.divisor.n(), |k| qres_at_end(&refs, k));
    let m = sections.len();
    let mut out = CMatrix::zeros(m, m);
    for q in per_end {
        let q = q?;
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] -= 0.5 * q[i][j];
            }
        }
    }
    Ok(out)
}

/// Matrix of Ω in a basis of F, with the H subspace in basis coordinates.
#[derive(Clone, Debug)]
pub struct OmegaForm {
    pub matrix: SkewMatrix,
    pub basis: Vec<SpinorSection>,
    pub divisor: Arc<EndDivisor>,
    pub h_dim: usize,
    pub h_basis: Vec<Vec<C64>>,
    /// Largest Σₖ|α₀ᵏ(s)||α₋₁ᵏ(t)| over basis pairs: the size of the terms
    /// that cancel when an entry vanishes. Used as the rank-cutoff floor.
    pub term_scale: f64,
}

/// Fills Ω from `omega_pair` on every basis pair.
pub fn omega_matrix(basis: Vec<SpinorSection>, h_basis: Vec<Vec<C64>>) -> Result<OmegaForm> {
    let first = basis.first().ok_or_else(|| Error::InvalidInput("empty basis".into()))?;
    let divisor = first.divisor.clone();
    let n = basis.len();
    let mut m = CMatrix::zeros(n, n);
    let mut term_scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] = omega_pair(&basis[i], &basis[j])?;
                let t: f64 =
                    basis[i].expansions.iter().zip(&basis[j].expansions).map(|(a, b)| (a.a0 * b.am1).norm()).sum();
                term_scale = term_scale.max(t);
            }
        }
    }
    Ok(OmegaForm { matrix: SkewMatrix::antisymmetrize(&m), h_dim: h_basis.len(), h_basis, basis, divisor, term_scale })
}

impl OmegaForm {
    /// Rank and kernel dimension at the given relative tolerance.
    pub fn rank(&self, tol: f64) -> usize {
        self.rank_kernel(tol).rank
    }

    pub fn rank_kernel(&self, tol: f64) -> crate::numkit::skew::SkewRankKernel {
        skew_rank_kernel_scaled(&self.matrix, tol, self.term_scale)
    }

    pub fn pfaffian(&self) -> C64 {
        crate::numkit::pfaffian(&self.matrix)
    }
}

/// A K element: coefficients over the basis and the combined section.
#[derive(Clone, Debug)]
pub struct KernelSection {
    pub coeffs: Vec<C64>,
    pub section: SpinorSection,
    /// max |α₀| over the ends relative to the coefficient scale.
    pub k_residual: f64,
}

/// ker Ω with H projected out (Gram–Schmidt in basis coordinates), reduced
/// to echelon form so each vector has its first nonzero coefficient equal
/// to 1. Every returned section is checked to have α₀ = 0 at all ends.
pub fn extract_k(form: &OmegaForm, tol: f64) -> Result<Vec<KernelSection>> {
    let rk = form.rank_kernel(tol);
    let kdim = rk.kernel.len();
    if kdim < form.h_dim {
        return Err(Error::Inconsistent(format!(
            "kernel of dimension {kdim} cannot contain H of dimension {}",
            form.h_dim
        )));
    }
    // Orthonormal basis of H.
    let mut h: Vec<Vec<C64>> = Vec::new();
    for v in &form.h_basis {
        let mut w = v.clone();
        for e in &h {
            let c: C64 = e.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in w.iter_mut().zip(e) {
                *x -= c * y;
            }
        }
        let nrm = vnorm(&w);
        if nrm > 1e-12 {
            h.push(w.iter().map(|x| x / nrm).collect());
        }
    }
    let projected: Vec<Vec<C64>> = rk
        .kernel
        .iter()
        .map(|v| {
            let mut w = v.clone();
            for e in &h {
                let c: C64 = e.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in w.iter_mut().zip(e) {
                    *x -= c * y;
                }
            }
            w
        })
        .collect();
    // Span of the projections has dimension dim ker − dim H.
    let want = kdim - form.h_dim;
    let n = form.basis.len();
    let vecs = if projected.is_empty() || want == 0 {
        Vec::new()
    } else {
        let m = CMatrix::from_fn(n, projected.len(), |i, j| projected[j][i]);
        let svd = svd_jacobi(&m.transpose());
        (0..want).map(|k| (0..n).map(|i| svd.v[(i, k)].conj()).collect::<Vec<C64>>()).collect()
    };
    let echelon = rref(&vecs, 1e-9);
    echelon
        .into_iter()
        .enumerate()
        .map(|(idx, coeffs)| {
            let section = SpinorSection::combine(&form.basis, &coeffs, format!("k{}", idx + 1))?;
            let scale = form
                .basis
                .iter()
                .zip(&coeffs)
                .flat_map(|(s, c)| s.expansions.iter().map(move |l| (c * l.am1).norm().max((c * l.a0).norm())))
                .fold(1e-300, f64::max);
            let k_residual = section.expansions.iter().map(|l| l.a0.norm()).fold(0.0, f64::max) / scale;
            if k_residual > tol.max(1e-9) * 1e3 {
                return Err(Error::Inconsistent(format!(
                    "kernel vector {} fails the K test (max |α₀| = {k_residual:e})",
                    idx + 1
                )));
            }
            Ok(KernelSection { coeffs, section, k_residual })
        })
        .collect()
}

/// Planar-end test at p: α₀(s₁) = α₀(s₂) = 0 and at least one pole.
pub fn check_planar_end(s1: &SpinorSection, s2: &SpinorSection, p: &EndPoint, tol: f64) -> Result<bool> {
    let a = s1.laurent(p)?;
    let b = s2.laurent(p)?;
    let scale = a.am1.norm().max(b.am1.norm()).max(a.a0.norm()).max(b.a0.norm());
    if scale == 0.0 {
        return Ok(false);
    }
    let pole = a.am1.norm().max(b.am1.norm()) > tol * scale;
    Ok(pole && a.a0.norm() <= tol * scale && b.a0.norm() <= tol * scale)
}

/// Rank of the evaluation matrix [sⱼ(uᵢ)] at the given probes.
pub fn evaluation_rank(sections: &[SpinorSection], probes: &[C64], tol: f64) -> usize {
    let m = CMatrix::from_fn(probes.len(), sections.len(), |i, j| sections[j].value(probes[i]));
    let svd = svd_jacobi(&m);
    let top = svd.sigma.first().copied().unwrap_or(0.0);
    svd.sigma.iter().filter(|&&s| s > tol * top).count()
}

#[cfg(test)]
mod tests;
