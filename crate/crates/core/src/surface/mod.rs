//! From a spinor pair to geometry: X = Re ∫(s₁² − s₂², i(s₁² + s₂²), 2s₁s₂),
//! periods, branch points, the Gauss map and meshes.

mod mesh;

pub use mesh::{export_obj, parse_obj, write_csv, write_metadata, MeshMetadata, ObjData, SurfaceMesh};

use crate::numkit::{contour_integral_vec_tol, gauss_legendre, QuadraturePath};
use crate::par::{map_range, Exec};
use crate::spinor::{Domain, EndDivisor, Eval, SpinorSection};
use crate::{c64, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::VecDeque;
use std::sync::Arc;

const EDGE_TOL: f64 = 1e-13;

/// A spinor pair ready for integration.
#[derive(Clone, Debug)]
pub struct WeierstrassData {
    pub s1: SpinorSection,
    pub s2: SpinorSection,
    /// Radius of the disks removed around the ends, in chart units.
    pub end_clearance: f64,
}

impl WeierstrassData {
    pub fn new(s1: SpinorSection, s2: SpinorSection, end_clearance: f64) -> Result<Self> {
        if !(end_clearance > 0.0) {
            return Err(Error::InvalidInput(format!("end clearance must be positive, got {end_clearance}")));
        }
        if s1.domain != s2.domain {
            return Err(Error::Inconsistent("s1 and s2 live on different domains".into()));
        }
        if !Arc::ptr_eq(&s1.divisor, &s2.divisor) && s1.divisor.points != s2.divisor.points {
            return Err(Error::Inconsistent("s1 and s2 have different end divisors".into()));
        }
        Ok(WeierstrassData { s1, s2, end_clearance })
    }

    /// Clearance of 0.05 × the smallest pairwise end distance.
    pub fn with_default_clearance(s1: SpinorSection, s2: SpinorSection) -> Result<Self> {
        let sep = s1.divisor.min_separation();
        let eps = if sep.is_finite() { 0.05 * sep } else { 0.05 };
        Self::new(s1, s2, eps)
    }

    pub fn divisor(&self) -> &EndDivisor {
        &self.s1.divisor
    }

    /// (s₁², s₂², s₁s₂)/du at u.
    pub fn products(&self, u: C64) -> [C64; 3] {
        let (a, b) = (self.s1.value(u), self.s2.value(u));
        let d = self.s1.density(u);
        [a * a * d, b * b * d, a * b * d]
    }

    /// ω/du = σ(s₁, s₂)/du.
    pub fn omega(&self, u: C64) -> [C64; 3] {
        let [p, q, r] = self.products(u);
        [p - q, crate::I * (p + q), 2.0 * r]
    }

    /// Distance from u to the nearest finite end.
    pub fn end_distance(&self, u: C64) -> f64 {
        let div = self.divisor();
        div.finite().iter().map(|&e| div.dist(u, e)).fold(f64::INFINITY, f64::min)
    }
}

/// Enneper's surface: s₁ = φ, s₂ = zφ on the sphere, so g = z and ω = (1 − z², i(1 + z²), 2z)dz.
pub fn enneper_data() -> Result<WeierstrassData> {
    monomial_data(1)
}

/// s₁ = φ, s₂ = zᵏφ on the sphere (Enneper-type surfaces with g = zᵏ).
pub fn monomial_data(k: i32) -> Result<WeierstrassData> {
    let div = Arc::new(EndDivisor::sphere(Vec::new())?);
    let one: Eval = Arc::new(|_| c64(1.0, 0.0));
    let zk: Eval = Arc::new(move |z: C64| z.powi(k));
    let s1 = SpinorSection::new(Domain::Sphere, "1", div.clone(), Vec::new(), one, None)?;
    let s2 = SpinorSection::new(Domain::Sphere, format!("z^{k}"), div, Vec::new(), zk, None)?;
    WeierstrassData::new(s1, s2, 0.05)
}

/// Parallelogram grid: vertices origin + (i/n)·e₁ + (j/n)·e₂ for 0 ≤ i, j ≤ n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub origin: C64,
    pub e1: C64,
    pub e2: C64,
    pub n: usize,
}

impl GridSpec {
    /// The square [−L, L]².
    pub fn square(half_width: f64, n: usize) -> Self {
        GridSpec {
            origin: c64(-half_width, -half_width),
            e1: c64(2.0 * half_width, 0.0),
            e2: c64(0.0, 2.0 * half_width),
            n,
        }
    }

    /// The fundamental parallelogram spanned by 2ω₁, 2ω₃, shifted by `origin`.
    pub fn torus(omega1: C64, omega3: C64, origin: C64, n: usize) -> Self {
        GridSpec { origin, e1: 2.0 * omega1, e2: 2.0 * omega3, n }
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        let n = self.n as f64;
        self.origin + self.e1 * (i as f64 / n) + self.e2 * (j as f64 / n)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidInput("grid needs n ≥ 1".into()));
        }
        let area = (self.e1.conj() * self.e2).im;
        if area.abs() < 1e-14 * self.e1.norm() * self.e2.norm() {
            return Err(Error::InvalidInput("grid edge vectors are parallel".into()));
        }
        Ok(())
    }

    /// Grid coordinates (x, y) with u = origin + x·e₁ + y·e₂.
    fn coords(&self, u: C64) -> (f64, f64) {
        let d = u - self.origin;
        let det = self.e1.re * self.e2.im - self.e1.im * self.e2.re;
        ((d.re * self.e2.im - d.im * self.e2.re) / det, (self.e1.re * d.im - self.e1.im * d.re) / det)
    }
}

/// ∫ ω along the segment a → b, adaptive Gauss–Legendre.
pub fn integrate_segment(data: &WeierstrassData, a: C64, b: C64) -> Result<[C64; 3]> {
    contour_integral_vec_tol(&|u| data.omega(u), &QuadraturePath::segment(a, b).with_samples(2), EDGE_TOL)
}

fn re3(w: [C64; 3]) -> [f64; 3] {
    [w[0].re, w[1].re, w[2].re]
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Integrates the surface over the grid. Vertices within the end clearance are
/// dropped, the edge integrals are computed independently (in parallel under
/// `exec`), and X is accumulated along a breadth-first spanning tree rooted at
/// the grid vertex nearest `basepoint`, where X(basepoint) = 0.
pub fn integrate_surface(data: &WeierstrassData, grid: GridSpec, basepoint: C64, exec: Exec) -> Result<SurfaceMesh> {
    grid.validate()?;
    let eps = data.end_clearance;
    if data.end_distance(basepoint) <= eps {
        return Err(Error::InvalidInput(format!("basepoint {basepoint} is within ε = {eps} of an end")));
    }
    let n = grid.n;
    let side = n + 1;
    let idx = |i: usize, j: usize| j * side + i;
    let active: Vec<bool> = (0..side * side).map(|k| data.end_distance(grid.point(k % side, k / side)) > eps).collect();

    // Grid edges between active vertices whose segment keeps clear of the ends.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for j in 0..side {
        for i in 0..side {
            if !active[idx(i, j)] {
                continue;
            }
            if i + 1 < side && active[idx(i + 1, j)] {
                edges.push((idx(i, j), idx(i + 1, j)));
            }
            if j + 1 < side && active[idx(i, j + 1)] {
                edges.push((idx(i, j), idx(i, j + 1)));
            }
        }
    }
    let at = |k: usize| grid.point(k % side, k / side);
    // Samples every ε/4 with distance > ε/2 keep the whole segment 3ε/8 clear.
    let clear: Vec<bool> = edges
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (at(a), at(b));
            let m = ((b - a).norm() / (0.25 * eps)).ceil().max(1.0) as usize;
            (0..=m).all(|t| data.end_distance(a + (b - a) * (t as f64 / m as f64)) > 0.5 * eps)
        })
        .collect();
    let edges: Vec<(usize, usize)> = edges.into_iter().zip(clear).filter(|(_, c)| *c).map(|(e, _)| e).collect();
    let integrals: Vec<Result<[C64; 3]>> =
        map_range(exec, edges.len(), |k| integrate_segment(data, at(edges[k].0), at(edges[k].1)));
    let integrals: Vec<[f64; 3]> = integrals.into_iter().map(|r| r.map(re3)).collect::<Result<_>>()?;

    let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); side * side];
    for (k, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, k, 1.0));
        adj[b].push((a, k, -1.0));
    }
    let root = (0..side * side)
        .filter(|&k| active[k])
        .min_by(|&a, &b| (at(a) - basepoint).norm().total_cmp(&(at(b) - basepoint).norm()))
        .ok_or_else(|| Error::InvalidInput("every grid vertex lies within ε of an end".into()))?;
    let mut x: Vec<Option<[f64; 3]>> = vec![None; side * side];
    x[root] = Some(re3(integrate_segment(data, basepoint, at(root))?));
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let xv = x[v].expect("queued vertices are set");
        for &(w, k, sign) in &adj[v] {
            if x[w].is_none() {
                let e = integrals[k];
                x[w] = Some(add3(xv, [sign * e[0], sign * e[1], sign * e[2]]));
                queue.push_back(w);
            }
        }
    }

    // Cell closure: Σ ±edge integrals around every cell with four tree-reached corners.
    let mut edge_of = std::collections::HashMap::new();
    for (k, &(a, b)) in edges.iter().enumerate() {
        edge_of.insert((a, b), k);
    }
    let oriented = |a: usize, b: usize| -> Option<[f64; 3]> {
        if let Some(&k) = edge_of.get(&(a, b)) {
            Some(integrals[k])
        } else {
            edge_of.get(&(b, a)).map(|&k| {
                let e = integrals[k];
                [-e[0], -e[1], -e[2]]
            })
        }
    };
    let ends = data.divisor().finite();
    let cell_has_end = |i: usize, j: usize| {
        ends.iter().any(|&e| {
            let (cx, cy) = grid.coords(e);
            let (cx, cy) = (cx * n as f64, cy * n as f64);
            cx >= i as f64 && cx <= (i + 1) as f64 && cy >= j as f64 && cy <= (j + 1) as f64
        })
    };
    let mut vertex_id = vec![usize::MAX; side * side];
    let mut mesh = SurfaceMesh::default();
    for k in 0..side * side {
        if let Some(p) = x[k] {
            vertex_id[k] = mesh.vertices.len();
            mesh.vertices.push(p);
            mesh.domain_uv.push(at(k));
            mesh.grid_index.push((k % side, k / side));
        }
    }
    let mut closure_max: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let c = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            if c.iter().any(|&k| vertex_id[k] == usize::MAX) {
                continue;
            }
            if cell_has_end(i, j) {
                continue;
            }
            let legs: Option<Vec<[f64; 3]>> = (0..4).map(|s| oriented(c[s], c[(s + 1) % 4])).collect();
            if let Some(legs) = legs {
                let sum = legs.iter().fold([0.0; 3], |acc, l| add3(acc, *l));
                closure_max = closure_max.max(norm3(sum));
            }
            let v: Vec<usize> = c.iter().map(|&k| vertex_id[k]).collect();
            mesh.faces.push([v[0], v[1], v[2]]);
            mesh.faces.push([v[0], v[2], v[3]]);
        }
    }
    mesh.gauss = mesh.domain_uv.iter().map(|&u| gauss_map(data, u).unwrap_or([0.0, 0.0, 1.0])).collect();
    mesh.grid = Some(grid);
    mesh.closure_max = closure_max;
    mesh.scale = mesh.vertices.iter().map(|&p| norm3(p)).fold(0.0, f64::max);
    Ok(mesh)
}

/// Loop residuals |Re ∮ω| over `count` random grid rectangles that avoid the
/// ends, each integrated edge by edge along the grid.
pub fn random_cycle_residuals(data: &WeierstrassData, grid: GridSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count.max(1) {
            return Err(Error::NoConvergence("could not place cycles clear of the ends".into()));
        }
        let (i0, i1) = ordered(rng.gen_range(0..=n), rng.gen_range(0..=n));
        let (j0, j1) = ordered(rng.gen_range(0..=n), rng.gen_range(0..=n));
        if i0 == i1 || j0 == j1 {
            continue;
        }
        let corners = [grid.point(i0, j0), grid.point(i1, j0), grid.point(i1, j1), grid.point(i0, j1)];
        let enclosed = data.divisor().finite().iter().any(|&e| {
            let (x, y) = grid.coords(e);
            let (x, y) = (x * n as f64, y * n as f64);
            x >= i0 as f64 && x <= i1 as f64 && y >= j0 as f64 && y <= j1 as f64
        });
        let clear = (0..4).all(|s| {
            let (a, b) = (corners[s], corners[(s + 1) % 4]);
            (0..=32).all(|t| data.end_distance(a + (b - a) * (t as f64 / 32.0)) > data.end_clearance)
        });
        if enclosed || !clear {
            continue;
        }
        let mut sum = [0.0; 3];
        for s in 0..4 {
            sum = add3(sum, re3(integrate_segment(data, corners[s], corners[(s + 1) % 4])?));
        }
        out.push(norm3(sum));
    }
    Ok(out)
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// (∫s₁², ∫s₂², ∫s₁s₂) over a loop, and the derived period conditions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PeriodReport {
    pub integrals: [C64; 3],
    /// Re ∫ω.
    pub real_period: [f64; 3],
    /// |∫s₁² − conj ∫s₂²| and |Re ∫s₁s₂|.
    pub condition_residual: [f64; 2],
}

impl PeriodReport {
    /// Re ∫ω vanishes to `tol`, so X closes up around the loop.
    pub fn closes(&self, tol: f64) -> bool {
        norm3(self.real_period) <= tol
    }
}

pub fn period_vector(data: &WeierstrassData, path: &QuadraturePath) -> Result<PeriodReport> {
    let integrals = contour_integral_vec_tol(&|u| data.products(u), path, 1e-12)?;
    let [p, q, r] = integrals;
    let w = [p - q, crate::I * (p + q), 2.0 * r];
    Ok(PeriodReport { integrals, real_period: re3(w), condition_residual: [(p - q.conj()).norm(), r.re.abs()] })
}

/// Residue-free check at each finite end: periods of ω around a circle of the given radius.
pub fn end_periods(data: &WeierstrassData, radius: f64) -> Result<Vec<PeriodReport>> {
    data.divisor()
        .finite()
        .iter()
        .map(|&e| period_vector(data, &QuadraturePath::circle(e, radius).with_samples(32)))
        .collect()
}

/// Unit normal (2g, |g|² − 1)/(|g|² + 1) with g = s₂/s₁; (0, 0, 1) where s₁ = 0.
pub fn gauss_map(data: &WeierstrassData, u: C64) -> Result<[f64; 3]> {
    let (a, b) = (data.s1.value(u), data.s2.value(u));
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Pole(format!("section pole at {u}")));
    }
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        return Err(Error::InvalidInput(format!("branch point at {u}: s1 = s2 = 0")));
    }
    if a.norm() <= 1e-14 * scale {
        return Ok([0.0, 0.0, 1.0]);
    }
    Ok(normal_from_g(b / a))
}

pub fn normal_from_g(g: C64) -> [f64; 3] {
    let m = g.norm_sqr();
    if !m.is_finite() {
        return [0.0, 0.0, 1.0];
    }
    let d = m + 1.0;
    [2.0 * g.re / d, 2.0 * g.im / d, (m - 1.0) / d]
}

/// |ω·ω| relative to |ω|² at each probe; zero for any spinor pair.
pub fn null_curve_residual(data: &WeierstrassData, probes: &[C64]) -> f64 {
    probes
        .iter()
        .map(|&u| {
            let w = data.omega(u);
            let dot = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
            let size: f64 = w.iter().map(|x| x.norm_sqr()).sum();
            if size == 0.0 {
                0.0
            } else {
                dot.norm() / size
            }
        })
        .fold(0.0, f64::max)
}

/// Outcome of a branch-point scan.
#[derive(Clone, Debug, Serialize)]
pub struct BranchScan {
    pub points: Vec<C64>,
    pub grid: GridSpec,
    /// Number of local minima of |s₁|² + |s₂|² that were refined.
    pub candidates: usize,
}

/// s_k²/du at u as the mean over a small circle. s_k²/du is holomorphic off the
/// ends, so this is exact to O(ρ⁸) and stays finite where the chart factor
/// φ has a zero or pole that s/φ compensates.
fn q_of(s: &SpinorSection, u: C64, rho: f64) -> C64 {
    (0..8)
        .map(|k| s.square_density(u + C64::from_polar(rho, std::f64::consts::PI * (k as f64 + 0.5) / 4.0)))
        .sum::<C64>()
        / 8.0
}

/// Scans |s₁|² + |s₂|² (as |s_k²/du|) on the grid, refines local minima below
/// the median by Newton iteration on each s_k²/du (double zeros, so the step
/// is doubled), and reports points where both vanish.
pub fn branch_points(data: &WeierstrassData, grid: GridSpec) -> Result<BranchScan> {
    grid.validate()?;
    let n = grid.n;
    let side = n + 1;
    let step = (grid.e1.norm() + grid.e2.norm()) / (2.0 * n as f64);
    let rho = 1e-3 * step;
    let h: Vec<f64> = (0..side * side)
        .map(|k| {
            let u = grid.point(k % side, k / side);
            if data.end_distance(u) <= data.end_clearance {
                f64::NAN
            } else {
                q_of(&data.s1, u, rho).norm() + q_of(&data.s2, u, rho).norm()
            }
        })
        .collect();
    let mut finite: Vec<f64> = h.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Ok(BranchScan { points: Vec::new(), grid, candidates: 0 });
    }
    finite.sort_by(f64::total_cmp);
    let median = finite[finite.len() / 2].max(1e-300);
    let mut points: Vec<C64> = Vec::new();
    let mut candidates = 0;
    for j in 0..side {
        for i in 0..side {
            let v = h[j * side + i];
            if !v.is_finite() || v > median {
                continue;
            }
            let is_min = (-1i64..=1).all(|dj| {
                (-1i64..=1).all(|di| {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= side as i64 || jj >= side as i64 {
                        return true;
                    }
                    let w = h[jj as usize * side + ii as usize];
                    !w.is_finite() || w >= v
                })
            });
            if !is_min {
                continue;
            }
            candidates += 1;
            let seed = grid.point(i, j);
            for s in [&data.s1, &data.s2] {
                let Some(z) = newton_double_zero(s, seed, step, rho) else { continue };
                let other = q_of(&data.s1, z, rho).norm() + q_of(&data.s2, z, rho).norm();
                if other <= 1e-10 * median && !points.iter().any(|p| (p - z).norm() < 1e-6 * step.max(1e-300)) {
                    points.push(z);
                }
            }
        }
    }
    Ok(BranchScan { points, grid, candidates })
}

fn newton_double_zero(s: &SpinorSection, seed: C64, step: f64, rho: f64) -> Option<C64> {
    let mut u = seed;
    let f0 = q_of(s, u, rho).norm();
    for _ in 0..60 {
        let f = q_of(s, u, rho);
        if f.norm() <= 1e-14 * f0 {
            return Some(u);
        }
        let h = 1e-6 * step.max(1e-3);
        let d = (q_of(s, u + h, rho) - q_of(s, u - h, rho)) / (2.0 * h);
        let du = 2.0 * f / d;
        if !du.is_finite() {
            return None;
        }
        u -= du;
        if (u - seed).norm() > 2.0 * step {
            return None;
        }
        if du.norm() < 1e-13 * (1.0 + u.norm()) {
            return Some(u);
        }
    }
    None
}

/// −∫ 4|g′|²/(1 + |g|²)² over the annulus e^{t_min} ≤ |w − center| ≤ e^{t_max}, the total
/// curvature of a surface with Gauss map g on that region. g′ by central differences.
pub fn total_curvature_annulus(g: &(dyn Fn(C64) -> C64 + Sync), center: C64, t_min: f64, t_max: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(24);
    let panels = ((t_max - t_min) * 8.0).ceil().max(1.0) as usize;
    let n_theta = 512;
    let dt = (t_max - t_min) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let t0 = t_min + p as f64 * dt;
        for (x, wt) in nodes.iter().zip(&weights) {
            let t = t0 + 0.5 * dt * (x + 1.0);
            let rho = t.exp();
            let mut ring = 0.0;
            for k in 0..n_theta {
                let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_theta as f64;
                let w = center + C64::from_polar(rho, th);
                let h = 1e-5 * rho;
                let dg = (g(w + h) - g(w - h)) / (2.0 * h);
                let gv = g(w);
                let dens = if gv.norm() > 1e8 {
                    // 4|g′|²/(1+|g|²)² ≈ 4|g′|²/|g|⁴ near a pole
                    4.0 * dg.norm_sqr() / gv.norm_sqr().powi(2)
                } else {
                    4.0 * dg.norm_sqr() / (1.0 + gv.norm_sqr()).powi(2)
                };
                ring += dens * rho * rho;
            }
            total += 0.5 * dt * wt * ring * 2.0 * std::f64::consts::PI / n_theta as f64;
        }
    }
    -total
}

/// Relative best-fit-plane residuals √(λ_min/λ_max) of X on circles of the given
/// radii around `end`, where λ are the eigenvalues of the point covariance.
pub fn planar_end_fit(data: &WeierstrassData, end: C64, radii: &[f64], samples: usize) -> Result<Vec<f64>> {
    radii
        .iter()
        .map(|&rho| {
            let mut pts = Vec::with_capacity(samples);
            let mut x = [0.0; 3];
            for k in 0..samples {
                pts.push(x);
                x = add3(x, re3(integrate_arc(data, end, rho, k, samples)));
            }
            Ok(plane_residual(&pts))
        })
        .collect()
}

fn integrate_arc(data: &WeierstrassData, center: C64, rho: f64, k: usize, samples: usize) -> [C64; 3] {
    let (nodes, weights) = gauss_legendre(16);
    let a0 = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
    let da = 2.0 * std::f64::consts::PI / samples as f64;
    let mut out = [c64(0.0, 0.0); 3];
    for (x, w) in nodes.iter().zip(&weights) {
        let a = a0 + 0.5 * da * (x + 1.0);
        let e = C64::from_polar(rho, a);
        let dz = crate::I * e * (0.5 * da * w);
        let om = data.omega(center + e);
        for k in 0..3 {
            out[k] += om[k] * dz;
        }
    }
    out
}

fn plane_residual(pts: &[[f64; 3]]) -> f64 {
    let n = pts.len() as f64;
    let mut c = [0.0; 3];
    for p in pts {
        for k in 0..3 {
            c[k] += p[k] / n;
        }
    }
    let mut m = [[0.0; 3]; 3];
    for p in pts {
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += (p[a] - c[a]) * (p[b] - c[b]) / n;
            }
        }
    }
    let ev = sym3_eigenvalues(m);
    if ev[2] <= 0.0 {
        return 0.0;
    }
    (ev[0].max(0.0) / ev[2]).sqrt()
}

/// Eigenvalues of a symmetric 3×3 matrix in ascending order (trigonometric method).
fn sym3_eigenvalues(m: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b: Vec<Vec<f64>> =
        (0..3).map(|i| (0..3).map(|j| (m[i][j] - if i == j { q } else { 0.0 }) / p).collect()).collect();
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let phi = (det_b / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let l2 = 3.0 * q - l1 - l3;
    let mut e = [l1, l2, l3];
    e.sort_by(f64::total_cmp);
    e
}

#[cfg(test)]
mod tests;
