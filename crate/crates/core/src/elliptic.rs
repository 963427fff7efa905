//! Weierstrass elliptic functions on a lattice 2ω₁ℤ + 2ω₃ℤ.
//!
//! Evaluation goes through Jacobi theta series in a reduced basis of the same
//! lattice (|τ′| ≥ 1, |Re τ′| ≤ ½), so the classical nome e^{iπτ′} has modulus
//! at most e^{−π√3/2} whatever generators the caller supplies. Arguments are
//! reduced to the central period parallelogram before the series are summed.
//!
//! Half-periods are labelled ω₁, ω₂ = ω₁ + ω₃, ω₃ with eᵢ = ℘(ωᵢ).

use crate::{Error, Result, C64, I};
use serde::Serialize;
use std::f64::consts::PI;

/// Lattice generated by 2ω₁ and 2ω₃ with Im(ω₃/ω₁) > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lattice {
    pub omega1: C64,
    pub omega3: C64,
    pub tau: C64,
    /// e^{2πiτ}.
    pub nome_q: C64,
}

impl Lattice {
    /// Generators are ℝ-independent half-periods. If Im(ω₃/ω₁) < 0, ω₃ is
    /// negated; the lattice is unchanged.
    pub fn new(omega1: C64, omega3: C64) -> Result<Self> {
        if !(omega1.is_finite() && omega3.is_finite()) || omega1.norm() == 0.0 || omega3.norm() == 0.0 {
            return Err(Error::DegenerateLattice);
        }
        let mut tau = omega3 / omega1;
        if tau.im.abs() < 1e-12 * tau.norm() {
            return Err(Error::DegenerateLattice);
        }
        let omega3 = if tau.im < 0.0 {
            tau = -tau;
            -omega3
        } else {
            omega3
        };
        let nome_q = (2.0 * PI * I * tau).exp();
        Ok(Lattice { omega1, omega3, tau, nome_q })
    }

    /// Real coordinates (x, y) with u = 2xω₁ + 2yω₃.
    pub fn coords(&self, u: C64) -> (f64, f64) {
        let (a, b) = (2.0 * self.omega1, 2.0 * self.omega3);
        let det = a.re * b.im - a.im * b.re;
        ((u.re * b.im - u.im * b.re) / det, (a.re * u.im - a.im * u.re) / det)
    }

    /// Representative of u in the parallelogram {2xω₁ + 2yω₃ : x, y ∈ [0, 1)}.
    pub fn wrap(&self, u: C64) -> C64 {
        let (x, y) = self.coords(u);
        u - 2.0 * x.floor() * self.omega1 - 2.0 * y.floor() * self.omega3
    }

    /// Distance from u to the nearest lattice point.
    pub fn lattice_distance(&self, u: C64) -> f64 {
        let (x, y) = self.coords(u);
        let (m, n) = (x.round(), y.round());
        let mut best = f64::INFINITY;
        for dm in -1..=1 {
            for dn in -1..=1 {
                let w = 2.0 * (m + dm as f64) * self.omega1 + 2.0 * (n + dn as f64) * self.omega3;
                best = best.min((u - w).norm());
            }
        }
        best
    }

    /// True when u − v lies on the lattice (to the given absolute tolerance).
    pub fn congruent(&self, u: C64, v: C64, tol: f64) -> bool {
        self.lattice_distance(u - v) <= tol
    }
}

/// Nome convention of the q-series for g₂, η₁ and e₁.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NomeConvention {
    /// q = e^{2πiτ}.
    Full,
    /// q = e^{iπτ}.
    Classical,
}

/// Outcome of the build-time cross-checks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConventionCheck {
    pub convention: NomeConvention,
    /// |g₂(series) − g₂(lattice sum)| / |g₂|.
    pub g2_lattice_rel_err: f64,
    /// |η₁(series) − η₁(theta)| / |η₁|, reduced basis.
    pub eta1_theta_rel_err: f64,
    /// |e₁(series) − ℘(ω₁)| / |e₁|, reduced basis.
    pub e1_series_rel_err: f64,
    /// |η₁ω₃ − η₃ω₁ − iπ/2| with η₃ = ζ(ω₃) from theta, reduced basis.
    pub legendre_theta_residual: f64,
    /// ℘-ODE residual at a fixed probe, relative to the term scale.
    pub ode_rel_residual: f64,
}

#[derive(Clone, Copy, Debug)]
struct Reduced {
    o1: C64,
    o3: C64,
    tau: C64,
    c: C64,
    th2: C64,
    th3: C64,
    th4: C64,
    e1: C64,
    h1: C64,
    h3: C64,
}

/// Lattice with its invariants and evaluators for ℘, ℘′, ζ.
#[derive(Clone, Debug)]
pub struct EllipticContext {
    pub lattice: Lattice,
    pub g2: C64,
    pub g3: C64,
    pub e1: C64,
    pub e2: C64,
    pub e3: C64,
    pub eta1: C64,
    pub eta3: C64,
    pub check: ConventionCheck,
    red: Reduced,
}

struct Thetas {
    t1: C64,
    t1p: C64,
    t2: C64,
    t3: C64,
    t4: C64,
}

const SERIES_EPS: f64 = 1e-18;

fn thetas(tau: C64, v: C64) -> Thetas {
    // Nome powers by their successive ratios and the multiples kv by the
    // Chebyshev recurrence f((k+2)v) = 2cos(2v)·f(kv) − f((k−2)v).
    let q = (I * PI * tau).exp();
    let q2 = q * q;
    let one = C64::new(1.0, 0.0);
    let (sv, cv) = (v.sin(), v.cos());
    let c2v = one - 2.0 * sv * sv;
    let (mut sk, mut sk_prev) = (sv, -sv);
    let (mut ck, mut ck_prev) = (cv, cv);
    let (mut cn, mut cn_prev) = (c2v, one);
    let mut half = (I * PI * tau * 0.25).exp();
    let mut half_step = q2;
    let mut full = q;
    let mut full_step = q2 * q;
    let mut t1 = C64::new(0.0, 0.0);
    let mut t1p = C64::new(0.0, 0.0);
    let mut t2 = C64::new(0.0, 0.0);
    let mut t3 = one;
    let mut t4 = one;
    for n in 0..200 {
        let k = 2.0 * n as f64 + 1.0;
        let sgn = if n % 2 == 0 { 1.0 } else { -1.0 };
        t1 += 2.0 * sgn * half * sk;
        t1p += 2.0 * sgn * half * k * ck;
        t2 += 2.0 * half * ck;
        let mut tail = (half * ck).norm();
        if n >= 1 {
            let f = full * cn;
            t3 += 2.0 * f;
            t4 += 2.0 * sgn * f;
            tail = tail.max(f.norm());
            full *= full_step;
            full_step *= q2;
            (cn, cn_prev) = (2.0 * c2v * cn - cn_prev, cn);
        }
        if n >= 2 && tail < SERIES_EPS * (t3.norm() + t1.norm() + t2.norm()) {
            break;
        }
        half *= half_step;
        half_step *= q2;
        (sk, sk_prev) = (2.0 * c2v * sk - sk_prev, sk);
        (ck, ck_prev) = (2.0 * c2v * ck - ck_prev, ck);
    }
    Thetas { t1, t1p, t2, t3, t4 }
}

/// θ₁‴(0)/θ₁′(0) for the nome e^{iπτ}.
fn theta1_ratio(tau: C64) -> C64 {
    let mut d1 = C64::new(0.0, 0.0);
    let mut d3 = C64::new(0.0, 0.0);
    for n in 0..200 {
        let nf = n as f64;
        let k = 2.0 * nf + 1.0;
        let sgn = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sgn * (I * PI * tau * (nf + 0.5) * (nf + 0.5)).exp();
        d1 += term * k;
        d3 -= term * k * k * k;
        if n >= 2 && (term * k * k * k).norm() < SERIES_EPS * d3.norm() {
            break;
        }
    }
    d3 / d1
}

fn divisor_sum(n: u64, odd_only: bool, power: u32) -> f64 {
    (1..=n).filter(|d| n % d == 0 && (!odd_only || d % 2 == 1)).map(|d| (d as f64).powi(power as i32)).sum()
}

/// Σ_{n≥1} a(n) qⁿ until the terms fall below 1e-18 relative.
fn q_series(q: C64, a: impl Fn(u64) -> f64) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    let mut qn = C64::new(1.0, 0.0);
    for n in 1..400u64 {
        qn *= q;
        let term = qn * a(n);
        sum += term;
        if term.norm() < SERIES_EPS * (1.0 + sum.norm()) && qn.norm() < SERIES_EPS {
            break;
        }
    }
    sum
}

/// g₂ = π⁴/(12ω₁⁴)(1 + 240 Σ σ₃(n)qⁿ).
pub fn g2_series(omega1: C64, q: C64) -> C64 {
    PI.powi(4) / (12.0 * omega1.powi(4)) * (1.0 + 240.0 * q_series(q, |n| divisor_sum(n, false, 3)))
}

/// η₁ = π²/(12ω₁)(1 − 24 Σ σ₁(n)qⁿ).
pub fn eta1_series(omega1: C64, q: C64) -> C64 {
    PI * PI / (12.0 * omega1) * (1.0 - 24.0 * q_series(q, |n| divisor_sum(n, false, 1)))
}

/// e₁ = π²/(6ω₁²)(1 + 24 Σ τ(n)qⁿ), τ(n) the sum of the odd divisors of n.
pub fn e1_series(omega1: C64, q: C64) -> C64 {
    PI * PI / (6.0 * omega1 * omega1) * (1.0 + 24.0 * q_series(q, |n| divisor_sum(n, true, 1)))
}

/// 60 Σ′ w⁻⁴ summed row by row: each row w = 2ω₁(m + nτ), m ∈ ℤ, is
/// summed exactly with Σₘ (z+m)⁻⁴ = (π⁴/3)csc²(πz)(3csc²(πz) − 2), and rows
/// are added until they fall below 1e-18 relative. Generators should be
/// reduced so that Im τ is not small.
pub fn g2_lattice_sum(omega1: C64, omega3: C64) -> C64 {
    let tau = omega3 / omega1;
    let row = |z: C64| {
        let csc2 = (PI * z).sin().powi(2).inv();
        PI.powi(4) / 3.0 * csc2 * (3.0 * csc2 - 2.0)
    };
    // n = 0 row: 2ζ(4) = π⁴/45.
    let mut s = C64::new(PI.powi(4) / 45.0, 0.0);
    for n in 1..10_000 {
        let z = n as f64 * tau;
        let r = row(z) + row(-z);
        if !r.is_finite() {
            break;
        }
        s += r;
        if r.norm() < SERIES_EPS * s.norm() {
            break;
        }
    }
    60.0 * s / (2.0 * omega1).powi(4)
}

fn reduce_basis(omega1: C64, omega3: C64) -> (C64, C64, [[i64; 2]; 2]) {
    let (mut o1, mut o3) = (omega1, omega3);
    let mut t = [[1i64, 0], [0, 1]];
    for _ in 0..200 {
        let n = (o3 / o1).re.round();
        if n != 0.0 {
            o3 -= n * o1;
            let ni = n as i64;
            // t ← t·[[1,0],[n,1]]
            for row in t.iter_mut() {
                row[0] += ni * row[1];
            }
        }
        if (o3 / o1).norm() < 1.0 - 1e-15 {
            let (a, b) = (o3, -o1);
            o1 = a;
            o3 = b;
            // t ← t·[[0,−1],[1,0]]
            for row in t.iter_mut() {
                let (x, y) = (row[0], row[1]);
                row[0] = y;
                row[1] = -x;
            }
        } else {
            break;
        }
    }
    (o1, o3, t)
}

/// Builds the context for half-periods ω₁, ω₃.
pub fn build_context(omega1: C64, omega3: C64) -> Result<EllipticContext> {
    let lattice = Lattice::new(omega1, omega3)?;
    let (o1, o3, t) = reduce_basis(lattice.omega1, lattice.omega3);
    let tau = o3 / o1;
    let q = (I * PI * tau).exp();
    let c = PI / (2.0 * o1);
    let z = thetas(tau, C64::new(0.0, 0.0));
    let (th2, th3, th4) = (z.t2, z.t3, z.t4);
    let e1r = c * c / 3.0 * (th3.powi(4) + th4.powi(4));
    let h1_theta = -(PI * PI / (12.0 * o1)) * theta1_ratio(tau);
    let mut red = Reduced { o1, o3, tau, c, th2, th3, th4, e1: e1r, h1: h1_theta, h3: C64::new(0.0, 0.0) };
    red.h3 = (red.h1 * o3 - I * PI / 2.0) / o1;

    // Reference values that do not depend on the series.
    let g2_sum = g2_lattice_sum(o1, o3);
    let probe_h3 = {
        let v = c * o3;
        let th = thetas(tau, v);
        red.h1 * o3 / o1 + c * th.t1p / th.t1
    };
    let legendre_theta_residual = (red.h1 * o3 - probe_h3 * o1 - I * PI / 2.0).norm();

    let try_convention = |conv: NomeConvention| {
        let qq = match conv {
            NomeConvention::Full => (2.0 * PI * I * tau).exp(),
            NomeConvention::Classical => q,
        };
        let g2 = g2_series(o1, qq);
        let eta1 = eta1_series(o1, qq);
        let e1 = e1_series(o1, qq);
        let rel = |a: C64, b: C64| (a - b).norm() / b.norm().max(1e-300);
        (g2, eta1, rel(g2, g2_sum), rel(eta1, h1_theta), rel(e1, e1r))
    };
    let (conv, (g2_red, h1, g2_err, eta_err, e1_err)) = {
        let full = try_convention(NomeConvention::Full);
        if full.2 <= 1e-6 && full.3 <= 1e-10 {
            (NomeConvention::Full, full)
        } else {
            let classical = try_convention(NomeConvention::Classical);
            if classical.2 <= 1e-6 && classical.3 <= 1e-10 {
                (NomeConvention::Classical, classical)
            } else {
                return Err(Error::Convention { full: full.2.max(full.3), classical: classical.2.max(classical.3) });
            }
        }
    };
    red.h1 = h1;
    red.h3 = (h1 * o3 - I * PI / 2.0) / o1;

    let mut ctx = EllipticContext {
        lattice,
        g2: g2_red,
        g3: C64::new(0.0, 0.0),
        e1: C64::new(0.0, 0.0),
        e2: C64::new(0.0, 0.0),
        e3: C64::new(0.0, 0.0),
        eta1: C64::new(0.0, 0.0),
        eta3: C64::new(0.0, 0.0),
        check: ConventionCheck {
            convention: conv,
            g2_lattice_rel_err: g2_err,
            eta1_theta_rel_err: eta_err,
            e1_series_rel_err: e1_err,
            legendre_theta_residual,
            ode_rel_residual: 0.0,
        },
        red,
    };
    ctx.e1 = ctx.wp_unchecked(lattice.omega1);
    ctx.e2 = ctx.wp_unchecked(lattice.omega1 + lattice.omega3);
    ctx.e3 = ctx.wp_unchecked(lattice.omega3);
    ctx.g3 = 4.0 * ctx.e1 * ctx.e2 * ctx.e3;
    ctx.eta1 = t[0][0] as f64 * red.h1 + t[0][1] as f64 * red.h3;
    ctx.eta3 = (ctx.eta1 * lattice.omega3 - I * PI / 2.0) / lattice.omega1;
    let probe = lattice.omega1 * C64::new(0.37, 0.0) + lattice.omega3 * C64::new(0.21, 0.0);
    ctx.check.ode_rel_residual = ctx.ode_residual(probe);
    if ctx.check.ode_rel_residual > 1e-8 {
        return Err(Error::Verification(format!("℘-ODE residual {:e} at build", ctx.check.ode_rel_residual)));
    }
    Ok(ctx)
}

impl EllipticContext {
    pub fn omega1(&self) -> C64 {
        self.lattice.omega1
    }

    pub fn omega3(&self) -> C64 {
        self.lattice.omega3
    }

    /// ω₂ = ω₁ + ω₃.
    pub fn omega2(&self) -> C64 {
        self.lattice.omega1 + self.lattice.omega3
    }

    /// Half-period ω_r for r ∈ {1, 2, 3}.
    pub fn half_period(&self, r: usize) -> C64 {
        match r {
            1 => self.omega1(),
            2 => self.omega2(),
            3 => self.omega3(),
            _ => panic!("half-period index must be 1, 2 or 3"),
        }
    }

    /// e_r for r ∈ {1, 2, 3}.
    pub fn e(&self, r: usize) -> C64 {
        match r {
            1 => self.e1,
            2 => self.e2,
            3 => self.e3,
            _ => panic!("half-period index must be 1, 2 or 3"),
        }
    }

    /// ζ(ω_r), with η₂ = η₁ + η₃ for ω₂ = ω₁ + ω₃.
    pub fn eta(&self, r: usize) -> C64 {
        match r {
            1 => self.eta1,
            2 => self.eta1 + self.eta3,
            3 => self.eta3,
            _ => panic!("half-period index must be 1, 2 or 3"),
        }
    }

    /// Splits u = u₀ + 2mΩ₁ + 2kΩ₃ with u₀ central in the reduced basis.
    fn reduce(&self, u: C64) -> (C64, f64, f64) {
        let (a, b) = (2.0 * self.red.o1, 2.0 * self.red.o3);
        let det = a.re * b.im - a.im * b.re;
        let x = (u.re * b.im - u.im * b.re) / det;
        let y = (a.re * u.im - a.im * u.re) / det;
        let (m, k) = (x.round(), y.round());
        (u - m * a - k * b, m, k)
    }

    fn check_pole(&self, u: C64, what: &str) -> Result<()> {
        if self.lattice.lattice_distance(u) < 1e-12 * self.red.o1.norm().max(1.0) {
            return Err(Error::Pole(format!("{what} at {u} (lattice point)")));
        }
        Ok(())
    }

    /// ℘(u); errors within 1e-12 of a lattice point.
    pub fn wp(&self, u: C64) -> Result<C64> {
        self.check_pole(u, "℘")?;
        Ok(self.wp_unchecked(u))
    }

    /// ℘′(u); errors within 1e-12 of a lattice point.
    pub fn wp_prime(&self, u: C64) -> Result<C64> {
        self.check_pole(u, "℘′")?;
        Ok(self.wp_prime_unchecked(u))
    }

    /// ζ(u); errors within 1e-12 of a lattice point.
    pub fn zeta(&self, u: C64) -> Result<C64> {
        self.check_pole(u, "ζ")?;
        Ok(self.zeta_unchecked(u))
    }

    /// ℘(u) without the pole check (non-finite at lattice points).
    pub fn wp_unchecked(&self, u: C64) -> C64 {
        let (u0, _, _) = self.reduce(u);
        let r = &self.red;
        let th = thetas(r.tau, r.c * u0);
        let s = r.c * r.th3 * r.th4 * th.t2 / th.t1;
        r.e1 + s * s
    }

    pub fn wp_prime_unchecked(&self, u: C64) -> C64 {
        let (u0, _, _) = self.reduce(u);
        let r = &self.red;
        let th = thetas(r.tau, r.c * u0);
        let k = r.th2 * r.th3 * r.th4;
        -2.0 * r.c.powi(3) * th.t2 * th.t3 * th.t4 * k * k / th.t1.powi(3)
    }

    pub fn zeta_unchecked(&self, u: C64) -> C64 {
        let (u0, m, k) = self.reduce(u);
        let r = &self.red;
        let th = thetas(r.tau, r.c * u0);
        r.h1 * u0 / r.o1 + r.c * th.t1p / th.t1 + 2.0 * m * r.h1 + 2.0 * k * r.h3
    }

    /// ℘″ = 6℘² − g₂/2.
    pub fn wp_second(&self, u: C64) -> C64 {
        let p = self.wp_unchecked(u);
        6.0 * p * p - self.g2 / 2.0
    }

    /// |℘′² − (4℘³ − g₂℘ − g₃)| relative to the size of the terms.
    pub fn ode_residual(&self, u: C64) -> f64 {
        let p = self.wp_unchecked(u);
        let dp = self.wp_prime_unchecked(u);
        let lhs = dp * dp;
        let rhs = 4.0 * p * p * p - self.g2 * p - self.g3;
        let scale = lhs.norm() + 4.0 * p.norm().powi(3) + (self.g2 * p).norm() + self.g3.norm();
        (lhs - rhs).norm() / scale.max(1e-300)
    }

    /// |η₁ω₃ − η₃ω₁ − iπ/2|.
    pub fn legendre_residual(&self) -> f64 {
        (self.eta1 * self.omega3() - self.eta3 * self.omega1() - I * PI / 2.0).norm()
    }

    /// Newton solve of ℘(u) = w from `seed`.
    pub fn wp_inverse(&self, w: C64, seed: C64) -> Result<C64> {
        let mut u = seed;
        for _ in 0..100 {
            let f = self.wp_unchecked(u) - w;
            let d = self.wp_prime_unchecked(u);
            let step = f / d;
            if !step.is_finite() {
                break;
            }
            u -= step;
            if step.norm() < 1e-15 * (1.0 + u.norm()) {
                return Ok(u);
            }
        }
        let res = (self.wp_unchecked(u) - w).norm();
        if res < 1e-10 * (1.0 + w.norm()) {
            Ok(u)
        } else {
            Err(Error::NoConvergence(format!("℘(u) = {w} from seed {seed}: residual {res:e}")))
        }
    }
}

/// ½(℘′(u) + ℘′(v))/(℘(u) − ℘(v)), which equals ζ(u−v) − ζ(u) + ζ(v).
pub fn zeta_quasi_addition(ctx: &EllipticContext, u: C64, v: C64) -> Result<C64> {
    let pu = ctx.wp(u)?;
    let pv = ctx.wp(v)?;
    ctx.check_pole(u - v, "ζ(u−v)")?;
    let d = pu - pv;
    if d.norm() <= 1e-13 * (pu.norm() + pv.norm()) {
        return Err(Error::InvalidInput(format!("℘(u) = ℘(v) for u = {u}, v = {v}")));
    }
    Ok(0.5 * (ctx.wp_prime_unchecked(u) + ctx.wp_prime_unchecked(v)) / d)
}

/// Σ aᵢ ℘(u − aᵢ) at the probe, for second-order residue-free poles
/// given as (location, coefficient).
pub fn principal_part_reconstruct(ctx: &EllipticContext, poles: &[(C64, C64)], probe: C64) -> C64 {
    poles.iter().map(|&(a, coef)| coef * ctx.wp_unchecked(probe - a)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn square() -> EllipticContext {
        build_context(c64(1.0, 0.0), c64(0.0, 1.0)).unwrap()
    }

    #[test]
    fn square_lattice_half_period_values() {
        let ctx = square();
        assert!(ctx.e2.norm() < 1e-12);
        assert!((ctx.e3 + ctx.e1).norm() < 1e-12);
        assert!(ctx.legendre_residual() < 1e-12);
        assert_eq!(ctx.check.convention, NomeConvention::Full);
    }

    #[test]
    fn invariants_from_roots() {
        let ctx = build_context(c64(0.8, 0.1), c64(0.3, 1.7)).unwrap();
        assert!((ctx.e1 + ctx.e2 + ctx.e3).norm() < 1e-10);
        let g2 = -4.0 * (ctx.e1 * ctx.e2 + ctx.e1 * ctx.e3 + ctx.e2 * ctx.e3);
        assert!((g2 - ctx.g2).norm() < 1e-10 * ctx.g2.norm().max(1.0));
        assert!(ctx.legendre_residual() < 1e-10);
    }

    #[test]
    fn laurent_expansion_near_zero() {
        let ctx = square();
        let u = c64(0.05, 0.03);
        let approx = 1.0 / (u * u) + ctx.g2 / 20.0 * u * u;
        assert!((ctx.wp(u).unwrap() - approx).norm() < 1e-8 * approx.norm());
        let z = 1.0 / u - ctx.g2 / 60.0 * u.powi(3);
        assert!((ctx.zeta(u).unwrap() - z).norm() < 1e-8 * z.norm());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let ctx = build_context(c64(1.0, 0.0), c64(0.4, 0.9)).unwrap();
        let u = c64(0.31, 0.47);
        let h = 1e-5;
        let fd = (ctx.wp_unchecked(u + h) - ctx.wp_unchecked(u - h)) / (2.0 * h);
        assert!((fd - ctx.wp_prime_unchecked(u)).norm() < 1e-6 * fd.norm());
        let fz = (ctx.zeta_unchecked(u + h) - ctx.zeta_unchecked(u - h)) / (2.0 * h);
        assert!((fz + ctx.wp_unchecked(u)).norm() < 1e-6 * fz.norm());
    }

    #[test]
    fn quasi_periodicity_of_zeta() {
        let ctx = build_context(c64(1.0, 0.2), c64(-0.3, 1.4)).unwrap();
        let u = c64(0.2, 0.1);
        let shifted = ctx.zeta_unchecked(u + 2.0 * ctx.omega1());
        assert!((shifted - ctx.zeta_unchecked(u) - 2.0 * ctx.eta1).norm() < 1e-10);
        let shifted = ctx.zeta_unchecked(u + 2.0 * ctx.omega3());
        assert!((shifted - ctx.zeta_unchecked(u) - 2.0 * ctx.eta3).norm() < 1e-10);
    }

    #[test]
    fn half_period_translation() {
        let ctx = build_context(c64(1.0, 0.0), c64(0.0, 1.6)).unwrap();
        let u = c64(0.3, 0.2);
        let lhs = ctx.wp_unchecked(u - ctx.omega1());
        let rhs = ctx.e1 + (ctx.e1 - ctx.e2) * (ctx.e1 - ctx.e3) / (ctx.wp_unchecked(u) - ctx.e1);
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm());
        assert!(ctx.wp_prime_unchecked(ctx.omega1()).norm() < 1e-10);
    }

    #[test]
    fn quasi_addition_identity() {
        let ctx = square();
        let (u, v) = (c64(0.3, 0.45), c64(-0.6, 0.2));
        let lhs = zeta_quasi_addition(&ctx, u, v).unwrap();
        let rhs = ctx.zeta_unchecked(u - v) - ctx.zeta_unchecked(u) + ctx.zeta_unchecked(v);
        assert!((lhs - rhs).norm() < 1e-9);
        assert!(zeta_quasi_addition(&ctx, u, -u).is_err());
    }

    #[test]
    fn pole_is_reported() {
        let ctx = square();
        assert!(matches!(ctx.wp(2.0 * ctx.omega3()), Err(Error::Pole(_))));
    }

    #[test]
    fn orientation_and_degeneracy() {
        assert!(Lattice::new(c64(1.0, 0.0), c64(2.0, 0.0)).is_err());
        let l = Lattice::new(c64(1.0, 0.0), c64(0.0, -1.0)).unwrap();
        assert!(l.tau.im > 0.0);
    }

    #[test]
    fn reduction_handles_skewed_generators() {
        // Same lattice as the square one, given through a long thin basis.
        let a = build_context(c64(1.0, 0.0), c64(0.0, 1.0)).unwrap();
        let b = build_context(c64(1.0, 0.0), c64(5.0, 1.0)).unwrap();
        assert!((a.g2 - b.g2).norm() < 1e-10);
        let u = c64(0.3, 0.1);
        assert!((a.wp_unchecked(u) - b.wp_unchecked(u)).norm() < 1e-10);
        assert!(b.legendre_residual() < 1e-10);
        // η for ω₃ = 5ω₁ + ω₃′ is 5η₁ + η₃′.
        assert!((b.eta3 - (5.0 * a.eta1 + a.eta3)).norm() < 1e-10);
    }

    #[test]
    fn principal_parts_single_pole() {
        let ctx = square();
        let u = c64(0.4, 0.3);
        let v = principal_part_reconstruct(&ctx, &[(c64(0.0, 0.0), c64(1.0, 0.0))], u);
        assert!((v - ctx.wp_unchecked(u)).norm() < 1e-14);
    }

    #[test]
    fn wp_inverse_roundtrip() {
        let ctx = square();
        let u = c64(0.4, 0.3);
        let w = ctx.wp_unchecked(u);
        let found = ctx.wp_inverse(w, u + c64(0.02, -0.01)).unwrap();
        assert!((ctx.wp_unchecked(found) - w).norm() < 1e-12);
    }

    fn thetas_direct(tau: C64, v: C64) -> [C64; 5] {
        let mut t = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0)];
        for n in 0..40 {
            let nf = n as f64;
            let k = 2.0 * nf + 1.0;
            let half = (I * PI * tau * (nf + 0.5) * (nf + 0.5)).exp();
            let sgn = if n % 2 == 0 { 1.0 } else { -1.0 };
            t[0] += 2.0 * sgn * half * (k * v).sin();
            t[1] += 2.0 * sgn * half * k * (k * v).cos();
            t[2] += 2.0 * half * (k * v).cos();
            if n >= 1 {
                let full = (I * PI * tau * nf * nf).exp() * (2.0 * nf * v).cos();
                t[3] += 2.0 * full;
                t[4] += 2.0 * sgn * full;
            }
        }
        t
    }

    #[test]
    fn theta_recurrence_matches_direct_series() {
        for tau in [c64(0.0, 1.0), c64(0.5, 0.87), c64(-0.3, 1.9), c64(0.1, 0.6)] {
            for v in [c64(1e-4, 2e-5), c64(0.7, -0.2), c64(1.4, 0.9), c64(-0.6, 1.5)] {
                let th = thetas(tau, v);
                let d = thetas_direct(tau, v);
                for (a, b) in [th.t1, th.t1p, th.t2, th.t3, th.t4].into_iter().zip(d) {
                    assert!((a - b).norm() <= 1e-13 * b.norm().max(1e-3), "τ={tau} v={v}: {a} vs {b}");
                }
            }
        }
    }
}
