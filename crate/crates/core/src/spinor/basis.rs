//! Bases of F on the sphere and on the tori, with analytic Laurent tables.

use super::{Domain, EndDivisor, EndPoint, Eval, Laurent, SpinorSection};
use crate::elliptic::EllipticContext;
use crate::numkit::CMatrix;
use crate::{Error, Result, C64, I};
use std::sync::Arc;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// {φ/(z−a₁), …, φ/(z−a_{n−1}), φ} for ends containing ∞; the finite ends
/// keep their order in `points`.
pub fn basis_f_sphere(points: Vec<EndPoint>) -> Result<Vec<SpinorSection>> {
    let div = Arc::new(EndDivisor::sphere(points)?);
    if div.index_of(&EndPoint::Infinity).is_none() {
        return Err(Error::InvalidInput("the sphere basis needs ∞ among the ends".into()));
    }
    let finite = div.finite();
    let mut out = Vec::with_capacity(div.n());
    for (i, &a) in finite.iter().enumerate() {
        let exps = div
            .points
            .iter()
            .map(|p| match *p {
                EndPoint::Infinity => Laurent::new(zero(), I),
                EndPoint::Finite(b) if div.dist(a, b) < 1e-14 => Laurent::new(one(), zero()),
                EndPoint::Finite(b) => Laurent::new(zero(), 1.0 / (b - a)),
            })
            .collect();
        let eval: Eval = Arc::new(move |z| 1.0 / (z - a));
        out.push(SpinorSection::new(Domain::Sphere, format!("φ/(z−a{})", i + 1), div.clone(), exps, eval, None)?);
    }
    let exps = div
        .points
        .iter()
        .map(|p| match p {
            EndPoint::Infinity => Laurent::new(I, zero()),
            EndPoint::Finite(_) => Laurent::new(zero(), one()),
        })
        .collect();
    out.push(SpinorSection::new(Domain::Sphere, "φ", div, exps, Arc::new(|_| one()), None)?);
    Ok(out)
}

/// {φ₀, t₁, …, t_{n−1}} with tᵢ = (ζ(u−aᵢ) − ζ(u) + ζ(aᵢ))φ₀ for ends
/// {0, a₁, …}. H is spanned by φ₀, the first basis vector.
pub fn basis_f_torus_twisted(ctx: Arc<EllipticContext>, points: &[C64]) -> Result<Vec<SpinorSection>> {
    let div = Arc::new(EndDivisor::torus(ctx.lattice, points.to_vec(), Vec::new())?);
    let zero_idx = div
        .index_of(&EndPoint::Finite(zero()))
        .ok_or_else(|| Error::InvalidInput("the twisted torus basis needs 0 among the ends".into()))?;
    let mut out = Vec::with_capacity(div.n());
    let exps = vec![Laurent::new(zero(), one()); div.n()];
    out.push(SpinorSection::new(Domain::TorusTwisted, "φ₀", div.clone(), exps, Arc::new(|_| one()), None)?);
    let mut label = 0;
    for (i, &a) in points.iter().enumerate() {
        if i == zero_idx {
            continue;
        }
        label += 1;
        let za = ctx.zeta(a)?;
        let exps = points
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                if j == zero_idx {
                    // ζ(−a) + ζ(a) = 0
                    Ok(Laurent::new(-one(), zero()))
                } else if j == i {
                    Ok(Laurent::new(one(), zero()))
                } else {
                    Ok(Laurent::new(zero(), ctx.zeta(b - a)? - ctx.zeta(b)? + za))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let c = ctx.clone();
        let eval: Eval = Arc::new(move |u| c.zeta_unchecked(u - a) - c.zeta_unchecked(u) + za);
        out.push(SpinorSection::new(Domain::TorusTwisted, format!("t{label}"), div.clone(), exps, eval, None)?);
    }
    Ok(out)
}

fn untwisted_density(ctx: &Arc<EllipticContext>, r: usize) -> Eval {
    let c = ctx.clone();
    let er = ctx.e(r);
    Arc::new(move |u| 1.0 / (c.wp_unchecked(u) - er))
}

fn check_r(r: usize) -> Result<()> {
    if !(1..=3).contains(&r) {
        return Err(Error::InvalidInput(format!("untwisted index r must be 1, 2 or 3, got {r}")));
    }
    Ok(())
}

/// tᵢ = (ζ(u−aᵢ) − ζ(u) − ζ(ω_r−aᵢ) + ζ(ω_r))φ_r with φ_r² = du/℘_r.
/// Laurent data are taken for tᵢ/√du = fᵢ/√℘_r.
pub fn basis_f_torus_untwisted(ctx: Arc<EllipticContext>, r: usize, points: &[C64]) -> Result<Vec<SpinorSection>> {
    check_r(r)?;
    let wr = ctx.half_period(r);
    let er = ctx.e(r);
    let div = Arc::new(EndDivisor::torus(ctx.lattice, points.to_vec(), vec![zero(), wr])?);
    let density = untwisted_density(&ctx, r);
    let zwr = ctx.zeta(wr)?;
    let mut out = Vec::with_capacity(points.len());
    for (i, &a) in points.iter().enumerate() {
        let shift = -ctx.zeta(wr - a)? + zwr;
        let exps = points
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                let pr = ctx.wp(b)? - er;
                let h0 = 1.0 / pr.sqrt();
                if j == i {
                    // fᵢ = 1/(u−a) + cᵢ + …, (℘_r)^{−1/2} = h₀(1 − ½℘′(a)/℘_r(a)·(u−a) + …)
                    let ci = -ctx.zeta(a)? + shift;
                    let h1 = -0.5 * ctx.wp_prime(a)? / pr * h0;
                    Ok(Laurent::new(h0, ci * h0 + h1))
                } else {
                    let f = ctx.zeta(b - a)? - ctx.zeta(b)? + shift;
                    Ok(Laurent::new(zero(), f * h0))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let c = ctx.clone();
        let eval: Eval = Arc::new(move |u| c.zeta_unchecked(u - a) - c.zeta_unchecked(u) + shift);
        out.push(SpinorSection::new(
            Domain::TorusUntwisted { r },
            format!("t{}", i + 1),
            div.clone(),
            exps,
            eval,
            Some(density.clone()),
        )?);
    }
    Ok(out)
}

/// Paired-end basis on an untwisted torus with ends {a₁, …, a_m, −a₁, …, −a_m}:
/// t̂ᵢ = ℘_r/(℘_r − pᵢ)·φ_r and t̂_{m+i} = ℘′/(℘_r − pᵢ)·φ_r with pᵢ = ℘_r(aᵢ).
#[derive(Clone, Debug)]
pub struct PairedBasis {
    pub sections: Vec<SpinorSection>,
    pub p: Vec<C64>,
    /// c_q = e_q − e_r for the two indices q ≠ r.
    pub c: (C64, C64),
}

/// Expansion of ℘_r/(℘_r − p) and ℘′/(℘_r − p) about a point b, combined with
/// the chart factor ℘_r^{−1/2}. Returns the pair for both families.
fn paired_expansions(ctx: &EllipticContext, r: usize, p: C64, b: C64) -> Result<(Laurent, Laurent)> {
    let er = ctx.e(r);
    let pb = ctx.wp(b)? - er;
    let d = ctx.wp_prime(b)?;
    let h0 = 1.0 / pb.sqrt();
    let h1 = -0.5 * d / pb * h0;
    if (pb - p).norm() <= 1e-10 * (1.0 + p.norm()) {
        let dd = 6.0 * (pb + er) * (pb + er) - ctx.g2 / 2.0;
        // ℘_r/(℘_r − p) = R/(u−b) + c₀ + …
        let (r1, c1) = (p / d, 1.0 - p * dd / (2.0 * d * d));
        // ℘′/(℘_r − p) = 1/(u−b) + ℘″/(2℘′) + …
        let (r2, c2) = (one(), dd / (2.0 * d));
        Ok((Laurent::new(r1 * h0, c1 * h0 + r1 * h1), Laurent::new(r2 * h0, c2 * h0 + r2 * h1)))
    } else {
        Ok((Laurent::new(zero(), pb / (pb - p) * h0), Laurent::new(zero(), d / (pb - p) * h0)))
    }
}

pub fn basis_f_paired(ctx: Arc<EllipticContext>, r: usize, a: &[C64]) -> Result<PairedBasis> {
    check_r(r)?;
    let wr = ctx.half_period(r);
    let er = ctx.e(r);
    let mut points: Vec<C64> = a.to_vec();
    points.extend(a.iter().map(|x| -x));
    let div = Arc::new(EndDivisor::torus(ctx.lattice, points.clone(), vec![zero(), wr])?);
    let density = untwisted_density(&ctx, r);
    let p: Vec<C64> = a.iter().map(|&x| Ok(ctx.wp(x)? - er)).collect::<Result<_>>()?;
    let m = a.len();
    let mut even = Vec::with_capacity(m);
    let mut odd = Vec::with_capacity(m);
    for (i, &pi) in p.iter().enumerate() {
        let mut e1 = Vec::with_capacity(2 * m);
        let mut e2 = Vec::with_capacity(2 * m);
        for &b in &points {
            let (x, y) = paired_expansions(&ctx, r, pi, b)?;
            e1.push(x);
            e2.push(y);
        }
        let c = ctx.clone();
        let f1: Eval = Arc::new(move |u| {
            let w = c.wp_unchecked(u) - er;
            w / (w - pi)
        });
        let c = ctx.clone();
        let f2: Eval = Arc::new(move |u| c.wp_prime_unchecked(u) / (c.wp_unchecked(u) - er - pi));
        let dom = Domain::TorusUntwisted { r };
        even.push(SpinorSection::new(dom, format!("t̂{}", i + 1), div.clone(), e1, f1, Some(density.clone()))?);
        odd.push(SpinorSection::new(dom, format!("t̂{}", m + i + 1), div.clone(), e2, f2, Some(density.clone()))?);
    }
    even.extend(odd);
    let others: Vec<usize> = (1..=3).filter(|&q| q != r).collect();
    let c = (ctx.e(others[0]) - er, ctx.e(others[1]) - er);
    Ok(PairedBasis { sections: even, p, c })
}

impl PairedBasis {
    /// The off-diagonal block W of Ω in closed form:
    /// W_ij = 2/(p_j − p_i) for i ≠ j and
    /// W_ii = −½(p² − c_p c_q)/(p(p − c_p)(p − c_q)).
    pub fn w_closed_form(&self) -> CMatrix {
        let (cp, cq) = self.c;
        let m = self.p.len();
        CMatrix::from_fn(m, m, |i, j| {
            if i == j {
                let p = self.p[i];
                -0.5 * (p * p - cp * cq) / (p * (p - cp) * (p - cq))
            } else {
                2.0 / (self.p[j] - self.p[i])
            }
        })
    }
}
