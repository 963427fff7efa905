//! Tori: the three-ended degeneracy evaluators and the four-ended family
//! with ends at the half-lattice points.

use crate::elliptic::{build_context, EllipticContext};
use crate::numkit::{contour_integral_tol, QuadraturePath};
use crate::par::{map_range, Exec};
use crate::spinor::{
    basis_f_torus_twisted, basis_f_torus_untwisted, extract_k, omega_matrix, OmegaForm, SpinorSection,
};
use crate::{c64, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

const LOOP_TOL: f64 = 1e-12;

/// Closed loop γ_k (k = 1 or 3): the segment c → c + 2ω_k, with the offset c
/// along the other generator chosen to stay as far from the ends as possible.
pub fn torus_loop(ctx: &EllipticContext, k: usize, ends: &[C64]) -> QuadraturePath {
    let (along, across) = match k {
        1 => (ctx.omega1(), ctx.omega3()),
        3 => (ctx.omega3(), ctx.omega1()),
        _ => panic!("loops are indexed by 1 or 3"),
    };
    let clearance = |c: C64| {
        (0..64)
            .map(|t| {
                let u = c + 2.0 * along * (t as f64 / 64.0);
                ends.iter().map(|&e| ctx.lattice.lattice_distance(u - e)).fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let best = (0..40)
        .map(|s| 2.0 * across * ((s as f64 + 0.5) / 40.0))
        .max_by(|a, b| clearance(*a).total_cmp(&clearance(*b)))
        .expect("non-empty candidate set");
    QuadraturePath::segment(best, best + 2.0 * along).with_samples(16)
}

fn loop_integral(ctx: &EllipticContext, k: usize, ends: &[C64], f: impl Fn(C64) -> C64) -> Result<C64> {
    contour_integral_tol(&f, &torus_loop(ctx, k, ends), LOOP_TOL)
}

/// 2×2 complex inverse.
fn inv2(m: [[C64; 2]; 2]) -> Result<[[C64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() < 1e-300 {
        return Err(Error::InvalidInput("singular 2×2 matrix".into()));
    }
    Ok([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn mul2(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

/// B = A⁻¹Ā with A = [[η₁, ω₁], [η₃, ω₃]].
fn period_b(ctx: &EllipticContext) -> Result<[[C64; 2]; 2]> {
    let a = [[ctx.eta1, ctx.omega1()], [ctx.eta3, ctx.omega3()]];
    let abar = [[a[0][0].conj(), a[0][1].conj()], [a[1][0].conj(), a[1][1].conj()]];
    Ok(mul2(inv2(a)?, abar))
}

/// Result of the integral identities for one candidate ε.
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonCheck {
    pub label: String,
    pub epsilon: C64,
    pub q1: C64,
    pub q2: C64,
    /// Worst relative residual of ∫t̂₁² = −6q₁ω_k, ∫t̂₁t̂₂ = −6η_k, ∫t̂₂² = −6q₂ω_k over k = 1, 3.
    pub identity_residual: f64,
    /// |q₁q₂ − g₂/12| relative to |g₂/12|.
    pub q1q2_residual: f64,
}

/// Three ends {0, a₁, a₂} on a twisted torus.
#[derive(Clone, Debug, Serialize)]
pub struct Torus3Report {
    pub a1: C64,
    pub a2: C64,
    pub p1: C64,
    pub p2: C64,
    /// ℘′(a₁) + ℘′(a₂), which vanishes when Ω ≡ 0.
    pub wp_prime_sum: C64,
    /// g₂ − 4(p₁² + p₁p₂ + p₂²).
    pub g2_condition: C64,
    /// max |Ω| over the twisted basis.
    pub omega_max: f64,
    /// Entries (a, b, c, d) of B = A⁻¹Ā.
    pub b: [C64; 4],
    /// −ā − ab²q₁q₂ + ad².
    pub degeneracy: C64,
    pub abs_a: f64,
    pub epsilon_checks: Vec<EpsilonCheck>,
    /// Index into `epsilon_checks` of the ε whose identities hold, if any.
    pub selected: Option<usize>,
}

/// The real candidate ε = (−1+√3)/2 and the cube root of unity (−1+√3i)/2.
fn epsilon_candidates() -> [(String, C64); 2] {
    let s = 3f64.sqrt();
    [
        ("real (-1+sqrt3)/2".to_string(), c64((-1.0 + s) / 2.0, 0.0)),
        ("cube root (-1+sqrt3 i)/2".to_string(), c64(-0.5, s / 2.0)),
    ]
}

/// Evaluates the end-placement condition, the ε identities and the period
/// degeneracy expression for ends {0, a₁, a₂} on the twisted torus.
pub fn torus3_degeneracy(ctx: &Arc<EllipticContext>, a1: C64, a2: C64) -> Result<Torus3Report> {
    for (u, what) in [(a1, "a1"), (a2, "a2"), (a1 + a2, "a1+a2"), (a1 - a2, "a1-a2")] {
        if ctx.lattice.lattice_distance(u) < 1e-8 {
            return Err(Error::InvalidInput(format!("{what} lies on the lattice")));
        }
    }
    let p1 = ctx.wp(a1)?;
    let p2 = ctx.wp(a2)?;
    let wp_prime_sum = ctx.wp_prime(a1)? + ctx.wp_prime(a2)?;
    let g2_condition = ctx.g2 - 4.0 * (p1 * p1 + p1 * p2 + p2 * p2);
    let ends = [c64(0.0, 0.0), a1, a2];
    let basis = basis_f_torus_twisted(ctx.clone(), &ends)?;
    let form = omega_matrix(basis.clone(), vec![vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]])?;
    let omega_max = form.matrix.matrix().max_abs();
    let (t1, t2) = (basis[1].evaluator(), basis[2].evaluator());

    let mut epsilon_checks = Vec::new();
    for (label, eps) in epsilon_candidates() {
        let e2 = eps * eps;
        let q1 = -((eps - e2) * p1 + (eps - 1.0) * p2) / 3.0;
        let q2 = -((e2 - eps) * p1 + (e2 - 1.0) * p2) / 3.0;
        let h1 = |u: C64| t1(u) + eps * t2(u);
        let h2 = |u: C64| t1(u) + e2 * t2(u);
        let mut worst: f64 = 0.0;
        for k in [1, 3] {
            let (w, eta) = (ctx.half_period(k), ctx.eta(k));
            let i11 = loop_integral(ctx, k, &ends, |u| h1(u) * h1(u))?;
            let i12 = loop_integral(ctx, k, &ends, |u| h1(u) * h2(u))?;
            let i22 = loop_integral(ctx, k, &ends, |u| h2(u) * h2(u))?;
            for (got, want) in [(i11, -6.0 * q1 * w), (i12, -6.0 * eta), (i22, -6.0 * q2 * w)] {
                worst = worst.max((got - want).norm() / (1.0 + want.norm()));
            }
        }
        let g12 = ctx.g2 / 12.0;
        let q1q2_residual = (q1 * q2 - g12).norm() / g12.norm().max(1e-300);
        epsilon_checks.push(EpsilonCheck { label, epsilon: eps, q1, q2, identity_residual: worst, q1q2_residual });
    }
    let selected = epsilon_checks
        .iter()
        .enumerate()
        .filter(|(_, c)| c.identity_residual < 1e-6)
        .min_by(|x, y| x.1.identity_residual.total_cmp(&y.1.identity_residual))
        .map(|(i, _)| i);
    let q1q2 = match selected {
        Some(i) => epsilon_checks[i].q1 * epsilon_checks[i].q2,
        None => ctx.g2 / 12.0,
    };
    let b = period_b(ctx)?;
    let (ba, bb, bd) = (b[0][0], b[0][1], b[1][1]);
    let degeneracy = -ba.conj() - ba * bb * bb * q1q2 + ba * bd * bd;
    Ok(Torus3Report {
        a1,
        a2,
        p1,
        p2,
        wp_prime_sum,
        g2_condition,
        omega_max,
        b: [b[0][0], b[0][1], b[1][0], b[1][1]],
        degeneracy,
        abs_a: ba.norm(),
        epsilon_checks,
        selected,
    })
}

/// A second end a₂ with ℘′(a₂) = −℘′(a₁) and ℘(a₂) ≠ ℘(a₁), found by Newton
/// iteration on ℘′ from a grid of seeds over the fundamental domain.
pub fn torus3_admissible_partner(ctx: &EllipticContext, a1: C64) -> Result<C64> {
    let target = -ctx.wp_prime(a1)?;
    let p1 = ctx.wp(a1)?;
    let (w1, w3) = (ctx.omega1(), ctx.omega3());
    for i in 0..6 {
        for j in 0..6 {
            let mut u = w1 * (2.0 * (i as f64 + 0.37) / 6.0) + w3 * (2.0 * (j as f64 + 0.29) / 6.0);
            let mut ok = false;
            for _ in 0..60 {
                let f = ctx.wp_prime_unchecked(u) - target;
                let step = f / ctx.wp_second(u);
                if !step.is_finite() {
                    break;
                }
                u -= step;
                if step.norm() < 1e-14 * (1.0 + u.norm()) {
                    ok = true;
                    break;
                }
            }
            if !ok || ctx.lattice.lattice_distance(u) < 1e-6 {
                continue;
            }
            let resid = (ctx.wp_prime_unchecked(u) - target).norm() / (1.0 + target.norm());
            let p2 = ctx.wp_unchecked(u);
            if resid < 1e-10 && (p2 - p1).norm() > 1e-6 * (1.0 + p1.norm()) {
                return Ok(ctx.lattice.wrap(u));
            }
        }
    }
    Err(Error::NoConvergence(format!("no admissible partner for a1 = {a1}")))
}

/// Reports for `n` random a₁ on the given torus, each paired with an
/// admissible a₂. Trial i uses stream i of ChaCha8(seed).
pub fn torus3_scan(ctx: &Arc<EllipticContext>, n: usize, seed: u64, exec: Exec) -> Vec<Result<Torus3Report>> {
    map_range(exec, n, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let x: f64 = rng.gen_range(0.1..0.9);
        let y: f64 = rng.gen_range(0.1..0.9);
        let a1 = ctx.omega1() * (2.0 * x) + ctx.omega3() * (2.0 * y);
        let a2 = torus3_admissible_partner(ctx, a1)?;
        torus3_degeneracy(ctx, a1, a2)
    })
}

/// rank Ω for three ends on the untwisted torus with index r.
pub fn torus3_untwisted_rank(ctx: &Arc<EllipticContext>, r: usize, ends: &[C64]) -> Result<usize> {
    let form = omega_matrix(basis_f_torus_untwisted(ctx.clone(), r, ends)?, Vec::new())?;
    Ok(form.rank(1e-9))
}

const SIGNS: [[f64; 4]; 3] = [[1.0, 1.0, -1.0, -1.0], [1.0, -1.0, 1.0, -1.0], [1.0, -1.0, -1.0, 1.0]];

/// The four-ended twisted torus with ends at the half-lattice points.
#[derive(Clone, Debug)]
pub struct TorusFourEnd {
    pub ctx: Arc<EllipticContext>,
    /// {0, ω₁, ω₂, ω₃} with ω₂ = −ω₁ − ω₃.
    pub ends: [C64; 4],
    /// The permutation (i, j, k), 1-based.
    pub choice: (usize, usize, usize),
    pub form: OmegaForm,
    pub k_dim: usize,
    pub t_hat: [SpinorSection; 3],
    /// |combination of tᵢ − reference ζ formula| at probes.
    pub t_hat_formula_residual: f64,
    /// |t̂ᵢt̂ⱼ − (Σ±℘(u−ω_l) − 4eᵢδᵢⱼ)| at probes.
    pub square_identity_residual: f64,
    /// `periods_closed[l][i][j]` for loop l ∈ {γ₁, γ₃}.
    pub periods_closed: [[[C64; 3]; 3]; 2],
    pub periods_quadrature: [[[C64; 3]; 3]; 2],
    /// max relative difference on the diagonal.
    pub period_rel_err: f64,
    pub offdiag_max: f64,
    /// (x_i², x_j²) and the principal square roots.
    pub x_sq: [C64; 2],
    pub x: [C64; 2],
    /// (e_k − e_i)x_i² − (e_k − e_j)x_j².
    pub branch_residual: C64,
    /// (g₂/2 − 3e_k², −3e_k)·B(1, ē_k)ᵀ, equal to (e_j − e_i) times the above.
    pub branch_residual_alt: C64,
    /// max |t̂_m²(ω_k/2 + ω_l) − 4(e_k − e_m)| for m = i, j.
    pub zero_value_residual: f64,
    /// min |s₁/φ₀| over the zeros of s₂.
    pub s1_at_s2_zeros: f64,
    pub s1: SpinorSection,
    pub s2: SpinorSection,
    /// Worst of |∫s₁² − conj ∫s₂²| and |Re ∫s₁s₂| over γ₁, γ₃, relative to 1 + |∫s₂²|.
    pub period1_residual: f64,
}

/// Builds the family on the given torus for the permutation (i, j, k).
pub fn torus4_construct(ctx: Arc<EllipticContext>, choice: (usize, usize, usize)) -> Result<TorusFourEnd> {
    let (i, j, k) = choice;
    let mut sorted = [i, j, k];
    sorted.sort();
    if sorted != [1, 2, 3] {
        return Err(Error::InvalidInput(format!("{choice:?} is not a permutation of (1, 2, 3)")));
    }
    let (w1, w3) = (ctx.omega1(), ctx.omega3());
    let w2 = -w1 - w3;
    let w = [c64(0.0, 0.0), w1, w2, w3];
    let e = [ctx.e1, ctx.e2, ctx.e3];
    let ends = [c64(0.0, 0.0), w1, w2, w3];
    let basis = basis_f_torus_twisted(ctx.clone(), &ends)?;
    let h = vec![vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]];
    let form = omega_matrix(basis.clone(), h)?;
    let k_dim = extract_k(&form, 1e-9)?.len();

    let m = [[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let t = &basis[1..];
    let t_hat: Vec<SpinorSection> = (0..3)
        .map(|r| {
            let c: Vec<C64> = m[r].iter().map(|&x| c64(x, 0.0)).collect();
            SpinorSection::combine(t, &c, format!("t̂{}", r + 1))
        })
        .collect::<Result<_>>()?;
    let t_hat: [SpinorSection; 3] = t_hat.try_into().expect("three sections");

    let zeta_w: Vec<C64> = (1..4).map(|l| ctx.zeta(w[l])).collect::<Result<_>>()?;
    let reference = |r: usize, u: C64| -> C64 {
        (0..4).map(|l| SIGNS[r][l] * ctx.zeta_unchecked(u - w[l])).sum::<C64>() + 2.0 * zeta_w[r]
    };
    let probes = [c64(0.13, 0.21), c64(-0.37, 0.44), c64(0.61, -0.27), c64(0.29, 0.77)].map(|p| w1 * p.re + w3 * p.im);
    let mut t_hat_formula_residual: f64 = 0.0;
    let mut square_identity_residual: f64 = 0.0;
    for &u in &probes {
        for r in 0..3 {
            let v = t_hat[r].value(u);
            t_hat_formula_residual = t_hat_formula_residual.max((v - reference(r, u)).norm() / (1.0 + v.norm()));
            for s in 0..3 {
                let prod = v * t_hat[s].value(u);
                let mut want: C64 = (0..4).map(|l| SIGNS[r][l] * SIGNS[s][l] * ctx.wp_unchecked(u - w[l])).sum();
                if r == s {
                    want -= 4.0 * e[r];
                }
                square_identity_residual = square_identity_residual.max((prod - want).norm() / (1.0 + want.norm()));
            }
        }
    }

    let mut periods_closed = [[[c64(0.0, 0.0); 3]; 3]; 2];
    let mut periods_quadrature = periods_closed;
    let mut period_rel_err: f64 = 0.0;
    let mut offdiag_max: f64 = 0.0;
    for (li, l) in [1usize, 3].into_iter().enumerate() {
        for r in 0..3 {
            periods_closed[li][r][r] = -8.0 * (ctx.eta(l) + ctx.half_period(l) * e[r]);
            for s in r..3 {
                let (fr, fs) = (t_hat[r].evaluator(), t_hat[s].evaluator());
                let q = loop_integral(&ctx, l, &ends, |u| fr(u) * fs(u))?;
                periods_quadrature[li][r][s] = q;
                periods_quadrature[li][s][r] = q;
                if r == s {
                    let want = periods_closed[li][r][r];
                    period_rel_err = period_rel_err.max((q - want).norm() / want.norm());
                } else {
                    offdiag_max = offdiag_max.max(q.norm());
                }
            }
        }
    }

    let b = period_b(&ctx)?;
    let ek = e[k - 1];
    let v = [b[0][0] + b[0][1] * ek.conj(), b[1][0] + b[1][1] * ek.conj()];
    let minv = inv2([[c64(1.0, 0.0), c64(1.0, 0.0)], [e[i - 1], e[j - 1]]])?;
    let x_sq = [minv[0][0] * v[0] + minv[0][1] * v[1], minv[1][0] * v[0] + minv[1][1] * v[1]];
    let x = [x_sq[0].sqrt(), x_sq[1].sqrt()];
    let branch_residual = (ek - e[i - 1]) * x_sq[0] - (ek - e[j - 1]) * x_sq[1];
    let branch_residual_alt = (ctx.g2 / 2.0 - 3.0 * ek * ek) * v[0] - 3.0 * ek * v[1];

    let s1 = SpinorSection::combine(&[t_hat[i - 1].clone(), t_hat[j - 1].clone()], &x, "s1")?;
    let s2 = t_hat[k - 1].scaled(c64(1.0, 0.0), "s2");
    let wk2 = w[k] / 2.0;
    let mut zero_value_residual: f64 = 0.0;
    let mut s1_at_s2_zeros = f64::INFINITY;
    for l in 0..4 {
        let u = wk2 + w[l];
        for mm in [i, j] {
            let val = t_hat[mm - 1].value(u);
            zero_value_residual = zero_value_residual.max((val * val - 4.0 * (ek - e[mm - 1])).norm());
        }
        s1_at_s2_zeros = s1_at_s2_zeros.min(s1.value(u).norm());
    }

    let mut period1_residual: f64 = 0.0;
    for l in [1, 3] {
        let (f1, f2) = (s1.evaluator(), s2.evaluator());
        let p11 = loop_integral(&ctx, l, &ends, |u| f1(u) * f1(u))?;
        let p22 = loop_integral(&ctx, l, &ends, |u| f2(u) * f2(u))?;
        let p12 = loop_integral(&ctx, l, &ends, |u| f1(u) * f2(u))?;
        let sc = 1.0 + p22.norm();
        period1_residual = period1_residual.max((p11 - p22.conj()).norm() / sc).max(p12.re.abs() / sc);
    }

    Ok(TorusFourEnd {
        ctx,
        ends,
        choice,
        form,
        k_dim,
        t_hat,
        t_hat_formula_residual,
        square_identity_residual,
        periods_closed,
        periods_quadrature,
        period_rel_err,
        offdiag_max,
        x_sq,
        x,
        branch_residual,
        branch_residual_alt,
        zero_value_residual,
        s1_at_s2_zeros,
        s1,
        s2,
        period1_residual,
    })
}

/// Square, 2:1 rectangular and generic rectangular lattices.
pub fn torus4_reference_lattices() -> Result<Vec<Arc<EllipticContext>>> {
    [(1.0, 1.0), (1.0, 2.0), (0.8, 1.37)]
        .iter()
        .map(|&(a, b)| Ok(Arc::new(build_context(c64(a, 0.0), c64(0.0, b))?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Arc<EllipticContext> {
        Arc::new(build_context(c64(1.0, 0.0), c64(0.0, 1.0)).unwrap())
    }

    #[test]
    fn torus4_square() {
        let t = torus4_construct(square(), (1, 2, 3)).unwrap();
        assert_eq!(t.k_dim, 3);
        assert!(t.form.matrix.matrix().max_abs() < 1e-10);
        assert!(t.t_hat_formula_residual < 1e-10, "{}", t.t_hat_formula_residual);
        assert!(t.square_identity_residual < 1e-9, "{}", t.square_identity_residual);
        assert!(t.period_rel_err < 1e-8, "{}", t.period_rel_err);
        assert!(t.offdiag_max < 1e-8, "{}", t.offdiag_max);
        assert!(t.period1_residual < 1e-7, "{}", t.period1_residual);
        assert!(t.branch_residual.norm() > 1e-3);
        let e = [t.ctx.e1, t.ctx.e2];
        assert!((t.branch_residual_alt - (e[1] - e[0]) * t.branch_residual).norm() < 1e-9);
        assert!(t.zero_value_residual < 1e-8, "{}", t.zero_value_residual);
        assert!(t.s1_at_s2_zeros > 1e-3);
    }

    #[test]
    fn torus4_rejects_bad_choice() {
        assert!(torus4_construct(square(), (1, 1, 3)).is_err());
    }

    #[test]
    fn torus3_on_the_locus() {
        let ctx = Arc::new(build_context(c64(1.0, 0.0), c64(0.0, 1.3)).unwrap());
        let a1 = c64(0.37, 0.41);
        let a2 = torus3_admissible_partner(&ctx, a1).unwrap();
        let r = torus3_degeneracy(&ctx, a1, a2).unwrap();
        assert!(r.wp_prime_sum.norm() < 1e-9);
        assert!(r.g2_condition.norm() < 1e-8 * (1.0 + ctx.g2.norm()));
        assert!(r.omega_max < 1e-8);
        let sel = r.selected.expect("one ε passes");
        assert!(r.epsilon_checks[sel].label.starts_with("cube"));
        assert!(r.epsilon_checks[sel].q1q2_residual < 1e-9);
        assert!(r.epsilon_checks[0].identity_residual > 1e-3);
    }

    #[test]
    fn torus3_untwisted_is_never_zero() {
        let ctx = square();
        let rk = torus3_untwisted_rank(&ctx, 1, &[c64(0.4, 0.3), c64(-0.5, 0.6), c64(0.2, -0.7)]).unwrap();
        assert!(rk > 0);
    }
}
