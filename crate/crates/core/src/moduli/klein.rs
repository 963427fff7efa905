//! The four-ended Klein bottle on the square torus with e = (1, 0, −1),
//! deck transformation I(u) = ū + ω₁ and spin structure φ² = du/℘.

use super::kernel_residual;
use super::torus::torus_loop;
use crate::elliptic::{build_context, principal_part_reconstruct, EllipticContext};
use crate::numkit::{contour_integral_tol, poly_roots, CMatrix, ComplexPolynomial};
use crate::spinor::{basis_f_paired, check_planar_end, omega_matrix, OmegaForm, SpinorSection};
use crate::{c64, Error, Result, C64, I};
use serde::Serialize;
use std::sync::Arc;

/// Square lattice ω₃ = iω₁ scaled so that ℘(ω₁) = 1, ℘(ω₂) = 0, ℘(ω₃) = −1.
pub fn klein_context() -> Result<Arc<EllipticContext>> {
    let unit = build_context(c64(1.0, 0.0), I)?;
    let lambda = unit.e1.re.sqrt();
    Ok(Arc::new(build_context(c64(lambda, 0.0), c64(0.0, lambda))?))
}

/// m = −2(1 − 4√2 i)/3.
pub fn klein_m() -> C64 {
    -2.0 * c64(1.0, -4.0 * 2f64.sqrt()) / 3.0
}

/// The root of r⁴ + mr² + 1 in the open fourth quadrant.
pub fn klein_root_r() -> Result<C64> {
    let p = ComplexPolynomial::new(vec![c64(1.0, 0.0), c64(0.0, 0.0), klein_m(), c64(0.0, 0.0), c64(1.0, 0.0)])?;
    let roots: Vec<C64> = poly_roots(&p)?.into_iter().filter(|z| z.re > 0.0 && z.im < 0.0).collect();
    match roots.as_slice() {
        [r] => Ok(*r),
        _ => Err(Error::Inconsistent(format!("{} roots in the fourth quadrant", roots.len()))),
    }
}

/// The reference W block in terms of r.
pub fn klein_w_reference(r: C64) -> CMatrix {
    let r2 = r * r;
    let (a, b, c, d) = ((r2 + 1.0) / (r * (r2 - 1.0)), 4.0 * r / (r2 + 1.0), 2.0 / r, 4.0 * r / (r2 - 1.0));
    let e = r * (r2 + 1.0) / (r2 - 1.0);
    CMatrix::from_rows(&[vec![a, b, c, d], vec![-b, e, d, -2.0 * r], vec![-c, -d, -a, -b], vec![-d, 2.0 * r, b, -e]])
}

fn det_numerator(r: C64) -> C64 {
    let r2 = r * r;
    let r4 = r2 * r2;
    3.0 * r4 * r4 - 4.0 * r4 * r2 + 50.0 * r4 - 4.0 * r2 + 3.0
}

/// (3r⁸ − 4r⁶ + 50r⁴ − 4r² + 3)² / (r⁴ − 1)², the reference closed form of det W.
pub fn klein_det_w_polynomial(r: C64) -> C64 {
    let n = det_numerator(r);
    let d = r.powi(4) - 1.0;
    n * n / (d * d)
}

/// 9(r⁴ + mr² + 1)²(r⁴ + m̄r² + 1)² / (r⁴ − 1)².
pub fn klein_det_w_factored(r: C64) -> C64 {
    let m = klein_m();
    let r2 = r * r;
    let f = r2 * r2 + m * r2 + 1.0;
    let g = r2 * r2 + m.conj() * r2 + 1.0;
    let d = r2 * r2 - 1.0;
    9.0 * f * f * g * g / (d * d)
}

/// det of the reference matrix in closed form: (3r⁸ − 4r⁶ + 50r⁴ − 4r² + 3)² / (r⁴ − 1)⁴.
pub fn klein_det_w_matrix(r: C64) -> C64 {
    let d = r.powi(4) - 1.0;
    klein_det_w_polynomial(r) / (d * d)
}

/// c₁ and c₂, the left kernel vectors of W.
pub fn klein_c_vectors(r: C64) -> [[C64; 4]; 2] {
    let r2 = r * r;
    let q = 2.0 * (r2 - 1.0) * (r2 - 1.0);
    let u = (r2 + 1.0) * (r2 - 3.0);
    let v = (r2 + 1.0) * (3.0 * r2 - 1.0);
    [[q, u, v, -q], [v, -q, q, u]]
}

/// Printed (A, B, C) with D = 0.
pub fn klein_period_coeffs_reference(r: C64) -> [C64; 3] {
    let r2 = r * r;
    let r4 = r2 * r2;
    [-32.0 * r2 * (r4 + 4.0 * r2 + 1.0) / 3.0, 4.0 * r * (r2 + 1.0).powi(3), -2.0 * (r4 - 1.0) * (r4 - 1.0)]
}

/// Solution of the single period equation.
#[derive(Clone, Debug, Serialize)]
pub struct KleinSolution {
    /// (x₁, x₂) with x₂ = 1.
    pub x: [C64; 2],
    /// P₁¹¹, P₁¹², P₁²² from the reference A, B, C.
    pub p_reference: [C64; 3],
    /// The same periods by quadrature along γ₁.
    pub p_quadrature: [C64; 3],
    /// |x₁²P¹¹ + 2x₁x₂P¹² + x₂²P²²| relative to the coefficient scale.
    pub equation_residual: f64,
    /// |∫γ₁ s₁²| and |∫γ₁ s₁s₂| by quadrature, relative to |P₁¹¹|.
    pub gamma1_s1s1: f64,
    pub gamma1_s1s2: f64,
    /// Worst of |∫γ₃ s₁² − conj ∫γ₃ s₂²| and |Re ∫γ₃ s₁s₂|, relative.
    pub gamma3_residual: f64,
}

/// The Klein bottle data.
#[derive(Clone, Debug)]
pub struct KleinFourEnd {
    pub ctx: Arc<EllipticContext>,
    pub r: C64,
    /// ℘′(a).
    pub r_prime: C64,
    /// a₁ … a₈ as in the table of ends.
    pub ends: Vec<C64>,
    /// max deviation of ℘, ℘′ at the ends from the tabulated values.
    pub table_residual: f64,
    /// Whether I permutes the ends as tabulated.
    pub deck_map_ok: bool,
    pub form: OmegaForm,
    pub rank: usize,
    /// Numeric off-diagonal block of Ω.
    pub w: CMatrix,
    /// max |W + ½W_reference|.
    pub w_reference_residual: f64,
    /// Ω-kernel residuals of ŝ₁ … ŝ₄ in basis coordinates.
    pub kernel_residuals: [f64; 4],
    pub sections: [SpinorSection; 4],
    /// ŝ₃, ŝ₄ in basis form versus i·conj(ŝ(ū+ω₁))·℘′/(2(℘+1)).
    pub lift_residual: f64,
    /// (A, B, C, D) from the residue formulas, summed over a₁ … a₄.
    pub period_coeffs: [C64; 4],
    pub period_coeffs_reference: [C64; 3],
    /// ŝ₁² against −½Σ₈ A_γ℘(u − a_γ) + B at probes.
    pub expansion_residual: f64,
    pub solution: KleinSolution,
    pub s1: SpinorSection,
    pub s2: SpinorSection,
    /// s₂ against i·conj(s₁(ū+ω₁))·℘′/(2(℘+1)) at 50 probes.
    pub deck_residual: f64,
    /// ℘-values of the zeros of s₁ (the cubic roots plus 0 and ∞).
    pub s1_zero_values: Vec<Option<C64>>,
    /// Common zeros of s₁ and s₂, as ℘-values; empty when unbranched.
    pub branch_points: Vec<Option<C64>>,
    /// Smallest chordal distance between an I-image of a zero of s₁ and a zero.
    pub branch_margin: f64,
    pub planar_ends: usize,
}

/// ∫ s·t over a loop homologous to γ_k, including the chart density.
fn loop_pair(ctx: &EllipticContext, k: usize, ends: &[C64], s: &SpinorSection, t: &SpinorSection) -> Result<C64> {
    let (fs, ft) = (s.evaluator(), t.evaluator());
    let dens = s.density_evaluator();
    let f = move |u: C64| {
        let d = dens.as_ref().map_or(c64(1.0, 0.0), |d| d(u));
        fs(u) * ft(u) * d
    };
    contour_integral_tol(&f, &torus_loop(ctx, k, ends), 1e-12)
}

/// Point of the Riemann sphere; `None` is ∞.
type Projective = Option<C64>;

fn chordal(a: Projective, b: Projective) -> f64 {
    match (a, b) {
        (None, None) => 0.0,
        (Some(z), None) | (None, Some(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
        (Some(z), Some(w)) => 2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt()),
    }
}

/// w ↦ conj((w + 1)/(w − 1)), the action of I on values of ℘.
fn deck_on_wp(w: Projective) -> Projective {
    match w {
        None => Some(c64(1.0, 0.0)),
        Some(z) if (z - 1.0).norm() < 1e-300 => None,
        Some(z) => Some(((z + 1.0) / (z - 1.0)).conj()),
    }
}

/// Locates a with ℘(a) = r on the line Re u = ω₁/2, where I(a) ≡ −a.
fn locate_a(ctx: &EllipticContext, r: C64) -> Result<C64> {
    let (w1, w3) = (ctx.omega1(), ctx.omega3());
    for k in 0..32 {
        let seed = w1 / 2.0 + w3 * (-1.0 + 2.0 * (k as f64 + 0.5) / 32.0);
        let Ok(u) = ctx.wp_inverse(r, seed) else { continue };
        for cand in [u, -u] {
            let a = ctx.lattice.wrap(cand);
            let fixed = ctx.lattice.congruent(a.conj() + w1, -a, 1e-9);
            if fixed && a.re > 0.0 {
                return Ok(a);
            }
        }
    }
    Err(Error::NoConvergence(format!("no point with ℘(a) = {r} and I(a) = −a")))
}

pub fn klein4_construct() -> Result<KleinFourEnd> {
    let ctx = klein_context()?;
    let r = klein_root_r()?;
    let (w1, w3) = (ctx.omega1(), ctx.omega3());
    let w2 = -w1 - w3;
    let a = locate_a(&ctx, r)?;
    let quarter = [a, a + w2, -I * a, -I * a + w2];
    let ends: Vec<C64> = quarter.iter().copied().chain(quarter.iter().map(|x| -x)).collect();

    let r_prime = ctx.wp_prime(a)?;
    let want_p = [r, -1.0 / r, -r, 1.0 / r];
    let want_dp = [r_prime, r_prime / (r * r), -I * r_prime, -I * r_prime / (r * r)];
    let mut table_residual: f64 = 0.0;
    for (k, &u) in ends.iter().enumerate() {
        let sign = if k < 4 { 1.0 } else { -1.0 };
        let dp = ctx.wp_prime(u)?;
        table_residual = table_residual
            .max((ctx.wp(u)? - want_p[k % 4]).norm() / (1.0 + r.norm()))
            .max((dp - sign * want_dp[k % 4]).norm() / (1.0 + r_prime.norm()));
    }
    let deck = [4usize, 5, 3, 2, 0, 1, 7, 6];
    let deck_map_ok = (0..8).all(|k| ctx.lattice.congruent(ends[k].conj() + w1, ends[deck[k]], 1e-8));

    let paired = basis_f_paired(ctx.clone(), 2, &quarter)?;
    let p = paired.p.clone();
    let form = omega_matrix(paired.sections.clone(), Vec::new())?;
    let rank = form.rank(1e-9);
    let w = CMatrix::from_fn(4, 4, |i, j| form.matrix.get(i, j + 4));
    let wp = klein_w_reference(r);
    let w_reference_residual = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| (w[(i, j)] + 0.5 * wp[(i, j)]).norm())
        .fold(0.0, f64::max);

    let cs = klein_c_vectors(r);
    let zero = c64(0.0, 0.0);
    // ŝ_{2+l} = i·conj(I*ŝ_l) lands on the odd sections ℘′/(℘ − p_β).
    let mut odd = [[zero; 4]; 2];
    for (l, c) in cs.iter().enumerate() {
        for al in 0..4 {
            let target = (p[al].conj() + 1.0) / (p[al].conj() - 1.0);
            let beta =
                (0..4).min_by(|&x, &y| (p[x] - target).norm().total_cmp(&(p[y] - target).norm())).expect("four ends");
            if (p[beta] - target).norm() > 1e-8 * (1.0 + target.norm()) {
                return Err(Error::Inconsistent(format!("I does not permute the end values: {target} not found")));
            }
            odd[l][beta] += I * c[al].conj() / (2.0 * (1.0 - p[al].conj()));
        }
    }
    let full = |even: [C64; 4], odd: [C64; 4]| -> Vec<C64> { even.iter().chain(odd.iter()).copied().collect() };
    let coords = [full(cs[0], [zero; 4]), full(cs[1], [zero; 4]), full([zero; 4], odd[0]), full([zero; 4], odd[1])];
    let omega = form.matrix.matrix();
    let kernel_residuals: [f64; 4] = std::array::from_fn(|k| kernel_residual(omega, &coords[k]));
    let basis = &paired.sections;
    let sections: Vec<SpinorSection> = coords
        .iter()
        .enumerate()
        .map(|(k, c)| SpinorSection::combine(basis, c, format!("ŝ{}", k + 1)))
        .collect::<Result<_>>()?;
    let sections: [SpinorSection; 4] = sections.try_into().expect("four sections");

    // Dual route for the lift: evaluate i·conj(f(ū+ω₁))·℘′/(2(℘+1)) directly.
    let lift = |s: &SpinorSection, u: C64| -> C64 {
        I * s.value(u.conj() + w1).conj() * ctx.wp_prime_unchecked(u) / (2.0 * (ctx.wp_unchecked(u) + 1.0))
    };
    let probes: Vec<C64> = (0..50)
        .map(|k| {
            let t = k as f64 / 50.0;
            w1 * (1.7 * t - 0.83) + w3 * ((7.3 * t).sin() * 0.9)
        })
        .collect();
    let mut lift_residual: f64 = 0.0;
    for &u in &probes {
        for l in 0..2 {
            let direct = lift(&sections[l], u);
            let got = sections[l + 2].value(u);
            lift_residual = lift_residual.max((got - direct).norm() / (1.0 + got.norm()));
        }
    }

    // Residue formulas: A_γ = −2(c₁^γ)²℘(a_γ)/℘′(a_γ)², C_γ likewise, B = ΣA_γ℘(a_γ).
    let dp: Vec<C64> = quarter.iter().map(|&u| ctx.wp_prime(u)).collect::<Result<_>>()?;
    let a_g: Vec<C64> = (0..4).map(|g| -2.0 * cs[0][g] * cs[0][g] * p[g] / (dp[g] * dp[g])).collect();
    let c_g: Vec<C64> = (0..4).map(|g| -2.0 * cs[0][g] * cs[1][g] * p[g] / (dp[g] * dp[g])).collect();
    let period_coeffs =
        [a_g.iter().sum(), (0..4).map(|g| a_g[g] * p[g]).sum(), c_g.iter().sum(), (0..4).map(|g| c_g[g] * p[g]).sum()];
    let period_coeffs_reference = klein_period_coeffs_reference(r);

    let poles: Vec<(C64, C64)> = (0..8).map(|k| (ends[k], -0.5 * a_g[k % 4])).collect();
    let mut expansion_residual: f64 = 0.0;
    for &u in probes.iter().take(10) {
        let got = sections[0].square_density(u);
        let want: C64 = principal_part_reconstruct(&ctx, &poles, u) + period_coeffs[1];
        expansion_residual = expansion_residual.max((got - want).norm() / (1.0 + got.norm()));
    }

    let [ca, cb, cc] = period_coeffs_reference;
    let (eta1, om1) = (ctx.eta1, w1);
    let p_reference = [ca * eta1 + cb * om1, cc * eta1, ca * eta1 - cb * om1];
    let p_quadrature = [
        loop_pair(&ctx, 1, &ends, &sections[0], &sections[0])?,
        loop_pair(&ctx, 1, &ends, &sections[0], &sections[1])?,
        loop_pair(&ctx, 1, &ends, &sections[1], &sections[1])?,
    ];
    let [p11, p12, p22] = p_reference;
    let xi = (-p12 + (p12 * p12 - p11 * p22).sqrt()) / p11;
    let x = [xi, c64(1.0, 0.0)];
    let scale = p11.norm().max(p12.norm()).max(p22.norm());
    let equation_residual = (xi * xi * p11 + 2.0 * xi * p12 + p22).norm() / scale;

    let s1 = SpinorSection::combine(&sections[..2], &x, "s1")?;
    let s2 = SpinorSection::combine(&sections[2..], &[x[0].conj(), x[1].conj()], "s2")?;
    let qscale = p_quadrature[0].norm();
    let gamma1_s1s1 = loop_pair(&ctx, 1, &ends, &s1, &s1)?.norm() / qscale;
    let gamma1_s1s2 = loop_pair(&ctx, 1, &ends, &s1, &s2)?.norm() / qscale;
    let g11 = loop_pair(&ctx, 3, &ends, &s1, &s1)?;
    let g22 = loop_pair(&ctx, 3, &ends, &s2, &s2)?;
    let g12 = loop_pair(&ctx, 3, &ends, &s1, &s2)?;
    let gamma3_residual = (g11 - g22.conj()).norm().max(g12.re.abs()) / qscale;
    let solution =
        KleinSolution { x, p_reference, p_quadrature, equation_residual, gamma1_s1s1, gamma1_s1s2, gamma3_residual };

    let mut deck_residual: f64 = 0.0;
    for &u in &probes {
        let got = s2.value(u);
        deck_residual = deck_residual.max((got - lift(&s1, u)).norm() / (1.0 + got.norm()));
    }

    // s₁ = √℘·Σ d_α/(℘ − p_α): zeros at ℘ = 0, ℘ = ∞ and the cubic Σ d_α Π_{β≠α}(℘ − p_β).
    let d: Vec<C64> = (0..4).map(|g| xi * cs[0][g] + cs[1][g]).collect();
    let mut cubic = vec![zero; 4];
    for al in 0..4 {
        let others: Vec<C64> = (0..4).filter(|&b| b != al).map(|b| p[b]).collect();
        for (acc, c) in cubic.iter_mut().zip(ComplexPolynomial::from_roots(&others).coeffs()) {
            *acc += d[al] * c;
        }
    }
    let cubic = ComplexPolynomial::new(cubic)?;
    let mut s1_zero_values: Vec<Projective> = poly_roots(&cubic)?.into_iter().map(Some).collect();
    s1_zero_values.push(Some(zero));
    s1_zero_values.push(None);
    let mut branch_margin = f64::INFINITY;
    let mut branch_points = Vec::new();
    for &z in &s1_zero_values {
        let img = deck_on_wp(z);
        let dist = s1_zero_values.iter().map(|&y| chordal(img, y)).fold(f64::INFINITY, f64::min);
        branch_margin = branch_margin.min(dist);
        if dist < 1e-6 {
            branch_points.push(z);
        }
    }

    let planar_ends =
        basis[0].divisor.points.iter().filter(|pt| check_planar_end(&s1, &s2, pt, 1e-8).unwrap_or(false)).count();

    Ok(KleinFourEnd {
        ctx,
        r,
        r_prime,
        ends,
        table_residual,
        deck_map_ok,
        form,
        rank,
        w,
        w_reference_residual,
        kernel_residuals,
        sections,
        lift_residual,
        period_coeffs,
        period_coeffs_reference,
        expansion_residual,
        solution,
        s1,
        s2,
        deck_residual,
        s1_zero_values,
        branch_points,
        branch_margin,
        planar_ends,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn context_normalization() {
        let ctx = klein_context().unwrap();
        assert!((ctx.e1 - 1.0).norm() < 1e-12);
        assert!(ctx.e2.norm() < 1e-12);
        assert!((ctx.e3 + 1.0).norm() < 1e-12);
    }

    #[test]
    fn root_and_det_identities() {
        let r = klein_root_r().unwrap();
        assert!(klein_det_w_polynomial(r).norm() < 1e-10);
        assert!(klein_w_reference(r).det().norm() < 1e-10);
        let at2 = klein_det_w_polynomial(c64(2.0, 0.0));
        assert!((at2 - 1299.0 * 1299.0 / 225.0).norm() < 1e-9);
        assert!((klein_det_w_factored(c64(2.0, 0.0)) - at2).norm() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let r = c64(rng.gen_range(0.3..2.0), rng.gen_range(-1.5..1.5));
            let (a, b) = (klein_det_w_polynomial(r), klein_det_w_factored(r));
            assert!((a - b).norm() < 1e-8 * a.norm());
            let det = klein_w_reference(r).det();
            assert!((det - klein_det_w_matrix(r)).norm() < 1e-8 * det.norm());
        }
    }

    #[test]
    fn c_vectors_annihilate_w() {
        let r = klein_root_r().unwrap();
        let wt = klein_w_reference(r).transpose();
        for c in klein_c_vectors(r) {
            assert!(kernel_residual(&wt, &c) < 1e-12);
        }
    }

    #[test]
    fn construction() {
        let k = klein4_construct().unwrap();
        assert!(k.table_residual < 1e-9, "{}", k.table_residual);
        assert!(k.deck_map_ok);
        assert_eq!(k.rank, 4);
        assert!(k.w_reference_residual < 1e-9, "{}", k.w_reference_residual);
        for res in k.kernel_residuals {
            assert!(res < 1e-10, "{res}");
        }
        assert!(k.lift_residual < 1e-10, "{}", k.lift_residual);
        let [a, b, c] = k.period_coeffs_reference;
        assert!((k.period_coeffs[0] - a).norm() < 1e-9 * a.norm());
        assert!((k.period_coeffs[1] - b).norm() < 1e-9 * b.norm());
        assert!((k.period_coeffs[2] - c).norm() < 1e-9 * c.norm());
        assert!(k.period_coeffs[3].norm() < 1e-9 * c.norm());
        assert!(k.expansion_residual < 1e-9, "{}", k.expansion_residual);
        let s = &k.solution;
        for i in 0..3 {
            let q = s.p_quadrature[i];
            assert!((q - 2.0 * s.p_reference[i]).norm() < 1e-8 * q.norm().max(1.0), "{i}: {q} {}", s.p_reference[i]);
        }
        assert!(s.equation_residual < 1e-12);
        assert!(s.gamma1_s1s1 < 1e-8 && s.gamma1_s1s2 < 1e-8);
        assert!(s.gamma3_residual < 1e-8, "{}", s.gamma3_residual);
        assert!(k.deck_residual < 1e-10);
        assert!(k.branch_points.is_empty());
        assert_eq!(k.planar_ends, 8);
    }
}
