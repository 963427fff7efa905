//! Verification suites. Each suite checks one group of identities against
//! an independent route (term expansions, determinants, quadrature,
//! brute-force enumeration) and returns a [`Report`].

use crate::arf::{
    arf_bruteforce, arf_closed_form, q_value, quadratic_law_holds, spin_structure_counts, spin_structure_formula,
    torus_spin_table, HyperellipticSpin,
};
use crate::elliptic::build_context;
use crate::moduli::{
    klein4_construct, klein_det_w_factored, klein_det_w_matrix, klein_det_w_polynomial, klein_w_reference,
    rp2_d3_point, rp2_group, rp2_symmetry_group, rp2_variety, sphere4_solve, sphere6_K_basis, sphere6_numeric_pfaffian,
    sphere6_on_variety, sphere6_pfaffian, sphere_nonexistence_trials, torus4_construct, torus4_reference_lattices,
    SymmetryLabel,
};
use crate::numkit::{pfaffian, SkewMatrix};
use crate::par::Exec;
use crate::report::Report;
use crate::spinor::{
    basis_f_paired, basis_f_sphere, basis_f_torus_twisted, omega_pair, omega_qres_oracle, EndPoint, SpinorSection,
};
use crate::surface::{
    end_periods, enneper_data, integrate_surface, null_curve_residual, planar_end_fit, random_cycle_residuals,
    GridSpec, WeierstrassData,
};
use crate::{c64, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Suite names in criterion order.
pub const SUITES: [&str; 11] = [
    "pfaffian",
    "elliptic",
    "omega",
    "sphere4",
    "sphere6",
    "rp2",
    "arf",
    "torus4",
    "klein4",
    "geometry",
    "nonexistence",
];

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 1, exec: Exec::default() }
    }
}

/// Runs the named suite.
pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<Report> {
    match name {
        "pfaffian" => pfaffian_suite(opts),
        "elliptic" => elliptic_suite(opts),
        "omega" => omega_suite(opts),
        "sphere4" => sphere4_suite(),
        "sphere6" => sphere6_suite(opts),
        "rp2" => rp2_suite(opts),
        "arf" => arf_suite(),
        "torus4" => torus4_suite(),
        "klein4" => klein4_suite(opts),
        "geometry" => geometry_suite(opts),
        "nonexistence" => nonexistence_suite(opts),
        _ => Err(Error::InvalidInput(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))),
    }
}

fn rng(opts: &VerifyOptions, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn rand_c(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    c64(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Term expansions of the pfaffian for 2×2, 4×4 and 6×6 matrices, written out
/// monomial by monomial. `a(i, j)` is 1-based.
pub fn pfaffian_expansion(m: &SkewMatrix) -> Option<C64> {
    let a = |i: usize, j: usize| m.get(i - 1, j - 1);
    match m.n() {
        2 => Some(a(1, 2)),
        4 => Some(a(1, 2) * a(3, 4) - a(1, 3) * a(2, 4) + a(1, 4) * a(2, 3)),
        6 => Some(
            a(1, 2) * a(3, 4) * a(5, 6) - a(1, 2) * a(3, 5) * a(4, 6) + a(1, 2) * a(3, 6) * a(4, 5)
                - a(1, 3) * a(2, 4) * a(5, 6)
                + a(1, 3) * a(2, 5) * a(4, 6)
                - a(1, 3) * a(2, 6) * a(4, 5)
                + a(1, 4) * a(2, 3) * a(5, 6)
                - a(1, 4) * a(2, 5) * a(3, 6)
                + a(1, 4) * a(2, 6) * a(3, 5)
                - a(1, 5) * a(2, 3) * a(4, 6)
                + a(1, 5) * a(2, 4) * a(3, 6)
                - a(1, 5) * a(2, 6) * a(3, 4)
                + a(1, 6) * a(2, 3) * a(4, 5)
                - a(1, 6) * a(2, 4) * a(3, 5)
                + a(1, 6) * a(2, 5) * a(3, 4),
        ),
        _ => None,
    }
}

fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> SkewMatrix {
    SkewMatrix::from_upper(n, |_, _| rand_c(rng, 1.0))
}

pub fn pfaffian_suite(opts: &VerifyOptions) -> Result<Report> {
    let mut rep = Report::new("verify pfaffian");
    let mut g = rng(opts, 1);
    for n in [2, 4, 6, 8] {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let a = random_skew(&mut g, n);
            let pf = pfaffian(&a);
            worst = worst.max(rel(pf * pf, a.matrix().det()));
        }
        rep.below(format!("pf² = det, n = {n}, 100 matrices (relative)"), worst, 1e-9);
    }
    let odd_nonzero = [1, 3, 5, 7]
        .iter()
        .flat_map(|&n| (0..25).map(move |_| n))
        .filter(|&n| pfaffian(&random_skew(&mut g, n)) != c64(0.0, 0.0))
        .count();
    rep.holds("odd sizes give exactly 0", odd_nonzero == 0);
    for n in [2, 4, 6] {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let a = random_skew(&mut g, n);
            let e = pfaffian_expansion(&a).expect("even size ≤ 6");
            worst = worst.max((pfaffian(&a) - e).norm());
        }
        rep.below(format!("term expansion = elimination, n = {n}, 20 matrices"), worst, 1e-10);
    }
    Ok(rep)
}

/// Square, 2:1 and 3:1 rectangles, a rhombic and a generic lattice.
pub fn elliptic_reference_lattices() -> Vec<(&'static str, C64, C64)> {
    vec![
        ("square", c64(1.0, 0.0), c64(0.0, 1.0)),
        ("rect 2:1", c64(1.0, 0.0), c64(0.0, 2.0)),
        ("rect 3:1", c64(1.0, 0.0), c64(0.0, 3.0)),
        ("rhombic", c64(1.0, 0.0), C64::from_polar(1.0, 1.2)),
        ("generic", c64(0.8, 0.0), c64(0.3, 1.37)),
    ]
}

pub fn elliptic_suite(opts: &VerifyOptions) -> Result<Report> {
    let mut rep = Report::new("verify elliptic");
    let mut g = rng(opts, 2);
    for (name, w1, w3) in elliptic_reference_lattices() {
        let ctx = build_context(w1, w3)?;
        rep.below(format!("{name}: Legendre |η₁ω₃ − η₃ω₁ − iπ/2|"), ctx.legendre_residual(), 1e-10);
        let mut worst: f64 = 0.0;
        let mut n = 0;
        while n < 100 {
            let u = 2.0 * w1 * g.gen_range(0.0..1.0) + 2.0 * w3 * g.gen_range(0.0..1.0);
            if ctx.lattice.lattice_distance(u) < 0.05 {
                continue;
            }
            worst = worst.max(ctx.ode_residual(u));
            n += 1;
        }
        rep.below(format!("{name}: ℘ ODE residual, 100 points"), worst, 1e-8);
        let esum = (ctx.e1 + ctx.e2 + ctx.e3).norm() / ctx.e1.norm().max(1.0);
        rep.below(format!("{name}: e₁ + e₂ + e₃"), esum, 1e-10);
    }
    Ok(rep)
}

/// Extends `pts` to `n` points with pairwise distance at least `sep`.
fn spread_points(
    rng: &mut ChaCha8Rng,
    mut pts: Vec<C64>,
    n: usize,
    sep: f64,
    draw: impl Fn(&mut ChaCha8Rng) -> C64,
    dist: impl Fn(C64, C64) -> f64,
) -> Vec<C64> {
    while pts.len() < n {
        let z = draw(rng);
        if pts.iter().all(|&p| dist(p, z) >= sep) {
            pts.push(z);
        }
    }
    pts
}

fn compare_pairs(rep: &mut Report, label: &str, sections: &[SpinorSection], count: &mut usize) -> Result<()> {
    let mut worst: f64 = 0.0;
    for s in sections {
        for t in sections {
            let a = omega_pair(s, t)?;
            let b = omega_qres_oracle(s, t)?;
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
            *count += 1;
        }
    }
    rep.below(format!("{label}: omega_pair vs qres oracle ({} pairs)", sections.len().pow(2)), worst, 1e-6);
    Ok(())
}

pub fn omega_suite(opts: &VerifyOptions) -> Result<Report> {
    let mut rep = Report::new("verify omega");
    let mut g = rng(opts, 3);
    let mut count = 0;
    for n in [4, 6] {
        let pts = spread_points(&mut g, Vec::new(), n - 1, 0.3, |r| rand_c(r, 1.5), |a, b| (a - b).norm());
        let mut ends: Vec<EndPoint> = pts.into_iter().map(EndPoint::Finite).collect();
        ends.push(EndPoint::Infinity);
        compare_pairs(&mut rep, &format!("sphere n = {n}"), &basis_f_sphere(ends)?, &mut count)?;
    }
    let ctx = Arc::new(build_context(c64(1.0, 0.0), c64(0.3, 1.2))?);
    let draw = |r: &mut ChaCha8Rng| c64(r.gen_range(-1.0..1.0), 0.0) + ctx.omega3() * r.gen_range(-1.0..1.0);
    let tdist = |a: C64, b: C64| ctx.lattice.lattice_distance(a - b);
    for n in [3, 4] {
        // The twisted basis is built with an end at 0.
        let pts = spread_points(&mut g, vec![c64(0.0, 0.0)], n, 0.3, draw, tdist);
        compare_pairs(
            &mut rep,
            &format!("twisted torus n = {n}"),
            &basis_f_torus_twisted(ctx.clone(), &pts)?,
            &mut count,
        )?;
    }
    // Paired ends a, −a must avoid the half-periods and each other.
    let half = [c64(0.0, 0.0), ctx.omega1(), ctx.omega2(), ctx.omega3()];
    let mut a: Vec<C64> = Vec::new();
    while a.len() < 2 {
        let z = draw(&mut g);
        let images = |z: C64| [z, -z];
        let clear = half.iter().all(|&h| tdist(z, h) > 0.25)
            && a.iter().all(|&p| images(p).iter().all(|&q| images(z).iter().all(|&w| tdist(q, w) > 0.3)));
        if clear {
            a.push(z);
        }
    }
    let pb = basis_f_paired(ctx.clone(), 2, &a)?;
    compare_pairs(&mut rep, "untwisted torus, paired n = 4", &pb.sections, &mut count)?;
    rep.above("pair comparisons", count as f64, 59.5);
    Ok(rep)
}

pub fn sphere4_suite() -> Result<Report> {
    let mut rep = Report::new("verify sphere4");
    let fam = sphere4_solve()?;
    let a = fam.parameter[0];
    rep.below("a = (√3 + i)/2", (a - c64(3f64.sqrt() / 2.0, 0.5)).norm(), 1e-12);
    rep.below("|pf Ω|", fam.pfaffian.norm(), 1e-10);
    rep.holds("dim K = 2", fam.k_basis.len() == 2);
    rep.below("K vs reference t₁, t₂ (coefficients)", fam.reference_coeff_error, 1e-8);
    rep.holds("all four ends planar", fam.planar_ends.len() == 4 && fam.planar_ends.iter().all(|&b| b));
    rep.put("a", a).put("pfaffian", fam.pfaffian).put("quartic_roots", &fam.quartic_roots);
    Ok(rep)
}

pub fn sphere6_suite(opts: &VerifyOptions) -> Result<Report> {
    let mut rep = Report::new("verify sphere6");
    let mut g = rng(opts, 5);
    let mut ratios = Vec::new();
    while ratios.len() < 10 {
        let s: [C64; 3] = std::array::from_fn(|_| rand_c(&mut g, 1.5));
        let (Ok((pf, v)), Ok(closed)) = (sphere6_numeric_pfaffian(s), sphere6_pfaffian(s)) else {
            continue;
        };
        ratios.push(pf * v / closed);
    }
    let spread = ratios.iter().map(|&r| rel(r, ratios[0])).fold(0.0, f64::max);
    rep.below("pf Ω·Δ / (τ₁τ₃ + σ₁σ₃ − 20) spread, 10 σ", spread, 1e-6);
    rep.put("ratio", ratios[0]);
    let mut worst: f64 = 0.0;
    let mut points = 0;
    let special = [c64(0.0, 0.0), c64(2.0 * 5f64.sqrt() / 3.0, 0.0), c64(0.0, 0.0)];
    let mut sigmas = vec![special];
    for _ in 0..3 {
        let (s1, s3) = (rand_c(&mut g, 1.0), rand_c(&mut g, 1.0));
        sigmas.extend(sphere6_on_variety(s1, s3).map(|s2| [s1, s2, s3]));
    }
    for s in sigmas {
        let k = sphere6_K_basis(s, 1e-9)?;
        worst = worst.max(k.kernel_residual[0]).max(k.kernel_residual[1]);
        points += 1;
    }
    rep.below(format!("reference K basis in ker Ω ({points} points on the variety)"), worst, 1e-8);
    Ok(rep)
}

pub fn rp2_suite(opts: &VerifyOptions) -> Result<Report> {
    let mut rep = Report::new("verify rp2");
    let s = 5f64.sqrt() / 3.0;
    rep.below("Γ(√5/3, 0, 0)", rp2_variety([s, 0.0, 0.0]).abs(), 1e-12);
    let group = rp2_group();
    rep.holds("24 symmetries", group.len() == 24);
    let mut g = rng(opts, 6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c: [f64; 3] = std::array::from_fn(|_| g.gen_range(-1.0..1.0));
        let v = rp2_variety(c);
        for h in &group {
            worst = worst.max((rp2_variety(h.apply(c)) - v).abs());
        }
    }
    rep.below("Γ invariant under the group, 20 points", worst, 1e-12);
    let (l, _) = rp2_symmetry_group([s, 0.0, 0.0], 1e-12)?;
    rep.holds("stabilizer of (√5/3, 0, 0) is Z2×Z2", l == SymmetryLabel::Z2xZ2);
    let c = rp2_d3_point()?;
    rep.below("Γ(c, c, −c)", rp2_variety([c, c, -c]).abs(), 1e-12);
    let (l, _) = rp2_symmetry_group([c, c, -c], 1e-12)?;
    rep.holds("stabilizer of (c, c, −c) is S3 = D3", l == SymmetryLabel::S3);
    rep.put("d3_point", c);
    Ok(rep)
}

/// The reference torus table: q on 0, α₁, α₂, α₃ and Arf.
pub const TORUS_TABLE: [([u8; 4], i8); 4] =
    [([0, 1, 1, 1], -1), ([0, 1, 0, 0], 1), ([0, 0, 1, 0], 1), ([0, 0, 0, 1], 1)];

fn subsets_up_to(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n)
        .filter(move |m| m.count_ones() as usize <= k)
        .map(move |m| (0..n).filter(|i| m & (1 << i) != 0).collect())
}

pub fn arf_suite() -> Result<Report> {
    let mut rep = Report::new("verify arf");
    let mut mismatches = 0;
    let mut cases = 0;
    for g in 0..=3 {
        for b in subsets_up_to(2 * g + 1, g) {
            let spin = HyperellipticSpin::new(g, &b)?;
            if arf_bruteforce(&spin)? != arf_closed_form(g, b.len())? {
                mismatches += 1;
            }
            cases += 1;
        }
    }
    rep.holds(format!("brute-force Arf = closed form, g ≤ 3 ({cases} cases)"), mismatches == 0);
    let table = torus_spin_table();
    let exact = table.len() == 4 && table.iter().zip(TORUS_TABLE).all(|(r, (q, arf))| r.q == q && r.arf == arf);
    rep.holds("torus table reproduced exactly", exact);
    rep.put("torus_table", &table);
    let mut law = true;
    for g in 0..=2 {
        for b in subsets_up_to(2 * g + 1, g) {
            let spin = HyperellipticSpin::new(g, &b)?;
            law &= quadratic_law_holds(&spin);
            law &= q_value(&spin, 0)? == 0;
        }
    }
    rep.holds("quadratic law, g ≤ 2 exhaustive", law);
    for g in 0..=3 {
        let counted = spin_structure_counts(g)?;
        let formula = spin_structure_formula(g);
        rep.holds(format!("g = {g}: {} even, {} odd spin structures", counted.0, counted.1), counted == formula);
    }
    Ok(rep)
}

pub fn torus4_suite() -> Result<Report> {
    let mut rep = Report::new("verify torus4");
    let names = ["square", "rect 2:1", "generic"];
    for (name, ctx) in names.iter().zip(torus4_reference_lattices()?) {
        let t = torus4_construct(ctx, (1, 2, 3))?;
        rep.below(format!("{name}: closed-form periods vs quadrature (relative)"), t.period_rel_err, 1e-6);
        rep.below(format!("{name}: off-diagonal periods"), t.offdiag_max, 1e-8);
        rep.below(format!("{name}: period equation residual"), t.period1_residual, 1e-7);
        if *name == "square" {
            rep.above("square: |branch condition| away from 0", t.branch_residual.norm(), 1e-3);
            rep.put("square_x", t.x).put("square_branch_residual", t.branch_residual);
        }
    }
    Ok(rep)
}

pub fn klein4_suite(opts: &VerifyOptions) -> Result<Report> {
    let mut rep = Report::new("verify klein4");
    let mut g = rng(opts, 9);
    let mut worst: f64 = 0.0;
    let mut worst_matrix: f64 = 0.0;
    for _ in 0..10 {
        let r = c64(g.gen_range(0.3..2.0), g.gen_range(-1.5..1.5));
        worst = worst.max(rel(klein_det_w_polynomial(r), klein_det_w_factored(r)));
        worst_matrix = worst_matrix.max(rel(klein_w_reference(r).det(), klein_det_w_matrix(r)));
    }
    rep.below("det W: polynomial = factored form, 10 random r", worst, 1e-8);
    let two = c64(2.0, 0.0);
    let want = c64(1299.0 * 1299.0 / 225.0, 0.0);
    rep.below(
        "det W at r = 2 is 1299²/225",
        rel(klein_det_w_polynomial(two), want).max(rel(klein_det_w_factored(two), want)),
        1e-8,
    );
    rep.below("det of the W matrix = numerator² / (r⁴ − 1)⁴", worst_matrix, 1e-8);
    rep.put("det_w_matrix_at_2", klein_w_reference(two).det());

    let k = klein4_construct()?;
    rep.holds("rank Ω = 4 at the fourth-quadrant root", k.rank == 4);
    rep.below("solved period equation residual", k.solution.equation_residual, 1e-8);
    let q = &k.solution;
    let quad = (0..3).map(|i| rel(q.p_quadrature[i], 2.0 * q.p_reference[i])).fold(0.0, f64::max);
    rep.below("quadrature periods = 2 × reference A, B, C combination", quad, 1e-8);
    rep.below("γ₁: ∫s₁² and ∫s₁s₂ vanish", q.gamma1_s1s1.max(q.gamma1_s1s2), 1e-8);
    rep.below("γ₃ period conditions hold automatically", q.gamma3_residual, 1e-8);
    rep.below("deck compatibility s₂ = i·conj(I*s₁)", k.deck_residual, 1e-8);
    rep.holds("branch scan empty", k.branch_points.is_empty());
    rep.put("r", k.r).put("x", q.x).put("branch_margin", k.branch_margin);
    Ok(rep)
}

fn sphere4_data() -> Result<WeierstrassData> {
    let fam = sphere4_solve()?;
    WeierstrassData::with_default_clearance(fam.k_basis[0].section.clone(), fam.k_basis[1].section.clone())
}

pub fn geometry_suite(opts: &VerifyOptions) -> Result<Report> {
    let mut rep = Report::new("verify geometry");
    let e = enneper_data()?;
    let m = integrate_surface(&e, GridSpec::square(1.0, 8), c64(0.0, 0.0), opts.exec)?;
    let (x0, x1) = (m.at(4, 4), m.at(8, 4));
    let endpoint = match (x0, x1) {
        (Some(a), Some(b)) => (0..3).map(|k| (b[k] - a[k] - [2.0 / 3.0, 0.0, 1.0][k]).abs()).fold(0.0, f64::max),
        _ => f64::INFINITY,
    };
    rep.below("Enneper X(1) − X(0) = (2/3, 0, 1)", endpoint, 1e-8);

    let d = sphere4_data()?;
    let ends_worst = end_periods(&d, 0.1)?.iter().flat_map(|p| p.real_period).map(f64::abs).fold(0.0, f64::max);
    let grid = GridSpec::square(1.5, 30);
    let mesh = integrate_surface(&d, grid, c64(0.71, -0.93), opts.exec)?;
    let cycles = random_cycle_residuals(&d, grid, 20, opts.seed)?.into_iter().fold(mesh.closure_max, f64::max);
    rep.below("sphere4: Re ∮ω around each end", ends_worst, 1e-7);
    rep.below("sphere4: mesh cell and random loop periods", cycles, 1e-7);
    rep.put("sphere4_mesh_scale", mesh.scale);

    let mut g = rng(opts, 10);
    let probes: Vec<C64> = (0..200).map(|_| rand_c(&mut g, 1.5)).filter(|&z| d.end_distance(z) > 0.05).collect();
    let null = null_curve_residual(&d, &probes).max(null_curve_residual(&e, &probes));
    rep.below(format!("null curve ω·ω ({} samples)", probes.len()), null, 1e-10);

    let end = d.divisor().finite()[0];
    let fit = planar_end_fit(&d, end, &[0.1, 0.05, 0.025], 64)?;
    rep.holds("planar-end plane residual decreases over 3 radii", fit[0] > fit[1] && fit[1] > fit[2]);
    rep.put("planar_end_fit", &fit);
    Ok(rep)
}

pub fn nonexistence_suite(opts: &VerifyOptions) -> Result<Report> {
    let mut rep = Report::new("verify nonexistence");
    for n in [2, 3, 5, 7] {
        let s = sphere_nonexistence_trials(n, 100, opts.seed.wrapping_add(n as u64), opts.exec)?;
        rep.holds(
            format!("n = {n}: dim K < 2 in {} trials (max {})", s.trials, s.max_dim_k),
            s.max_dim_k < 2 && s.errors == 0,
        );
        rep.holds(format!("n = {n}: n − dim K even"), s.parity_failures == 0);
        rep.put(&format!("dim_k_counts_n{n}"), &s.dim_k_counts);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_examples() {
        let m = SkewMatrix::from_upper(4, |i, j| match (i, j) {
            (0, 1) | (2, 3) => c64(1.0, 0.0),
            _ => c64(0.0, 0.0),
        });
        assert_eq!(pfaffian_expansion(&m), Some(c64(1.0, 0.0)));
        assert!(pfaffian_expansion(&SkewMatrix::from_upper(8, |_, _| c64(1.0, 0.0))).is_none());
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &VerifyOptions::default()).is_err());
    }
}
