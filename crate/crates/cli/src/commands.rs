//! One function per subcommand. Each returns a report whose checks carry the
//! residuals of the identities it verified.

use crate::parse::DomainSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinor_minimal::arf::{
    arf_bruteforce, arf_closed_form, q_value, quadratic_law_holds, render_torus_table, spin_structure_counts,
    spin_structure_formula, torus_spin_table, HyperellipticSpin,
};
use spinor_minimal::elliptic::build_context;
use spinor_minimal::moduli::{
    klein4_construct, klein_det_w_factored, klein_det_w_polynomial, rp2_boundary_scan, rp2_group, rp2_symmetry_group,
    rp2_variety, sphere4_solve, sphere6_K_basis, sphere6_numeric_pfaffian, sphere6_on_variety, sphere6_pfaffian,
    torus4_construct, torus_loop,
};
use spinor_minimal::numkit::QuadraturePath;
use spinor_minimal::par::Exec;
use spinor_minimal::report::Report;
use spinor_minimal::spinor::{
    basis_f_paired, basis_f_sphere, basis_f_torus_twisted, basis_f_torus_untwisted, extract_k, omega_matrix,
    omega_qres_matrix, EndPoint,
};
use spinor_minimal::surface::{
    branch_points, end_periods, enneper_data, export_obj, integrate_surface, period_vector, write_csv, write_metadata,
    GridSpec, MeshMetadata, WeierstrassData,
};
use spinor_minimal::verify::{run_suite, VerifyOptions, SUITES, TORUS_TABLE};
use spinor_minimal::{c64, Error, C64};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Settings shared by all subcommands.
#[derive(Clone, Debug)]
pub struct Settings {
    pub tol: f64,
    pub grid: Option<usize>,
    pub eps: Option<f64>,
    pub seed: u64,
    pub exec: Exec,
    pub mesh: Option<PathBuf>,
    pub csv: bool,
}

/// A finished command: its report plus optional text shown above the checks.
pub struct Outcome {
    pub report: Report,
    pub text: Option<String>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, text: None }
    }
}

pub type CmdResult = Result<Outcome, Error>;

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// A surface ready for meshing.
pub struct MeshJob {
    pub label: &'static str,
    pub data: WeierstrassData,
    pub grid: GridSpec,
    pub basepoint: C64,
    /// Closed loops besides the small circles around the ends.
    pub loops: Vec<QuadraturePath>,
}

fn clearance(data: WeierstrassData, eps: Option<f64>) -> Result<WeierstrassData, Error> {
    match eps {
        Some(e) => WeierstrassData::new(data.s1, data.s2, e),
        None => Ok(data),
    }
}

/// Integrates the job, writes OBJ plus `<stem>.meta.json` (and CSV on request),
/// and records the closure, period and branch checks in `rep`.
pub fn run_mesh(job: MeshJob, path: &Path, s: &Settings, rep: &mut Report) -> Result<(), Error> {
    let data = clearance(job.data, s.eps)?;
    let mesh = integrate_surface(&data, job.grid, job.basepoint, s.exec)?;
    let scale = mesh.scale.max(1.0);
    let sep = data.divisor().min_separation();
    let radius = if sep.is_finite() { (0.25 * sep).min(0.1) } else { 0.1 };
    let mut periods = end_periods(&data, radius)?;
    for l in &job.loops {
        periods.push(period_vector(&data, l)?);
    }
    let period_max = periods.iter().flat_map(|p| p.real_period).map(f64::abs).fold(0.0, f64::max);
    let branch = branch_points(&data, job.grid)?;
    export_obj(&mesh, path)?;
    let meta = MeshMetadata::new(job.label, &mesh, data.end_clearance, period_max, branch.points.len());
    write_metadata(&meta, &path.with_extension("meta.json"))?;
    if s.csv {
        write_csv(&mesh, &path.with_extension("csv"))?;
    }
    rep.below("mesh: cell closure |Re ∮ω| / max(1, |X|)", mesh.closure_max / scale, 1e-7);
    rep.below("mesh: loop periods |Re ∮ω| / max(1, |X|)", period_max / scale, 1e-7);
    rep.holds(format!("mesh: no branch points ({} candidates refined)", branch.candidates), branch.points.is_empty());
    rep.put("mesh", &meta).put("mesh_path", path.display().to_string());
    Ok(())
}

pub fn sphere4_mesh_job(grid: usize) -> Result<MeshJob, Error> {
    let fam = sphere4_solve()?;
    let data = WeierstrassData::with_default_clearance(fam.k_basis[0].section.clone(), fam.k_basis[1].section.clone())?;
    Ok(MeshJob {
        label: "sphere4",
        data,
        grid: GridSpec::square(1.5, grid),
        basepoint: c64(0.71, -0.93),
        loops: Vec::new(),
    })
}

pub fn enneper_mesh_job(grid: usize) -> Result<MeshJob, Error> {
    Ok(MeshJob {
        label: "enneper",
        data: enneper_data()?,
        grid: GridSpec::square(1.0, grid),
        basepoint: c64(0.0, 0.0),
        loops: Vec::new(),
    })
}

fn torus_job(
    label: &'static str,
    data: WeierstrassData,
    ctx: &spinor_minimal::elliptic::EllipticContext,
    ends: &[C64],
    grid: usize,
) -> MeshJob {
    let (w1, w3) = (ctx.omega1(), ctx.omega3());
    MeshJob {
        label,
        data,
        // The offset keeps grid vertices and lines off the half-periods.
        grid: GridSpec::torus(w1, w3, -w1 - w3 + 0.0123 * w1 + 0.0071 * w3, grid),
        basepoint: 0.37 * w1 + 0.29 * w3,
        loops: vec![torus_loop(ctx, 1, ends), torus_loop(ctx, 3, ends)],
    }
}

pub fn cmd_sphere4(s: &Settings) -> CmdResult {
    let mut rep = Report::new("sphere4");
    let fam = sphere4_solve()?;
    rep.below("|pf Ω| at the solved end configuration", fam.pfaffian.norm(), 1e-10);
    rep.holds("dim K = 2", fam.k_basis.len() == 2);
    rep.below("K vs reference t₁, t₂ (coefficients)", fam.reference_coeff_error, 1e-8);
    rep.holds("all four ends planar", fam.planar_ends.iter().all(|&b| b));
    rep.holds("the four roots give congruent configurations", fam.roots_congruent);
    rep.below("residue of t₁² at 0", fam.residue_t1_sq_at_0, 1e-12);
    rep.put("a", fam.parameter[0])
        .put("quartic", &fam.quartic)
        .put("quartic_roots", &fam.quartic_roots)
        .put("pfaffian", fam.pfaffian)
        .put("k_coefficients", fam.k_basis.iter().map(|k| k.coeffs.clone()).collect::<Vec<_>>());
    if let Some(path) = &s.mesh {
        run_mesh(sphere4_mesh_job(s.grid.unwrap_or(60))?, path, s, &mut rep)?;
    }
    Ok(rep.into())
}

pub fn cmd_sphere6(sigma: Option<[C64; 3]>, scan: Option<usize>, s: &Settings) -> CmdResult {
    let mut rep = Report::new("sphere6");
    if let Some(n) = scan {
        let mut g = ChaCha8Rng::seed_from_u64(s.seed);
        let mut points = Vec::new();
        let mut worst_kernel: f64 = 0.0;
        let mut ratios = Vec::new();
        while points.len() < n {
            let s1 = c64(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
            let s3 = c64(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
            let s2 = sphere6_on_variety(s1, s3)[0];
            let Ok(k) = sphere6_K_basis([s1, s2, s3], s.tol) else { continue };
            worst_kernel = worst_kernel.max(k.kernel_residual[0]).max(k.kernel_residual[1]);
            let off = [s1, s2 + 0.5, s3];
            if let (Ok((pf, v)), Ok(c)) = (sphere6_numeric_pfaffian(off), sphere6_pfaffian(off)) {
                ratios.push(pf * v / c);
            }
            points.push([s1, s2, s3]);
        }
        let spread = ratios.iter().map(|&r| rel(r, ratios[0])).fold(0.0, f64::max);
        rep.below(format!("reference K basis in ker Ω ({n} points on the variety)"), worst_kernel, 1e-8);
        rep.below(format!("pfaffian ratio spread ({} points off the variety)", ratios.len()), spread, 1e-6);
        rep.put("sigma", &points).put("ratio", ratios.first());
        return Ok(rep.into());
    }
    let sigma = sigma.ok_or_else(|| Error::InvalidInput("sphere6 needs σ₁ σ₂ σ₃ or --scan".into()))?;
    let closed = sphere6_pfaffian(sigma)?;
    let (pf, v) = sphere6_numeric_pfaffian(sigma)?;
    rep.put("sigma", sigma).put("pfaffian_closed", closed).put("pfaffian_numeric", pf).put("vandermonde", v);
    // pf Ω · Δ = −(τ₁τ₃ + σ₁σ₃ − 20) identically.
    rep.below("pf Ω · Δ + closed form (relative)", (pf * v + closed).norm() / closed.norm().max(1.0), 1e-9);
    let on = closed.norm() <= 1e-8 * (1.0 + sigma.iter().map(|z| z.norm_sqr()).sum::<f64>()).powi(2);
    rep.put("on_variety", on);
    if on {
        let k = sphere6_K_basis(sigma, s.tol)?;
        rep.below("reference K basis in ker Ω", k.kernel_residual[0].max(k.kernel_residual[1]), 1e-8);
        rep.below("K sections have vanishing constant terms", k.k_residual[0].max(k.k_residual[1]), 1e-8);
        rep.holds("K sections independent", k.evaluation_rank == 2);
        rep.put("ends", &k.ends).put("k_coefficients", &k.coeffs);
    }
    Ok(rep.into())
}

pub fn cmd_rp2(c: Option<[f64; 3]>, boundary: Option<usize>, s: &Settings) -> CmdResult {
    let mut rep = Report::new("rp2");
    if let Some(n) = boundary {
        let pts = rp2_boundary_scan(n)?;
        let worst = pts.iter().map(|p| p.variety.abs()).fold(0.0, f64::max);
        rep.below(format!("boundary points on Γ ({} points)", pts.len()), worst, 1e-9);
        rep.holds("every boundary point has a nontrivial stabilizer", pts.iter().all(|p| p.label.name() != "trivial"));
        rep.put("points", &pts);
        return Ok(rep.into());
    }
    let c = c.ok_or_else(|| Error::InvalidInput("rp2 needs c₁ c₂ c₃ or --boundary-scan".into()))?;
    let v = rp2_variety(c);
    let inv = rp2_group().iter().map(|h| (rp2_variety(h.apply(c)) - v).abs()).fold(0.0, f64::max);
    rep.below("Γ invariant under the 24 symmetries", inv, 1e-12);
    rep.put("c", c).put("variety", v);
    let on = v.abs() <= s.tol.max(1e-12);
    rep.put("on_surface", on);
    if on {
        let (label, stab) = rp2_symmetry_group(c, s.tol.max(1e-12))?;
        rep.put("stabilizer", label.name()).put("stabilizer_elements", &stab);
    }
    Ok(rep.into())
}

pub fn cmd_torus4(w1: C64, w3: C64, choice: (usize, usize, usize), s: &Settings) -> CmdResult {
    let mut rep = Report::new("torus4");
    let ctx = Arc::new(build_context(w1, w3)?);
    let t = torus4_construct(ctx.clone(), choice)?;
    rep.holds("dim K = 3", t.k_dim == 3);
    rep.below("t̂ basis vs ζ formula", t.t_hat_formula_residual, 1e-9);
    rep.below("t̂ᵢt̂ⱼ product identity", t.square_identity_residual, 1e-8);
    rep.below("closed-form periods vs quadrature (relative)", t.period_rel_err, 1e-6);
    rep.below("off-diagonal periods", t.offdiag_max, 1e-8);
    rep.below("period equation residual", t.period1_residual, 1e-7);
    rep.below("t̂ values at the zeros", t.zero_value_residual, 1e-8);
    let scale = t.branch_residual.norm().max(1.0);
    let e = [ctx.e(choice.0), ctx.e(choice.1)];
    rep.below(
        "two forms of the branch condition agree",
        (t.branch_residual_alt - (e[1] - e[0]) * t.branch_residual).norm() / scale,
        1e-8,
    );
    rep.put("unbranched", t.branch_residual.norm() > 1e-3);
    rep.put("choice", [choice.0, choice.1, choice.2])
        .put("ends", t.ends)
        .put("x_squared", t.x_sq)
        .put("x", t.x)
        .put("branch_residual", t.branch_residual)
        .put("min_s1_at_s2_zeros", t.s1_at_s2_zeros)
        .put("periods_closed", t.periods_closed)
        .put("periods_quadrature", t.periods_quadrature);
    if let Some(path) = &s.mesh {
        let data = WeierstrassData::with_default_clearance(t.s1.clone(), t.s2.clone())?;
        run_mesh(torus_job("torus4", data, &ctx, &t.ends, s.grid.unwrap_or(64)), path, s, &mut rep)?;
    }
    Ok(rep.into())
}

pub fn cmd_klein4(s: &Settings) -> CmdResult {
    let mut rep = Report::new("klein4");
    let k = klein4_construct()?;
    rep.below("ends match the table", k.table_residual, 1e-9);
    rep.holds("deck map permutes the ends", k.deck_map_ok);
    rep.holds("rank Ω = 4", k.rank == 4);
    rep.below("W = −½ W_reference", k.w_reference_residual, 1e-9);
    rep.below("ŝ₁ … ŝ₄ in ker Ω", k.kernel_residuals.iter().copied().fold(0.0, f64::max), 1e-9);
    rep.below("ŝ₃, ŝ₄ as deck lifts", k.lift_residual, 1e-9);
    let [a, b, c] = k.period_coeffs_reference;
    let coeff = rel(k.period_coeffs[0], a).max(rel(k.period_coeffs[1], b)).max(rel(k.period_coeffs[2], c));
    rep.below("A, B, C from residues vs reference", coeff, 1e-9);
    rep.below("D = 0", k.period_coeffs[3].norm() / c.norm(), 1e-9);
    rep.below("ŝ₁² expansion in ℘", k.expansion_residual, 1e-9);
    let q = &k.solution;
    rep.below("period equation residual", q.equation_residual, 1e-8);
    let quad = (0..3).map(|i| rel(q.p_quadrature[i], 2.0 * q.p_reference[i])).fold(0.0, f64::max);
    rep.below("quadrature periods = 2 × reference combination", quad, 1e-8);
    rep.below("γ₁ periods vanish", q.gamma1_s1s1.max(q.gamma1_s1s2), 1e-8);
    rep.below("γ₃ period conditions", q.gamma3_residual, 1e-8);
    rep.below("s₂ = i·conj(I*s₁)", k.deck_residual, 1e-8);
    rep.holds("no branch points", k.branch_points.is_empty());
    rep.holds("eight planar ends", k.planar_ends == 8);
    let det = klein_det_w_polynomial(k.r).norm().max(klein_det_w_factored(k.r).norm());
    rep.below("det W vanishes at r (both closed forms)", det, 1e-8);
    rep.put("r", k.r)
        .put("ends", &k.ends)
        .put("x", q.x)
        .put("period_coeffs", k.period_coeffs)
        .put("period_coeffs_reference", k.period_coeffs_reference)
        .put("branch_margin", k.branch_margin)
        .put("w", k.w.to_rows());
    if let Some(path) = &s.mesh {
        let data = WeierstrassData::with_default_clearance(k.s1.clone(), k.s2.clone())?;
        run_mesh(torus_job("klein4", data, &k.ctx, &k.ends, s.grid.unwrap_or(64)), path, s, &mut rep)?;
    }
    Ok(rep.into())
}

fn class_labels(spin: &HyperellipticSpin, c: u32) -> Vec<String> {
    (0..spin.size_a()).filter(|i| c & (1 << i) != 0).map(|i| spin.branch[i].clone()).collect()
}

pub fn cmd_arf(g: usize, b: Option<Vec<usize>>) -> CmdResult {
    let mut rep = Report::new(format!("arf {g}"));
    if let Some(b) = b {
        let spin = HyperellipticSpin::new(g, &b)?;
        let closed = arf_closed_form(g, spin.size_b())?;
        rep.put("b", spin.size_b()).put("arf_closed_form", closed);
        if g <= 6 {
            let brute = arf_bruteforce(&spin)?;
            rep.holds("brute-force Arf = closed form", brute == closed);
            rep.holds("quadratic law", quadratic_law_holds(&spin));
            rep.put("arf_bruteforce", brute);
            if g <= 3 {
                let q: Vec<_> =
                    spin.homology().map(|c| (class_labels(&spin, c), q_value(&spin, c).unwrap_or(0))).collect();
                rep.put("q", q);
            }
        }
        return Ok(rep.into());
    }
    if g == 1 {
        let table = torus_spin_table();
        let exact = table.iter().zip(TORUS_TABLE).all(|(r, (q, arf))| r.q == q && r.arf == arf);
        rep.holds("torus table reproduced exactly", table.len() == 4 && exact);
        rep.put("table", &table);
        return Ok(Outcome { text: Some(render_torus_table(&table)), report: rep });
    }
    if g > 4 {
        return Err(Error::InvalidInput("enumeration over all B is limited to g ≤ 4; pass a branch spec".into()));
    }
    let (plus, minus) = spin_structure_counts(g)?;
    rep.holds("counts match 2^{2g−1} ± 2^{g−1}", (plus, minus) == spin_structure_formula(g));
    let mut agree = true;
    for mask in 0u32..1 << (2 * g + 1) {
        if mask.count_ones() as usize > g {
            continue;
        }
        let idx: Vec<usize> = (0..2 * g + 1).filter(|i| mask & (1 << i) != 0).collect();
        let spin = HyperellipticSpin::new(g, &idx)?;
        agree &= arf_bruteforce(&spin)? == arf_closed_form(g, idx.len())?;
    }
    rep.holds("brute-force Arf = closed form for every B", agree);
    rep.put("even", plus).put("odd", minus);
    Ok(rep.into())
}

pub fn cmd_omega(spec: &DomainSpec, lattice: (C64, C64), s: &Settings) -> CmdResult {
    let mut rep = Report::new("omega");
    let ctx = || -> Result<_, Error> { Ok(Arc::new(build_context(lattice.0, lattice.1)?)) };
    let (basis, h) = match spec {
        DomainSpec::Sphere { finite, infinity } => {
            let mut pts: Vec<EndPoint> = finite.iter().map(|&z| EndPoint::Finite(z)).collect();
            if *infinity {
                pts.push(EndPoint::Infinity);
            }
            (basis_f_sphere(pts)?, Vec::new())
        }
        DomainSpec::Twisted { ends } => {
            let mut h = vec![c64(0.0, 0.0); ends.len()];
            h[0] = c64(1.0, 0.0);
            (basis_f_torus_twisted(ctx()?, ends)?, vec![h])
        }
        DomainSpec::Untwisted { r, ends } => (basis_f_torus_untwisted(ctx()?, *r, ends)?, Vec::new()),
        DomainSpec::Paired { r, a } => (basis_f_paired(ctx()?, *r, a)?.sections, Vec::new()),
    };
    let oracle = omega_qres_matrix(&basis, s.exec)?;
    let form = omega_matrix(basis, h)?;
    let n = form.matrix.n();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = form.matrix.get(i, j);
            dev = dev.max((a - oracle[(i, j)]).norm() / a.norm().max(1.0));
        }
    }
    rep.below("Ω entries vs quadratic-residue oracle", dev, 1e-6);
    let rk = form.rank_kernel(s.tol);
    rep.holds("rank is even", rk.rank % 2 == 0);
    rep.put("n", n)
        .put("rank", rk.rank)
        .put("h_dim", form.h_dim)
        .put("pfaffian", form.pfaffian())
        .put("omega", form.matrix.matrix().to_rows());
    match extract_k(&form, s.tol) {
        Ok(k) => {
            rep.put("dim_k", k.len()).put("k_coefficients", k.iter().map(|x| x.coeffs.clone()).collect::<Vec<_>>());
        }
        Err(e) => {
            rep.put("k_error", e.to_string());
        }
    }
    Ok(rep.into())
}

pub fn cmd_mesh(construction: &str, out: &Path, s: &Settings) -> CmdResult {
    let mut rep = Report::new(format!("mesh {construction}"));
    let n = s.grid.unwrap_or(64);
    let job = match construction {
        "enneper" => enneper_mesh_job(n)?,
        "sphere4" => sphere4_mesh_job(n)?,
        "torus4" => {
            let ctx = Arc::new(build_context(c64(1.0, 0.0), c64(0.0, 1.0))?);
            let t = torus4_construct(ctx.clone(), (1, 2, 3))?;
            torus_job("torus4", WeierstrassData::with_default_clearance(t.s1, t.s2)?, &ctx, &t.ends, n)
        }
        "klein4" => {
            let k = klein4_construct()?;
            torus_job("klein4", WeierstrassData::with_default_clearance(k.s1, k.s2)?, &k.ctx, &k.ends, n)
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown construction {construction:?}; expected enneper, sphere4, torus4 or klein4"
            )))
        }
    };
    run_mesh(job, out, s, &mut rep)?;
    Ok(rep.into())
}

pub fn cmd_verify(suite: &str, s: &Settings) -> CmdResult {
    let opts = VerifyOptions { seed: s.seed, exec: s.exec };
    if suite != "all" {
        return Ok(run_suite(suite, &opts)?.into());
    }
    let mut rep = Report::new("verify all");
    for name in SUITES {
        let sub = run_suite(name, &opts)?;
        for c in sub.checks {
            let label = format!("{name}: {}", c.name);
            match c.mode {
                "above" => rep.above(label, c.value, c.tol),
                _ => rep.below(label, c.value, c.tol),
            };
        }
    }
    Ok(rep.into())
}
