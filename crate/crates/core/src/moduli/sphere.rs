//! Genus-zero families: four ends {a, 1/a, 0, ∞}, six ends {a₁…a₄, 0, ∞},
//! and random-end trials for the non-existence counts.

use super::kernel_residual;
use crate::numkit::linalg::rref;
use crate::numkit::{poly_roots, ComplexPolynomial};
use crate::par::{map_range, Exec};
use crate::spinor::{
    basis_f_sphere, check_planar_end, evaluation_rank, extract_k, omega_matrix, residue_pair, EndPoint, KernelSection,
    OmegaForm, SpinorSection,
};
use crate::{c64, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

const KERNEL_TOL: f64 = 1e-9;

fn sphere_basis(finite: &[C64]) -> Result<Vec<SpinorSection>> {
    let mut pts: Vec<EndPoint> = finite.iter().map(|&z| EndPoint::Finite(z)).collect();
    pts.push(EndPoint::Infinity);
    basis_f_sphere(pts)
}

/// Coefficients of num/den · φ over {φ/(z−e₁), …, φ/(z−e_m), φ} for the
/// finite ends e. Fails if num/den has poles off the ends or at ∞.
pub fn sphere_partial_fractions(num: &ComplexPolynomial, den: &ComplexPolynomial, ends: &[C64]) -> Result<Vec<C64>> {
    if num.degree() > den.degree() {
        return Err(Error::InvalidInput("pole at ∞ of order > 0".into()));
    }
    let dden = den.derivative();
    let mut coeffs = Vec::with_capacity(ends.len() + 1);
    for &e in ends {
        if den.eval(e).norm() <= 1e-10 * den.scale_at(e) {
            coeffs.push(num.eval(e) / dden.eval(e));
        } else {
            coeffs.push(C64::new(0.0, 0.0));
        }
    }
    let constant = if num.degree() == den.degree() {
        num.coeffs()[num.degree()] / den.coeffs()[den.degree()]
    } else {
        C64::new(0.0, 0.0)
    };
    coeffs.push(constant);
    for probe in [c64(0.137, 0.291), c64(-0.613, 0.402), c64(1.37, -0.88)] {
        let direct = num.eval(probe) / den.eval(probe);
        let rebuilt: C64 = ends.iter().zip(&coeffs).map(|(&e, c)| c / (probe - e)).sum::<C64>() + constant;
        if (direct - rebuilt).norm() > 1e-8 * (1.0 + direct.norm()) {
            return Err(Error::InvalidInput("rational function has poles away from the ends".into()));
        }
    }
    Ok(coeffs)
}

/// A genus-zero family with its Ω, kernel and the reference K basis.
#[derive(Clone, Debug)]
pub struct SphereFamily {
    pub n: usize,
    /// [a] for four ends, [σ₁, σ₂, σ₃] for six.
    pub parameter: Vec<C64>,
    pub form: OmegaForm,
    pub pfaffian: C64,
    pub k_basis: Vec<KernelSection>,
    pub reference: Vec<SpinorSection>,
    /// Max coefficient difference between the echelon forms of the reference and extracted bases.
    pub reference_coeff_error: f64,
    pub planar_ends: Vec<bool>,
    /// Monic pfaffian quartic in a, low degree first.
    pub quartic: Vec<C64>,
    pub quartic_roots: Vec<C64>,
    pub roots_congruent: bool,
    /// |res t₁²| at the end 0.
    pub residue_t1_sq_at_0: f64,
}

fn omega4(a: C64) -> Result<OmegaForm> {
    omega_matrix(sphere_basis(&[a, 1.0 / a, c64(0.0, 0.0)])?, Vec::new())
}

/// pf Ω(a)·a(a²−1) for the ends {a, 1/a, 0, ∞}, as a polynomial in a (low
/// degree first). The entries of Ω have denominators a and a − 1/a only, so
/// the product is polynomial; its coefficients come from a DFT of numeric
/// pfaffians on |a| = ½, and the tail above degree 4 is checked to vanish.
pub fn sphere4_pfaffian_polynomial() -> Result<Vec<C64>> {
    let n = 16;
    let rho = 0.5;
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let a = C64::from_polar(rho, 2.0 * PI * (k as f64 + 0.25) / n as f64);
        let pf = omega4(a)?.pfaffian();
        samples.push(pf * a * (a * a - 1.0));
    }
    let mut coeffs = Vec::with_capacity(n);
    for j in 0..n {
        let mut s = C64::new(0.0, 0.0);
        for (k, v) in samples.iter().enumerate() {
            let a = C64::from_polar(rho, 2.0 * PI * (k as f64 + 0.25) / n as f64);
            s += v * a.powi(-(j as i32));
        }
        coeffs.push(s / n as f64);
    }
    let lead = coeffs[..=4].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tail = coeffs[5..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    if tail > 1e-10 * lead {
        return Err(Error::Verification(format!("pfaffian numerator has degree > 4 (tail {tail:e})")));
    }
    coeffs.truncate(5);
    Ok(coeffs)
}

/// Four ends {a, 1/a, 0, ∞} on the zero set of the pfaffian, with the
/// first-quadrant root a = (√3+i)/2.
pub fn sphere4_solve() -> Result<SphereFamily> {
    let raw = sphere4_pfaffian_polynomial()?;
    let lead = raw[4];
    let quartic: Vec<C64> = raw.iter().map(|c| c / lead).collect();
    let roots = poly_roots(&ComplexPolynomial::new(quartic.clone())?)?;
    let a = *roots
        .iter()
        .filter(|z| z.re > 0.0 && z.im > 0.0)
        .max_by(|x, y| x.im.total_cmp(&y.im))
        .ok_or_else(|| Error::Verification("no first-quadrant root of the pfaffian quartic".into()))?;
    // Every root gives the same end set up to z ↦ ±z, which fixes 0 and ∞.
    let set = |b: C64| [b, 1.0 / b];
    let same = |x: [C64; 2], y: [C64; 2]| {
        ((x[0] - y[0]).norm() < 1e-9 && (x[1] - y[1]).norm() < 1e-9)
            || ((x[0] - y[1]).norm() < 1e-9 && (x[1] - y[0]).norm() < 1e-9)
    };
    let roots_congruent = roots.iter().all(|&b| same(set(b), set(a)) || same(set(b), set(-a)));

    let form = omega4(a)?;
    let pfaffian = form.pfaffian();
    let k_basis = extract_k(&form, KERNEL_TOL)?;
    let ends = form.divisor.finite();

    let s3 = 3f64.sqrt();
    let den_common = ComplexPolynomial::from_real(&[1.0, -s3, 1.0])?;
    let t1 = (ComplexPolynomial::from_real(&[-1.0, s3])?, den_common.mul(&ComplexPolynomial::from_real(&[0.0, 1.0])?));
    let t2 = (ComplexPolynomial::from_real(&[0.0, -s3, 1.0])?, den_common.clone());
    let mut reference = Vec::new();
    let mut reference_coeffs = Vec::new();
    for (i, (num, den)) in [t1, t2].iter().enumerate() {
        let c = sphere_partial_fractions(num, den, &ends)?;
        reference.push(SpinorSection::combine(&form.basis, &c, format!("t{}", i + 1))?);
        reference_coeffs.push(c);
    }
    let reference_coeff_error = echelon_distance(&reference_coeffs, &k_basis);
    let planar_ends = if k_basis.len() >= 2 {
        form.divisor
            .points
            .iter()
            .map(|p| check_planar_end(&k_basis[0].section, &k_basis[1].section, p, 1e-8))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![false; form.divisor.n()]
    };
    let residue_t1_sq_at_0 = residue_pair(&reference[0], &reference[0], &EndPoint::Finite(c64(0.0, 0.0)))?.norm();
    Ok(SphereFamily {
        n: 4,
        parameter: vec![a],
        form,
        pfaffian,
        k_basis,
        reference,
        reference_coeff_error,
        planar_ends,
        quartic,
        quartic_roots: roots,
        roots_congruent,
        residue_t1_sq_at_0,
    })
}

fn echelon_distance(reference: &[Vec<C64>], k: &[KernelSection]) -> f64 {
    if reference.len() != k.len() {
        return f64::INFINITY;
    }
    let e = rref(reference, 1e-9);
    let mut worst: f64 = 0.0;
    for (x, y) in e.iter().zip(k) {
        for (a, b) in x.iter().zip(&y.coeffs) {
            worst = worst.max((a - b).norm());
        }
    }
    worst
}

/// Roots of z⁴ − σ₁z³ − σ₂z² − σ₃z + 1, checked simple.
pub fn sphere6_ends(sigma: [C64; 3]) -> Result<Vec<C64>> {
    let q = ComplexPolynomial::new(vec![c64(1.0, 0.0), -sigma[2], -sigma[1], -sigma[0], c64(1.0, 0.0)])?;
    let roots = poly_roots(&q)?;
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..4 {
        for j in i + 1..4 {
            if (roots[i] - roots[j]).norm() < 1e-7 * scale {
                return Err(Error::InvalidInput(format!("σ = {sigma:?} gives a repeated end")));
            }
        }
    }
    Ok(roots)
}

/// τ₁τ₃ + σ₁σ₃ − 20 with τ₁ = σ₁² + 3σ₂, τ₃ = σ₃² + 3σ₂.
pub fn sphere6_pfaffian(sigma: [C64; 3]) -> Result<C64> {
    sphere6_ends(sigma)?;
    Ok(pf6_closed(sigma))
}

fn pf6_closed(sigma: [C64; 3]) -> C64 {
    let [s1, s2, s3] = sigma;
    let t1 = s1 * s1 + 3.0 * s2;
    let t3 = s3 * s3 + 3.0 * s2;
    t1 * t3 + s1 * s3 - 20.0
}

/// (pf Ω, ∏_{i<j}(aᵢ − aⱼ)) in the basis {φ/(z−a₁), …, φ/(z−a₄), φ/z, φ}.
/// The product of the two equals −(τ₁τ₃ + σ₁σ₃ − 20).
pub fn sphere6_numeric_pfaffian(sigma: [C64; 3]) -> Result<(C64, C64)> {
    let roots = sphere6_ends(sigma)?;
    let mut finite = roots.clone();
    finite.push(c64(0.0, 0.0));
    let form = omega_matrix(sphere_basis(&finite)?, Vec::new())?;
    let mut v = c64(1.0, 0.0);
    for i in 0..4 {
        for j in i + 1..4 {
            v *= roots[i] - roots[j];
        }
    }
    Ok((form.pfaffian(), v))
}

/// The two σ₂ with (σ₁, σ₂, σ₃) on the variety:
/// 9σ₂² + 3σ₂(σ₁² + σ₃²) + σ₁²σ₃² + σ₁σ₃ − 20 = 0.
pub fn sphere6_on_variety(s1: C64, s3: C64) -> [C64; 2] {
    let b = 3.0 * (s1 * s1 + s3 * s3);
    let c = s1 * s1 * s3 * s3 + s1 * s3 - 20.0;
    let disc = (b * b - 36.0 * c).sqrt();
    // Pick the stable quadratic formula branch.
    let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
    [q / 9.0, c / q]
}

/// Printed numerator coefficients (b₀…b₃) and (c₀…c₃).
pub fn sphere6_reference_sections(sigma: [C64; 3]) -> ([C64; 4], [C64; 4]) {
    let [s1, s2, s3] = sigma;
    let t1 = s1 * s1 + 3.0 * s2;
    let t3 = s3 * s3 + 3.0 * s2;
    let b = [s2, -s2 * s3, s2 * t3 - 2.0 * s1 * s3 - 10.0, s1 * t3 + 5.0 * s3];
    let c = [s3 * t1 + 5.0 * s1, s2 * t1 - 2.0 * s1 * s3 - 10.0, -s1 * s2, s2];
    (b, c)
}

/// The reference K basis on the six-ended variety and its checks.
#[derive(Clone, Debug)]
pub struct Sphere6Kernel {
    pub sigma: [C64; 3],
    pub ends: Vec<C64>,
    pub form: OmegaForm,
    pub sections: [SpinorSection; 2],
    pub coeffs: [Vec<C64>; 2],
    /// ‖Ωv‖∞/(‖Ω‖∞‖v‖∞) per section.
    pub kernel_residual: [f64; 2],
    /// max |α₀| over the ends relative to the coefficient scale.
    pub k_residual: [f64; 2],
    /// Largest difference between the combined section and the reference rational function.
    pub formula_residual: f64,
    pub evaluation_rank: usize,
    pub pfaffian_closed: C64,
}

/// t₁ = B(z)/(zQ(z))·φ and t₂ = zC(z)/Q(z)·φ with the reference b, c rows.
#[allow(non_snake_case)]
pub fn sphere6_K_basis(sigma: [C64; 3], tol: f64) -> Result<Sphere6Kernel> {
    let ends4 = sphere6_ends(sigma)?;
    let closed = pf6_closed(sigma);
    let [s1, s2, s3] = sigma;
    let scale = 20.0 + (s1 * s3).norm() + ((s1 * s1 + 3.0 * s2) * (s3 * s3 + 3.0 * s2)).norm();
    if closed.norm() > tol * scale {
        return Err(Error::InvalidInput(format!("σ is off the variety (pfaffian {closed})")));
    }
    let (b, c) = sphere6_reference_sections(sigma);
    let q = ComplexPolynomial::new(vec![c64(1.0, 0.0), -s3, -s2, -s1, c64(1.0, 0.0)])?;
    let zq = q.mul(&ComplexPolynomial::from_real(&[0.0, 1.0])?);
    let bn = ComplexPolynomial::new(b.to_vec())?;
    let cn = ComplexPolynomial::new(vec![c64(0.0, 0.0), c[0], c[1], c[2], c[3]])?;
    let mut finite = ends4.clone();
    finite.push(c64(0.0, 0.0));
    let basis = sphere_basis(&finite)?;
    let form = omega_matrix(basis, Vec::new())?;
    let v1 = sphere_partial_fractions(&bn, &zq, &finite)?;
    let v2 = sphere_partial_fractions(&cn, &q, &finite)?;
    let t1 = SpinorSection::combine(&form.basis, &v1, "t1")?;
    let t2 = SpinorSection::combine(&form.basis, &v2, "t2")?;
    let probes = [c64(0.21, 0.33), c64(-0.72, 0.15), c64(0.44, -0.61), c64(1.9, 1.1), c64(-1.3, -0.4)];
    let mut formula_residual: f64 = 0.0;
    for &z in &probes {
        let d1 = bn.eval(z) / zq.eval(z);
        let d2 = cn.eval(z) / q.eval(z);
        formula_residual = formula_residual
            .max((t1.value(z) - d1).norm() / (1.0 + d1.norm()))
            .max((t2.value(z) - d2).norm() / (1.0 + d2.norm()));
    }
    let k_res = |s: &SpinorSection, v: &[C64]| {
        let sc = form
            .basis
            .iter()
            .zip(v)
            .flat_map(|(b, c)| b.expansions.iter().map(move |l| (c * l.am1).norm().max((c * l.a0).norm())))
            .fold(1e-300, f64::max);
        s.expansions.iter().map(|l| l.a0.norm()).fold(0.0, f64::max) / sc
    };
    let kernel = [kernel_residual(form.matrix.matrix(), &v1), kernel_residual(form.matrix.matrix(), &v2)];
    let k_residual = [k_res(&t1, &v1), k_res(&t2, &v2)];
    let rank = evaluation_rank(&[t1.clone(), t2.clone()], &probes, 1e-10);
    Ok(Sphere6Kernel {
        sigma,
        ends: finite,
        form,
        sections: [t1, t2],
        coeffs: [v1, v2],
        kernel_residual: kernel,
        k_residual,
        formula_residual,
        evaluation_rank: rank,
        pfaffian_closed: closed,
    })
}

/// Outcome of random-end trials on the sphere for one n.
#[derive(Clone, Debug, Serialize)]
pub struct NonexistenceSummary {
    pub n: usize,
    pub trials: usize,
    /// Histogram: `dim_k_counts[d]` trials had dim K = d.
    pub dim_k_counts: Vec<usize>,
    pub max_dim_k: usize,
    pub parity_failures: usize,
    pub errors: usize,
}

/// n ends (n − 1 uniform in |z| < 2, plus ∞), `trials` times. Trial i uses
/// stream i of a ChaCha8 generator seeded with `seed`, so results do not
/// depend on the execution mode.
pub fn sphere_nonexistence_trials(n: usize, trials: usize, seed: u64, exec: Exec) -> Result<NonexistenceSummary> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least two ends".into()));
    }
    let dims: Vec<Option<usize>> = map_range(exec, trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 40));
        rng.set_stream(i as u64);
        let mut pts: Vec<C64> = Vec::with_capacity(n - 1);
        while pts.len() < n - 1 {
            let r = 2.0 * rng.gen::<f64>().sqrt();
            let z = C64::from_polar(r, 2.0 * PI * rng.gen::<f64>());
            if pts.iter().all(|p| (p - z).norm() > 0.05) {
                pts.push(z);
            }
        }
        let form = omega_matrix(sphere_basis(&pts).ok()?, Vec::new()).ok()?;
        extract_k(&form, KERNEL_TOL).ok().map(|k| k.len())
    });
    let mut dim_k_counts = vec![0; n + 1];
    let mut errors = 0;
    let mut parity_failures = 0;
    for d in &dims {
        match d {
            Some(d) => {
                dim_k_counts[*d] += 1;
                if (n - d) % 2 != 0 {
                    parity_failures += 1;
                }
            }
            None => errors += 1,
        }
    }
    let max_dim_k = dims.iter().flatten().copied().max().unwrap_or(0);
    Ok(NonexistenceSummary { n, trials, dim_k_counts, max_dim_k, parity_failures, errors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere4_root_and_kernel() {
        let fam = sphere4_solve().unwrap();
        let a = fam.parameter[0];
        assert!((a - c64(3f64.sqrt() / 2.0, 0.5)).norm() < 1e-12);
        assert!(fam.pfaffian.norm() < 1e-10);
        assert_eq!(fam.k_basis.len(), 2);
        assert!(fam.reference_coeff_error < 1e-8, "{}", fam.reference_coeff_error);
        assert!(fam.planar_ends.iter().all(|&b| b));
        assert!(fam.roots_congruent);
        assert!(fam.residue_t1_sq_at_0 < 1e-12);
        // a⁴ − a² + 1
        let q = &fam.quartic;
        for (c, e) in q.iter().zip([1.0, 0.0, -1.0, 0.0, 1.0]) {
            assert!((c - e).norm() < 1e-10);
        }
    }

    #[test]
    fn sphere6_closed_form_examples() {
        let z = c64(0.0, 0.0);
        assert!((sphere6_pfaffian([z, z, z]).unwrap() + 20.0).norm() < 1e-14);
        let s2 = c64(2.0 * 5f64.sqrt() / 3.0, 0.0);
        assert!(sphere6_pfaffian([z, s2, z]).unwrap().norm() < 1e-13);
        let (pf, v) = sphere6_numeric_pfaffian([z, s2, z]).unwrap();
        assert!((pf * v).norm() < 1e-10);
    }

    #[test]
    fn sphere6_ratio_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let s: [C64; 3] = std::array::from_fn(|_| c64(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)));
            let (pf, v) = sphere6_numeric_pfaffian(s).unwrap();
            let ratio = pf * v / sphere6_pfaffian(s).unwrap();
            assert!((ratio + 1.0).norm() < 1e-9, "{ratio}");
        }
    }

    #[test]
    fn sphere6_k_basis_on_variety() {
        let z = c64(0.0, 0.0);
        let s2 = c64(2.0 * 5f64.sqrt() / 3.0, 0.0);
        let k = sphere6_K_basis([z, s2, z], 1e-10).unwrap();
        assert!(k.kernel_residual.iter().all(|&r| r < 1e-10));
        assert!(k.k_residual.iter().all(|&r| r < 1e-10));
        assert!(k.formula_residual < 1e-10);
        assert_eq!(k.evaluation_rank, 2);
        let (b, c) = sphere6_reference_sections([z, s2, z]);
        assert_eq!(c[3], s2);
        assert!((b[2] - (3.0 * s2 * s2 - 10.0)).norm() < 1e-14);

        let (s1, s3) = (c64(0.4, -0.7), c64(-1.1, 0.3));
        for s2 in sphere6_on_variety(s1, s3) {
            let k = sphere6_K_basis([s1, s2, s3], 1e-9).unwrap();
            assert!(k.kernel_residual.iter().all(|&r| r < 1e-9));
            assert_eq!(k.evaluation_rank, 2);
        }
        assert!(sphere6_K_basis([z, z, z], 1e-9).is_err());
    }

    #[test]
    fn partial_fractions_reject_extra_poles() {
        let num = ComplexPolynomial::from_real(&[1.0]).unwrap();
        let den = ComplexPolynomial::from_real(&[-4.0, 0.0, 1.0]).unwrap();
        assert!(sphere_partial_fractions(&num, &den, &[c64(2.0, 0.0)]).is_err());
        let c = sphere_partial_fractions(&num, &den, &[c64(2.0, 0.0), c64(-2.0, 0.0)]).unwrap();
        assert!((c[0] - 0.25).norm() < 1e-15 && (c[1] + 0.25).norm() < 1e-15 && c[2].norm() == 0.0);
    }

    #[test]
    fn small_nonexistence_run() {
        for n in [2, 3, 5] {
            let s = sphere_nonexistence_trials(n, 10, 3, Exec::Sequential).unwrap();
            assert!(s.max_dim_k < 2);
            assert_eq!(s.parity_failures, 0);
            assert_eq!(s.errors, 0);
        }
    }
}
