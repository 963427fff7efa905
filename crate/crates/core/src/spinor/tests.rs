use super::*;
use crate::c64;
use crate::elliptic::{build_context, zeta_quasi_addition, EllipticContext};

fn fin(z: C64) -> EndPoint {
    EndPoint::Finite(z)
}

fn square() -> Arc<EllipticContext> {
    Arc::new(build_context(c64(1.0, 0.0), c64(0.0, 1.0)).unwrap())
}

fn sphere_basis(ends: &[C64]) -> Vec<SpinorSection> {
    let mut pts: Vec<EndPoint> = ends.iter().map(|&z| fin(z)).collect();
    pts.push(EndPoint::Infinity);
    basis_f_sphere(pts).unwrap()
}

fn max_dev(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..a.rows {
        for j in 0..a.cols {
            d = d.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    d
}

#[test]
fn residue_pair_examples() {
    let basis = sphere_basis(&[c64(0.0, 0.0)]);
    let div = basis[0].divisor.clone();
    let mk = |am1: f64, a0: f64| {
        SpinorSection::new(
            Domain::Sphere,
            "s",
            div.clone(),
            vec![Laurent::new(c64(am1, 0.0), c64(a0, 0.0)); 2],
            Arc::new(|_| c64(0.0, 0.0)),
            None,
        )
        .unwrap()
    };
    let p = fin(c64(0.0, 0.0));
    assert_eq!(residue_pair(&mk(2.0, 3.0), &mk(2.0, 3.0), &p).unwrap(), c64(12.0, 0.0));
    assert_eq!(residue_pair(&mk(1.0, 0.0), &mk(0.0, 1.0), &p).unwrap(), c64(1.0, 0.0));
    assert_eq!(residue_pair(&mk(1.0, 0.0), &mk(5.0, 0.0), &p).unwrap(), c64(0.0, 0.0));
    assert!(matches!(residue_pair(&mk(1.0, 0.0), &mk(1.0, 0.0), &fin(c64(7.0, 0.0))), Err(Error::MissingEnd(_))));
}

#[test]
fn sphere_entries_match_closed_form() {
    let a = [c64(0.3, 0.2), c64(-1.1, 0.5), c64(0.7, -0.9)];
    let basis = sphere_basis(&a);
    let n = basis.len();
    for i in 0..3 {
        assert!((omega_pair(&basis[i], &basis[n - 1]).unwrap() + 1.0).norm() < 1e-14);
        for j in 0..3 {
            if i != j {
                let v = omega_pair(&basis[i], &basis[j]).unwrap();
                assert!((v - 1.0 / (a[j] - a[i])).norm() < 1e-13);
            }
        }
    }
    assert!(omega_pair(&basis[0], &basis[0]).unwrap().norm() < 1e-15);
}

#[test]
fn two_ended_sphere() {
    let basis = sphere_basis(&[c64(0.4, -0.2)]);
    let form = omega_matrix(basis, vec![]).unwrap();
    assert!((form.matrix.get(0, 1) + 1.0).norm() < 1e-15);
    assert_eq!(form.rank(1e-9), 2);
    assert!(extract_k(&form, 1e-9).unwrap().is_empty());
}

#[test]
fn three_ended_sphere_has_one_dimensional_kernel() {
    let basis = sphere_basis(&[c64(0.4, -0.2), c64(-0.8, 0.9)]);
    let form = omega_matrix(basis, vec![]).unwrap();
    assert_eq!(form.rank(1e-9), 2);
    let k = extract_k(&form, 1e-9).unwrap();
    assert_eq!(k.len(), 1);
    assert!(k[0].k_residual < 1e-12);
}

#[test]
fn expansion_tables_match_evaluators() {
    let basis = sphere_basis(&[c64(0.3, 0.2), c64(-1.1, 0.5)]);
    for s in &basis {
        assert!(s.expansion_consistency() < 1e-6, "{}", s.label);
    }
    let ctx = square();
    let tw = basis_f_torus_twisted(ctx.clone(), &[c64(0.0, 0.0), c64(0.4, 0.3), c64(-0.5, 0.6)]).unwrap();
    for s in &tw {
        assert!(s.expansion_consistency() < 1e-6, "{}", s.label);
    }
    let un = basis_f_torus_untwisted(ctx.clone(), 1, &[c64(0.4, 0.3), c64(-0.5, 0.6), c64(0.2, -0.7)]).unwrap();
    for s in &un {
        assert!(s.expansion_consistency() < 1e-6, "{}", s.label);
    }
    let pb = basis_f_paired(ctx, 2, &[c64(0.35, 0.2), c64(0.6, -0.45)]).unwrap();
    for s in &pb.sections {
        assert!(s.expansion_consistency() < 1e-6, "{}", s.label);
    }
}

#[test]
fn oracle_agrees_on_sphere_and_twisted_torus() {
    let basis = sphere_basis(&[c64(0.3, 0.2), c64(-1.1, 0.5), c64(0.0, 0.0)]);
    let form = omega_matrix(basis.clone(), vec![]).unwrap();
    let q = omega_qres_matrix(&basis, Exec::default()).unwrap();
    assert!(max_dev(form.matrix.matrix(), &q) < 1e-9);
    assert!((omega_qres_oracle(&basis[0], &basis[3]).unwrap() + 1.0).norm() < 1e-9);

    let ctx = square();
    let pts = [c64(0.0, 0.0), c64(0.4, 0.3), c64(-0.5, 0.6)];
    let tw = basis_f_torus_twisted(ctx.clone(), &pts).unwrap();
    let q = omega_qres_oracle(&tw[1], &tw[2]).unwrap();
    let f12 = tw[1].value(pts[2]);
    assert!((q - f12).norm() < 1e-8);
    let form = omega_matrix(tw.clone(), vec![]).unwrap();
    assert!(max_dev(form.matrix.matrix(), &omega_qres_matrix(&tw, Exec::default()).unwrap()) < 1e-8);
}

#[test]
fn oracle_agrees_on_untwisted_torus() {
    let ctx = Arc::new(build_context(c64(1.0, 0.0), c64(0.3, 1.2)).unwrap());
    let un = basis_f_torus_untwisted(ctx.clone(), 3, &[c64(0.4, 0.3), c64(-0.5, 0.6), c64(0.2, -0.7)]).unwrap();
    let form = omega_matrix(un.clone(), vec![]).unwrap();
    let q = omega_qres_matrix(&un, Exec::default()).unwrap();
    assert!(max_dev(form.matrix.matrix(), &q) < 1e-8);
    // Ω(tᵢ, tⱼ) = fᵢ(aⱼ)/℘_r(aⱼ)
    let a1 = c64(-0.5, 0.6);
    let expect = un[0].value(a1) / (ctx.wp_unchecked(a1) - ctx.e3);
    assert!((form.matrix.get(0, 1) - expect).norm() < 1e-12);
}

#[test]
fn paired_basis_is_block_off_diagonal() {
    let ctx = square();
    let pb = basis_f_paired(ctx, 2, &[c64(0.35, 0.2), c64(0.6, -0.45)]).unwrap();
    let form = omega_matrix(pb.sections.clone(), vec![]).unwrap();
    let m = 2;
    let w = pb.w_closed_form();
    for i in 0..m {
        for j in 0..m {
            assert!(form.matrix.get(i, j).norm() < 1e-10);
            assert!(form.matrix.get(m + i, m + j).norm() < 1e-10);
            assert!((form.matrix.get(i, m + j) - w[(i, j)]).norm() < 1e-10 * (1.0 + w[(i, j)].norm()));
        }
    }
    let q = omega_qres_matrix(&pb.sections, Exec::default()).unwrap();
    assert!(max_dev(form.matrix.matrix(), &q) < 1e-8);
}

#[test]
fn twisted_half_lattice_ends() {
    let ctx = square();
    let pts = [c64(0.0, 0.0), ctx.omega1(), ctx.omega2(), ctx.omega3()];
    let basis = basis_f_torus_twisted(ctx, &pts).unwrap();
    let form = omega_matrix(basis, vec![vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]]).unwrap();
    assert!(form.matrix.matrix().max_abs() < 1e-12);
    let k = extract_k(&form, 1e-9).unwrap();
    assert_eq!(k.len(), 3);
    for (i, ks) in k.iter().enumerate() {
        assert!(ks.coeffs[0].norm() < 1e-12);
        assert!((ks.coeffs[i + 1] - 1.0).norm() < 1e-12);
    }
}

#[test]
fn twisted_three_ends() {
    let ctx = square();
    let (a1, a2) = (c64(0.4, 0.3), c64(-0.5, 0.6));
    assert!((ctx.wp_prime_unchecked(a1) + ctx.wp_prime_unchecked(a2)).norm() > 1e-3);
    let basis = basis_f_torus_twisted(ctx.clone(), &[c64(0.0, 0.0), a1, a2]).unwrap();
    let u = c64(0.13, -0.41);
    let qa = zeta_quasi_addition(&ctx, u, a1).unwrap();
    assert!((basis[1].value(u) - qa).norm() < 1e-10);
    let form = omega_matrix(basis, vec![vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]]).unwrap();
    assert_eq!(form.rank(1e-9), 2);
    assert_eq!(extract_k(&form, 1e-9).unwrap().len(), 0);
}

#[test]
fn bases_are_independent() {
    let probes = [c64(0.11, 0.07), c64(-0.31, 0.42), c64(0.52, -0.13), c64(0.27, 0.81), c64(-0.66, -0.22)];
    let basis = sphere_basis(&[c64(0.3, 0.2), c64(-1.1, 0.5), c64(0.0, 0.0)]);
    assert_eq!(evaluation_rank(&basis, &probes, 1e-10), 4);
    let ctx = square();
    let tw = basis_f_torus_twisted(ctx, &[c64(0.0, 0.0), c64(0.4, 0.3), c64(-0.5, 0.6)]).unwrap();
    assert_eq!(evaluation_rank(&tw, &probes, 1e-10), 3);
}

#[test]
fn planar_end_check() {
    let basis = sphere_basis(&[c64(0.3, 0.2)]);
    let p = fin(c64(0.3, 0.2));
    assert!(!check_planar_end(&basis[1], &basis[1], &p, 1e-9).unwrap());
    assert!(!check_planar_end(&basis[0], &basis[1], &p, 1e-9).unwrap());
}

#[test]
fn coincident_ends_rejected() {
    assert!(basis_f_sphere(vec![fin(c64(1.0, 0.0)), fin(c64(1.0, 0.0)), EndPoint::Infinity]).is_err());
    let ctx = square();
    assert!(basis_f_torus_twisted(ctx.clone(), &[c64(0.0, 0.0), c64(2.0, 0.0)]).is_err());
    assert!(basis_f_torus_untwisted(ctx.clone(), 1, &[c64(1.0, 0.0)]).is_err());
}
