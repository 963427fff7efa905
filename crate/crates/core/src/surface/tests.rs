use super::*;
use crate::moduli::torus_loop;
use crate::moduli::{klein4_construct, mobius_gauss, sphere4_solve, torus4_construct};

fn sphere4_data() -> WeierstrassData {
    let fam = sphere4_solve().unwrap();
    WeierstrassData::with_default_clearance(fam.k_basis[0].section.clone(), fam.k_basis[1].section.clone()).unwrap()
}

#[test]
fn enneper_endpoint() {
    let d = enneper_data().unwrap();
    let m = integrate_surface(&d, GridSpec::square(1.0, 8), c64(0.0, 0.0), Exec::Sequential).unwrap();
    let x0 = m.at(4, 4).unwrap();
    let x1 = m.at(8, 4).unwrap();
    assert!(norm3(x0) < 1e-15);
    let want = [2.0 / 3.0, 0.0, 1.0];
    for k in 0..3 {
        assert!((x1[k] - x0[k] - want[k]).abs() < 1e-8, "{x1:?}");
    }
    assert!(m.closure_max < 1e-12);
    assert_eq!(m.faces.len(), 2 * 64);
}

#[test]
fn parallel_and_sequential_meshes_agree() {
    let d = enneper_data().unwrap();
    let a = integrate_surface(&d, GridSpec::square(1.0, 12), c64(0.1, 0.0), Exec::Sequential).unwrap();
    let b = integrate_surface(&d, GridSpec::square(1.0, 12), c64(0.1, 0.0), Exec::Parallel).unwrap();
    assert_eq!(a.vertices, b.vertices);
}

#[test]
fn laplacian_converges_at_second_order() {
    let d = monomial_data(2).unwrap();
    let lap = |n| {
        integrate_surface(&d, GridSpec::square(1.0, n), c64(0.0, 0.0), Exec::default())
            .unwrap()
            .laplacian_max()
            .unwrap()
    };
    let (a, b) = (lap(16), lap(32));
    let ratio = a / b;
    assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
}

#[test]
fn gauss_map_examples() {
    let d = enneper_data().unwrap();
    assert_eq!(gauss_map(&d, c64(0.0, 0.0)).unwrap(), [0.0, 0.0, -1.0]);
    let n = gauss_map(&d, C64::from_polar(1.0, 0.7)).unwrap();
    assert!(n[2].abs() < 1e-15);
    assert!((norm3(n) - 1.0).abs() < 1e-12);
    assert_eq!(normal_from_g(c64(f64::INFINITY, 0.0)), [0.0, 0.0, 1.0]);
    let (_, s) = (d.s1.clone(), d.s2.clone());
    let flipped = WeierstrassData::new(s.clone(), d.s1.clone(), 0.05).unwrap();
    assert_eq!(gauss_map(&flipped, c64(0.0, 0.0)).unwrap(), [0.0, 0.0, 1.0]);
}

#[test]
fn null_curve() {
    let d = sphere4_data();
    let probes: Vec<C64> = (0..40).map(|k| C64::from_polar(0.3 + 0.04 * k as f64, 0.37 * k as f64)).collect();
    assert!(null_curve_residual(&d, &probes) < 1e-10);
}

#[test]
fn branch_detection() {
    let d = enneper_data().unwrap();
    assert!(branch_points(&d, GridSpec::square(2.0, 40)).unwrap().points.is_empty());
    let z: Eval = Arc::new(|z| z);
    let div = d.s1.divisor.clone();
    let s = SpinorSection::new(Domain::Sphere, "z", div, Vec::new(), z, None).unwrap();
    let both = WeierstrassData::new(s.clone(), s, 0.05).unwrap();
    let found = branch_points(&both, GridSpec::square(1.0, 7)).unwrap();
    assert_eq!(found.points.len(), 1);
    assert!(found.points[0].norm() < 1e-8);
}

#[test]
fn obj_round_trip() {
    let d = enneper_data().unwrap();
    let m = integrate_surface(&d, GridSpec::square(1.0, 64), c64(0.0, 0.0), Exec::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.obj");
    export_obj(&m, &p).unwrap();
    let back = parse_obj(&p).unwrap();
    assert_eq!(back.vertices, m.vertices);
    assert_eq!(back.faces, m.faces);

    let small = integrate_surface(&d, GridSpec::square(1.0, 1), c64(-1.0, -1.0), Exec::Sequential).unwrap();
    assert_eq!((small.vertices.len(), small.faces.len()), (4, 2));
    assert!(export_obj(&SurfaceMesh::default(), &p).is_err());
}

#[test]
fn sphere4_periods_and_planar_ends() {
    let d = sphere4_data();
    for r in end_periods(&d, 0.1).unwrap() {
        assert!(r.closes(1e-7), "{:?}", r.real_period);
    }
    let m = integrate_surface(&d, GridSpec::square(1.5, 30), c64(0.71, -0.93), Exec::default()).unwrap();
    assert!(m.closure_max < 1e-7 * m.scale.max(1.0), "{} {}", m.closure_max, m.scale);
    let cyc = random_cycle_residuals(&d, GridSpec::square(1.5, 30), 20, 7).unwrap();
    assert!(cyc.iter().all(|&c| c < 1e-7 * m.scale.max(1.0)));
    let a = d.divisor().finite()[0];
    let fit = planar_end_fit(&d, a, &[0.1, 0.05, 0.025], 64).unwrap();
    assert!(fit[0] > fit[1] && fit[1] > fit[2], "{fit:?}");
}

#[test]
fn mobius_total_curvature() {
    let k = total_curvature_annulus(&mobius_gauss, c64(0.0, 0.0), -9.0, 9.0);
    let pi = std::f64::consts::PI;
    assert!((k + 12.0 * pi).abs() < 1e-6, "{k}");
    assert!((k / 2.0 + 6.0 * pi).abs() < 1e-6);
}

#[test]
fn torus4_and_klein_periods() {
    let ctx = crate::moduli::torus4_reference_lattices().unwrap().remove(0);
    let t = torus4_construct(ctx.clone(), (1, 2, 3)).unwrap();
    let d = WeierstrassData::with_default_clearance(t.s1.clone(), t.s2.clone()).unwrap();
    for k in [1, 3] {
        let r = period_vector(&d, &torus_loop(&ctx, k, &t.ends)).unwrap();
        assert!(r.condition_residual[0].max(r.condition_residual[1]) < 1e-7, "{:?}", r.condition_residual);
        assert!(r.closes(1e-7));
    }
    let kb = klein4_construct().unwrap();
    let d = WeierstrassData::with_default_clearance(kb.s1.clone(), kb.s2.clone()).unwrap();
    let r = period_vector(&d, &torus_loop(&kb.ctx, 1, &kb.ends)).unwrap();
    let scale = kb.solution.p_quadrature[0].norm();
    assert!(r.integrals[0].norm() < 1e-8 * scale && r.integrals[2].norm() < 1e-8 * scale);
    let grid = GridSpec::torus(kb.ctx.omega1(), kb.ctx.omega3(), -kb.ctx.omega1() - kb.ctx.omega3(), 48);
    assert!(branch_points(&d, grid).unwrap().points.is_empty());
}
