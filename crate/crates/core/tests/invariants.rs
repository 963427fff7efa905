use proptest::prelude::*;
use spinor_minimal::arf::{arf_bruteforce, arf_closed_form, quadratic_law_holds, HyperellipticSpin};
use spinor_minimal::elliptic::build_context;
use spinor_minimal::moduli::{rp2_group, rp2_variety};
use spinor_minimal::numkit::{
    contour_integral_tol, contour_integral_vec_tol, pfaffian, skew_rank_kernel, CMatrix, QuadraturePath, SkewMatrix,
};
use spinor_minimal::spinor::{basis_f_sphere, omega_pair, omega_qres_oracle, EndPoint};
use spinor_minimal::C64;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn skew(n: usize) -> impl Strategy<Value = SkewMatrix> {
    prop::collection::vec(complex(), n * n).prop_map(move |v| {
        let mut k = 0;
        SkewMatrix::from_upper(n, |_, _| {
            k += 1;
            v[k - 1]
        })
    })
}

fn sized_skew() -> impl Strategy<Value = SkewMatrix> {
    (1usize..=8).prop_flat_map(skew)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfaffian_squares_to_determinant(a in sized_skew()) {
        let pf = pfaffian(&a);
        if a.n() % 2 == 1 {
            prop_assert_eq!(pf, C64::new(0.0, 0.0));
        } else {
            let det = a.matrix().det();
            prop_assert!((pf * pf - det).norm() <= 1e-10 * det.norm().max(1.0));
        }
    }

    #[test]
    fn pfaffian_of_congruence(a in skew(6), m in prop::collection::vec(complex(), 36)) {
        let b = CMatrix::from_fn(6, 6, |i, j| m[6 * i + j]);
        let lhs = pfaffian(&a.congruent(&b));
        let rhs = b.det() * pfaffian(&a);
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
    }

    #[test]
    fn skew_rank_is_even_and_kernel_is_annihilated(a in skew(4), v in prop::collection::vec(complex(), 12)) {
        // Rank at most 4 on a 7-dimensional space through a congruence with a 7×4 matrix.
        let m = CMatrix::from_fn(7, 4, |i, j| if i < 4 && i == j { C64::new(1.0, 0.0) } else if i >= 4 { v[4 * (i - 4) + j] } else { C64::new(0.0, 0.0) });
        let big = a.congruent(&m);
        let rk = skew_rank_kernel(&big, 1e-9);
        prop_assert_eq!(rk.rank % 2, 0);
        prop_assert!(rk.rank <= 4);
        prop_assert_eq!(rk.kernel.len(), 7 - rk.rank);
        for k in &rk.kernel {
            let r = big.matrix().mul_vec(k);
            prop_assert!(r.iter().all(|z| z.norm() <= 1e-9 * big.matrix().norm_inf().max(1.0)));
        }
    }

    #[test]
    fn arf_bruteforce_matches_closed_form(g in 0usize..=4, picks in prop::collection::vec(0usize..9, 0..4)) {
        let mut b: Vec<usize> = picks.into_iter().filter(|&i| i < 2 * g + 1).collect();
        b.sort_unstable();
        b.dedup();
        b.truncate(g);
        let spin = HyperellipticSpin::new(g, &b).unwrap();
        prop_assert!(quadratic_law_holds(&spin));
        prop_assert_eq!(arf_bruteforce(&spin).unwrap(), arf_closed_form(g, b.len()).unwrap());
    }

    #[test]
    fn rp2_variety_is_symmetric(c in prop::array::uniform3(-3.0..3.0f64)) {
        let v = rp2_variety(c);
        for h in rp2_group() {
            prop_assert!((rp2_variety(h.apply(c)) - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn weierstrass_equation_and_periods(tau in (-0.5..0.5f64, 0.6..2.0f64), u in complex()) {
        let w3 = C64::new(tau.0, tau.1);
        let ctx = build_context(C64::new(1.0, 0.0), w3).unwrap();
        prop_assume!(ctx.lattice.lattice_distance(u) > 0.05);
        prop_assert!(ctx.ode_residual(u) < 1e-10);
        let p = ctx.wp_unchecked(u);
        for shift in [C64::new(2.0, 0.0), 2.0 * w3] {
            prop_assert!((ctx.wp_unchecked(u + shift) - p).norm() <= 1e-9 * p.norm().max(1.0));
        }
    }

    #[test]
    fn vector_quadrature_matches_componentwise(a in complex(), b in complex(), c in complex()) {
        let path = QuadraturePath::segment(a, b);
        let f = |z: C64| [z * z, (z + c).exp(), 1.0 / (z - 3.0)];
        let v = contour_integral_vec_tol(&f, &path, 1e-13).unwrap();
        for (k, vk) in v.iter().enumerate() {
            let s = contour_integral_tol(&|z| f(z)[k], &path, 1e-13).unwrap();
            prop_assert!((vk - s).norm() <= 1e-11 * s.norm().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sphere_omega_matches_residue_oracle(z in prop::collection::vec(complex(), 3)) {
        let sep = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).map(|(i, j)| (z[i] - z[j]).norm()).fold(f64::INFINITY, f64::min);
        prop_assume!(sep > 0.2);
        let mut pts: Vec<EndPoint> = z.iter().map(|&p| EndPoint::Finite(p)).collect();
        pts.push(EndPoint::Infinity);
        let basis = basis_f_sphere(pts).unwrap();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let a = omega_pair(&basis[i], &basis[j]).unwrap();
                let b = omega_qres_oracle(&basis[i], &basis[j]).unwrap();
                prop_assert!((a - b).norm() <= 1e-6 * a.norm().max(1.0), "({i},{j}): {a} vs {b}");
            }
        }
    }
}
