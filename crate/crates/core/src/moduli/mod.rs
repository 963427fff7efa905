//! Explicit constructions and non-existence evaluators: spheres with four and
//! six ends, three-ended projective planes, three- and four-ended tori, and
//! the four-ended Klein bottle.

mod klein;
mod rp2;
mod sphere;
mod torus;

pub use klein::{
    klein4_construct, klein_c_vectors, klein_context, klein_det_w_factored, klein_det_w_matrix, klein_det_w_polynomial,
    klein_m, klein_period_coeffs_reference, klein_root_r, klein_w_reference, KleinFourEnd, KleinSolution,
};
pub use rp2::{
    mobius_gauss, mobius_strip_spinor, rp2_boundary_scan, rp2_d3_point, rp2_group, rp2_symmetry_group, rp2_variety,
    BoundaryPoint, SignedPermutation, SymmetryLabel,
};
pub use sphere::{
    sphere4_pfaffian_polynomial, sphere4_solve, sphere6_K_basis, sphere6_ends, sphere6_numeric_pfaffian,
    sphere6_on_variety, sphere6_pfaffian, sphere6_reference_sections, sphere_nonexistence_trials,
    sphere_partial_fractions, NonexistenceSummary, Sphere6Kernel, SphereFamily,
};
pub use torus::{
    torus3_admissible_partner, torus3_degeneracy, torus3_scan, torus3_untwisted_rank, torus4_construct,
    torus4_reference_lattices, torus_loop, EpsilonCheck, Torus3Report, TorusFourEnd,
};

use crate::numkit::CMatrix;
use crate::C64;

/// ‖Ωv‖∞ / (‖Ω‖∞‖v‖∞), the relative kernel residual of v.
pub fn kernel_residual(m: &CMatrix, v: &[C64]) -> f64 {
    let w = m.mul_vec(v);
    let num = w.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let vn = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let den = m.norm_inf() * vn;
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
