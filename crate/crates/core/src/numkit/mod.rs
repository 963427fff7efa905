//! Complex numerics: dense matrices, pfaffians and skew kernels, polynomial
//! roots, and Gauss–Legendre contour quadrature.

pub mod linalg;
pub mod poly;
pub mod quad;
pub mod skew;

pub use linalg::CMatrix;
pub use poly::{poly_roots, ComplexPolynomial};
pub use quad::{
    composite_nodes, contour_integral, contour_integral_tol, contour_integral_vec_tol, gauss_legendre, QuadraturePath,
};
pub use skew::{pfaffian, skew_rank_kernel, skew_rank_kernel_scaled, SkewMatrix};
