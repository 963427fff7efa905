//! Spinor representation of complete minimal surfaces with embedded planar ends.
//!
//! The crate is organised bottom-up:
//!
//! * [`numkit`]: pfaffians, skew kernels, polynomial roots and contour quadrature.
//! * [`elliptic`]: lattices, Weierstrass ℘, ℘′, ζ and the invariants g₂, g₃, eᵢ, ηᵢ.
//! * [`spinor`]: spinor sections with per-end Laurent data, the skew form Ω,
//!   the bases of F on the sphere and tori, and the spin double cover σ / T(A).
//! * [`arf`]: spin structures as ℤ₂ quadratic forms and their Arf invariants.
//! * [`moduli`]: the explicit constructions (spheres with four and six ends,
//!   projective planes, tori, the Klein bottle) and non-existence evaluators.
//! * [`surface`]: Weierstrass integration, periods, branch points, Gauss map, meshes.
//! * [`verify`]: the verification suites behind `spinor-minimal verify`.

pub mod arf;
pub mod elliptic;
pub mod error;
pub mod moduli;
pub mod numkit;
pub mod par;
pub mod report;
pub mod spinor;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Shorthand for building a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
