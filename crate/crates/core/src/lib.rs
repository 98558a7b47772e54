//! Minimal capacity points and warmest points.
//!
//! For the one-dimensional operator `L u = (a(x) u')'` on `[0, 1]` with
//! Dirichlet ends, and for planar domains bounded by `y = ±f(x)` and the
//! lines `x = 0`, `x = 1`, this crate computes
//!
//! * the minimal capacity point `c`: the point from which the flux out of a
//!   small electrode to the grounded boundary is smallest, and
//! * the warmest point `m`: the maximizer of the principal Dirichlet
//!   eigenfunction.
//!
//! Module map:
//!
//! * [`expr`]: user-supplied coefficient and profile functions.
//! * [`coeffs`]: validated coefficients `a(x) > 0` and the resistance map
//!   `R(s) = ∫₀ˢ 1/a`.
//! * [`cap1d`]: the 1D flux curve and the capacity point.
//! * [`sturm`]: Prüfer-angle shooting, eigenpairs, the comparison witness,
//!   a finite-difference oracle and heat-flow demos.
//! * [`geom2d`]: masked lattices with Shortley–Weller leg lengths.
//! * [`field2d`]: Dirichlet and mixed solves, the Robin function, 2D
//!   eigenpairs, the ε-flux probe and grid-refinement experiments.

pub mod cap1d;
pub mod coeffs;
pub mod error;
pub mod expr;
pub mod field2d;
pub mod geom2d;
pub mod numeric;
pub mod sturm;

pub use error::{Error, Result};
