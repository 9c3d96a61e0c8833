//! Numerical laboratory for fibered disc obstacles over the unit disc.
//!
//! The central object is a closed subset of `C x D` fibered by round discs
//! whose radii are driven by a weighted logarithmic potential: the radii
//! collapse to zero exactly over two mirror-image sequences of base points
//! accumulating at +-1/2, and the fiber centers are interpolated between 0
//! and 1 by a smooth real step. The crate provides:
//!
//! - the potential and its Wirtinger derivative with rigorous tail bounds
//!   ([`potential`]),
//! - the C^2 interpolating step with certified derivative bounds
//!   ([`interpolant`]),
//! - fiber geometry of the obstacle set, with exact-rational degeneracy
//!   detection ([`brset`]),
//! - closed-form boundary Levi forms and grid certification of
//!   pseudoconvexity of the complement ([`levi`]),
//! - Moebius charts on fibers and analytic continuation of the logarithm
//!   along polylines, witnessing the branch-point dichotomy ([`fiber`]),
//! - a Schwarzian-derivative calculus on third-order jets ([`schwarzian`]),
//! - rigidity bounds and an end-to-end obstruction certificate for candidate
//!   fiberwise uniformizers ([`rigidity`]).
//!
//! All serialized reports carry [`SCHEMA_VERSION`].

pub mod brset;
pub mod error;
pub mod fiber;
pub mod interpolant;
pub mod levi;
pub mod potential;
pub mod rigidity;
pub mod schwarzian;

pub(crate) mod serde_util;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version stamp carried by every serialized report type.
pub const SCHEMA_VERSION: u32 = 1;
