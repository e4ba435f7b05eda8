//! Martingale optimal transport between finitely supported marginals.
//!
//! The crate decides convex order with certificates, solves the primal
//! transport problem and its superhedging dual, computes the irreducible
//! convex paving with its boundary attachments, disintegrates the problem
//! onto the paving, and certifies martingale monotonicity of supports.
//! All of it runs either on exact rationals or on `f64` with a tolerance.

pub mod decomposition;
pub mod error;
pub mod geometry;
pub mod golden;
pub mod linprog;
pub mod measures;
pub mod monotonicity;
pub mod paving;
pub mod random;
pub mod scalar;
pub mod transport;

pub use error::{Error, Result};
pub use measures::{DiscreteMeasure, OrderCertificate, Point, Separation};
pub use scalar::{Rational, Scalar, Tolerance};
pub use transport::{Coupling, CostMatrix, DualCertificate};
