//! Computational laboratory for finite-dimensional synaptic algebras realized
//! as self-adjoint parts of direct sums of full real matrix algebras.
//!
//! Modules build on each other bottom-up:
//!
//! - [`linalg`]: dense symmetric kernel (Jacobi eigensolver, subspaces).
//! - [`order`]: Loewner order, order-unit norm, Jordan and quadratic products.
//! - [`projection`]: projections, effects, symmetries, the projection lattice.
//! - [`spectral`]: spectral resolutions, spectra and bounds.
//! - [`structure`]: direct-sum algebras, commutants, centers, corners.
//! - [`antilattice`]: infimum decisions and the antilattice/factor suite.
//! - [`cli`]: the `synlab` command-line front end.

pub mod antilattice;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod order;
pub mod projection;
pub mod sampling;
pub mod spectral;
pub mod structure;

pub use error::{Error, Result};
pub use linalg::{SymMatrix, Tolerances};
pub use structure::{AlgebraSpec, Element};
