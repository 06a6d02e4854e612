//! A calculus of deep ReLU networks with explicit weights.
//!
//! Networks are finite sequences of affine layers ([`Network`]). The
//! [`calculus`] module composes, powers, extends, parallelizes and sums them;
//! [`relu`] builds explicit approximators for squares, products and
//! scalar-vector products; [`euler`] assembles networks that realize
//! perturbed Euler schemes in space and in space-time; [`bounds`] evaluates
//! the size bounds of all constructions; and [`verify`] checks realizations
//! and bounds on sample grids.

pub mod bounds;
pub mod calculus;
pub mod cli;
pub mod error;
pub mod euler;
pub mod network;
pub mod relu;
pub mod verify;

pub use calculus::IdentityEmulator;
pub use error::{AnnError, Result};
pub use euler::EulerSpec;
pub use network::{Activation, Dims, Layer, Matrix, Network};
pub use verify::BoundReport;
