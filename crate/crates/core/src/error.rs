//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by network construction, the network algebra, and the
/// verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnError {
    /// A layer has inconsistent shapes or does not chain with its predecessor.
    #[error("invalid layer {layer}: {reason}")]
    Shape { layer: usize, reason: String },

    /// A network must contain at least one layer.
    #[error("a network needs at least one layer")]
    NoLayers,

    /// The input vector handed to a realization has the wrong length.
    #[error("input has length {got} but the network expects {expected}")]
    InputDim { expected: usize, got: usize },

    /// The outer network of a composition does not accept the inner output.
    #[error(
        "cannot compose: outer network {outer} has input dimension {outer_in}, \
         inner network {inner} has output dimension {inner_out}"
    )]
    Composition {
        outer: String,
        inner: String,
        outer_in: usize,
        inner_out: usize,
    },

    /// An operation that needs matching input and output dimensions got a
    /// non-square network.
    #[error("network {dims} must have equal input and output dimension")]
    NotSquare { dims: String },

    /// Requested extension depth is shorter than the network.
    #[error("cannot extend a network of depth {depth} to depth {target}")]
    Extension { depth: usize, target: usize },

    /// Equal-depth parallelization received networks of different depth.
    #[error("parallelization needs equal depths, got {depths:?}")]
    DepthMismatch { depths: Vec<usize> },

    /// An identity emulator does not fit the network it should extend.
    #[error("identity emulator {index} has dimension {emulator} but network {index} outputs {output}")]
    EmulatorMismatch {
        index: usize,
        emulator: usize,
        output: usize,
    },

    /// A network offered as an identity emulator is not one.
    #[error("not an identity emulator: {0}")]
    NotIdentity(String),

    /// An operation on a sequence received no networks.
    #[error("{0} needs at least one network")]
    Empty(&'static str),

    /// Networks or weights that must agree in shape do not.
    #[error("{0}")]
    Mismatch(String),

    /// A parameter lies outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural hypothesis of a construction fails.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A serialized document could not be read.
    #[error("parse error: {0}")]
    Parse(String),

    /// A verification suite name is not known.
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, AnnError>;
