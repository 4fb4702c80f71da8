//! Discrete fractional calculus on a uniform grid: Riemann–Liouville
//! integrals, Caputo derivatives, Sobolev–Slobodecki norms and the
//! Mittag-Leffler function.

use thiserror::Error;

pub mod gamma;
mod grid;
pub mod mittag_leffler;
pub mod norms;
mod operators;
mod probe;
pub mod sampling;
mod weights;

pub use grid::{FracOrder, SampledPath, TimeGrid};
pub use mittag_leffler::{mittag_leffler, mittag_leffler1};
pub use norms::{l2_norm, sobolev_slobodecki_norm, NormFlavor};
pub use operators::{caputo_derivative, caputo_derivative_with_tol, frac_integral, time_derivative, TOL_ZERO};
pub use probe::{norm_equivalence_probe, RatioReport};
pub use weights::ConvolutionWeights;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("invalid fractional order {0}")]
    InvalidOrder(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("path grid does not match the weight table grid")]
    GridMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite sample at node {node}, component {component}")]
    NonFinite { node: usize, component: usize },
    #[error("initial value {value:e} exceeds the zero-trace tolerance {tol:e}")]
    TraceViolation { value: f64, tol: f64 },
    #[error("Mittag-Leffler E_{{{alpha},{beta}}}({z}) is outside the supported range")]
    UnsupportedRange { alpha: f64, beta: f64, z: f64 },
    #[error("grid too coarse: need at least {needed} steps, found {found}")]
    InsufficientResolution { needed: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
