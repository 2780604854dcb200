//! Kernels, potentials, tilts, ensembles and paths.

mod ensemble;
mod kernel;
mod path;
mod potential;
mod scale;
mod tilt;

pub use ensemble::{default_cutoff, in_open_chamber, Boundary, EnsembleSpec};
pub use kernel::Kernel;
pub use path::{LogWeight, PathConfig, RescaledPath};
pub use potential::{LambdaRule, LowerBound, Potential, PotentialKind};
pub use scale::{h_scale, ScaleInfo};
pub use tilt::TiltSpec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("kernel has {offsets} offsets but {probs} probabilities")]
    LengthMismatch { offsets: usize, probs: usize },
    #[error("kernel support is empty")]
    EmptyKernel,
    #[error("kernel probability {0} is not positive")]
    NonPositiveProbability(f64),
    #[error("kernel offset {0} appears twice")]
    DuplicateOffset(i64),
    #[error("kernel probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("kernel mean is {0}, not 0")]
    NonzeroMean(f64),
    #[error("kernel support generates {0}Z, not Z")]
    NotIrreducible(i64),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("no solution of H^2 V(H) = 1")]
    NoRoot,
    #[error("invalid tilt: {0}")]
    InvalidTilt(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("time {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}
