//! Heat-bath block resampling of the tilted ensemble.

mod autocorr;
mod sampler;

pub use autocorr::{autocorr, MIN_SERIES_LEN, WINDOW_FACTOR};
pub use sampler::{
    ChainDiagnostics, ChainRun, GibbsSampler, McmcParams, ObservableDiag, RESAMPLE_SLACK,
};

use thiserror::Error;

use crate::exact::ExactError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GibbsError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no admissible configuration below the cutoff")]
    Infeasible,
    #[error("invalid MCMC parameters: {0}")]
    InvalidParams(String),
    #[error("series of length {0} is too short")]
    TooShort(usize),
    #[error("series has zero variance")]
    Degenerate,
}
