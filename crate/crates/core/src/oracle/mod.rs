//! Discretized Brownian polymer above a wall with geometric area tilts.

mod grid;
mod polymer;

pub use grid::{default_height_cap, GridSpec};
pub use polymer::{
    free_marginal, mixture_marginal, polymer_marginal, stationary_density, zero_bc_extrapolate,
    ChamberOperator, PolymerBoundary, PolymerTilt, ZeroBcReport, KERNEL_RADIUS, POWER_MAX_ITER,
    POWER_TOL,
};

use thiserror::Error;

use crate::exact::ExactError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),
    #[error("grid of {needed} cells exceeds the budget {budget}")]
    TooLarge { needed: u128, budget: u64 },
    #[error("time {0} is not a grid time in [-M, M]")]
    TimeOutOfRange(f64),
    #[error("power iteration did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("leading eigenvector is not positive on the chamber")]
    NotPositive,
}
