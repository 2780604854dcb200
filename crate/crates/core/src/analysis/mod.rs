//! Experiment drivers: mixing decay, invariance, convergence to the
//! stationary law, dominance, good blocks and partition-function slopes.

mod binning;
mod blocks;
mod convergence;
mod dominance;
mod invariance;
mod mixing;
mod slope;

pub use binning::{binned_tv, sup_cdf_distance, LatticeMarginal};
pub use blocks::{good_blocks, good_blocks_within, BlockFlag, FiveBlockFlag, GoodBlockReport};
pub use convergence::{convergence_to_mu, ConvergencePoint, ConvergenceSetup};
pub use dominance::{
    dominance_check, oracle_monotonicity, oracle_sandwich, walk_dominance, DominanceReport,
};
pub use invariance::{
    invariance_check, invariance_refinement, InvariancePoint, InvarianceSetup, LimitBoundary,
};
pub use mixing::{mixing_curve, MixingReport, MixingSetup, TV_FLOOR};
pub use slope::{log_partition_slope, SlopeReport};

use thiserror::Error;

use crate::exact::ExactError;
use crate::gibbs::GibbsError;
use crate::model::ModelError;
use crate::oracle::OracleError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("exact engine: {0}")]
    Exact(#[from] ExactError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("sampler: {0}")]
    Gibbs(#[from] GibbsError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("distributions are not on a common grid")]
    GridMismatch,
    #[error("invalid setup: {0}")]
    Invalid(String),
}

/// `H = h_λ^{-1}` for the linear potential.
pub(crate) fn linear_scale(lambda: f64) -> Result<crate::model::ScaleInfo, AnalysisError> {
    let v = crate::model::Potential::linear(lambda)?;
    Ok(crate::model::h_scale(&v)?)
}

/// Lattice boundary heights `max(n - i, round(σ H u_i))`, forced strictly decreasing.
pub(crate) fn lattice_heights(u: &[f64], sigma_h: f64) -> Vec<i64> {
    let n = u.len();
    let mut out = vec![0i64; n];
    for i in (0..n).rev() {
        let floor = if i + 1 < n { out[i + 1] + 1 } else { 1 };
        out[i] = ((sigma_h * u[i]).round() as i64).max(floor);
    }
    out
}
