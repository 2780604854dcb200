//! Transfer-operator computations on the truncated chamber.

mod brute;
mod distribution;
mod engine;
mod space;
mod transfer;

pub use brute::enumerate_paths;
pub use distribution::{tv_exact, Distribution, Support};
pub use engine::{
    ConditionalLaw, ExactEngine, TransferResult, Warning, CUTOFF_WARN_FRACTION,
    DIAGNOSTIC_PATH_CAP, MIN_ENDPOINT_PROB,
};
pub use space::{binomial, Budget, StateSpace, DEFAULT_BUDGET};
pub use transfer::TransferStep;

use std::sync::Arc;

use thiserror::Error;

use crate::model::{Boundary, EnsembleSpec, Kernel, ModelError, PathConfig, TiltSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("needs {needed} entries, budget is {budget}")]
    TooLarge { needed: u128, budget: u64 },
    #[error("no chamber of {n} curves fits below {x_max}")]
    InvalidStateSpace { n: usize, x_max: i64 },
    #[error("bridge endpoints are incompatible with the kernel period")]
    ParityInfeasible,
    #[error("no admissible path below the cutoff")]
    Infeasible,
    #[error("distribution has no mass")]
    ZeroMass,
    #[error("conditioning event has log probability {log_prob}")]
    ZeroProbabilityEndpoint { log_prob: f64 },
    #[error("distributions live on different spaces")]
    SpaceMismatch,
    #[error("time {0} outside the window")]
    TimeOutOfWindow(i64),
    #[error("times {0:?} must be strictly increasing")]
    InvalidTimes(Vec<i64>),
    #[error("block [{k}, {l}] is not inside the window")]
    InvalidBlock { k: i64, l: i64 },
    #[error("{0:?} is not a state of the truncated chamber")]
    NotAState(Vec<i64>),
}

pub fn enumerate_states(n: usize, x_max: i64) -> Result<StateSpace, ExactError> {
    StateSpace::enumerate(n, x_max, &Budget::from_env())
}

pub fn step_matrix(
    states: Arc<StateSpace>,
    kernel: &Kernel,
    tilt: &TiltSpec,
) -> Result<TransferStep, ExactError> {
    TransferStep::build(states, kernel, tilt, &Budget::from_env())
}

pub fn partition_bridge(
    spec: &EnsembleSpec,
    kernel: &Kernel,
    tilt: &TiltSpec,
) -> Result<TransferResult, ExactError> {
    if !matches!(spec.boundary(), Boundary::Bridge { .. }) {
        return Err(ModelError::InvalidEnsemble("expected a bridge boundary".into()).into());
    }
    ExactEngine::new(spec, kernel, tilt)?.partition()
}

pub fn partition_walk(
    spec: &EnsembleSpec,
    kernel: &Kernel,
    tilt: &TiltSpec,
) -> Result<TransferResult, ExactError> {
    if !matches!(spec.boundary(), Boundary::Walk { .. }) {
        return Err(ModelError::InvalidEnsemble("expected a walk boundary".into()).into());
    }
    ExactEngine::new(spec, kernel, tilt)?.partition()
}

pub fn marginal(
    spec: &EnsembleSpec,
    kernel: &Kernel,
    tilt: &TiltSpec,
    t: i64,
) -> Result<Distribution, ExactError> {
    ExactEngine::new(spec, kernel, tilt)?.marginal(t)
}

pub fn law_restricted(
    spec: &EnsembleSpec,
    kernel: &Kernel,
    tilt: &TiltSpec,
    times: &[i64],
) -> Result<Distribution, ExactError> {
    ExactEngine::new(spec, kernel, tilt)?.law_restricted(times)
}

pub fn conditional_bridge_law(
    spec: &EnsembleSpec,
    kernel: &Kernel,
    tilt: &TiltSpec,
    k: i64,
    l: i64,
    endpoints: (&[i64], &[i64]),
) -> Result<ConditionalLaw, ExactError> {
    ExactEngine::new(spec, kernel, tilt)?.conditional_bridge_law(k, l, endpoints.0, endpoints.1)
}

pub fn exact_sample(
    spec: &EnsembleSpec,
    kernel: &Kernel,
    tilt: &TiltSpec,
    seed: u64,
    count: usize,
) -> Result<Vec<PathConfig>, ExactError> {
    ExactEngine::new(spec, kernel, tilt)?.exact_sample(seed, count)
}
