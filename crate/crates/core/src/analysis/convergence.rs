use rayon::prelude::*;

use super::{binned_tv, linear_scale, AnalysisError, LatticeMarginal, LimitBoundary};
use crate::exact::{ExactEngine, ExactError};
use crate::gibbs::{GibbsSampler, McmcParams};
use crate::model::{EnsembleSpec, Kernel, Potential, TiltSpec};
use crate::oracle::{default_height_cap, stationary_density, GridSpec, PolymerTilt};

#[derive(Debug, Clone)]
pub struct ConvergenceSetup {
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub kernel: Kernel,
    pub boundary: LimitBoundary,
    /// Lattice half-width `N = round(half_scale / λ)`.
    pub half_scale: f64,
    pub dx: f64,
    pub height_cap: Option<f64>,
    /// Used only when the exact engine exceeds its budget.
    pub mcmc: McmcParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub lambda: f64,
    pub half_width: i64,
    pub tv: f64,
    /// Whether the marginal came from the sampler rather than the exact engine.
    pub sampled: bool,
}

/// Binned TV between the rescaled top-curve law at time 0 and the top
/// coordinate of the stationary polymer law, one point per λ.
pub fn convergence_to_mu(setup: &ConvergenceSetup) -> Result<Vec<ConvergencePoint>, AnalysisError> {
    let sigma = setup.kernel.std_dev();
    let tilt = PolymerTilt::new(setup.a * sigma, setup.b)?;
    let cap = setup
        .height_cap
        .unwrap_or_else(|| default_height_cap(setup.n, tilt.a));
    let grid = GridSpec::new(setup.dx, cap, 0.0)?;
    let oracle = stationary_density(setup.n, tilt, &grid)?.coordinate(0)?;

    setup
        .lambdas
        .par_iter()
        .map(|&lambda| {
            let scale = linear_scale(lambda)?;
            let half = ((setup.half_scale / lambda).round() as i64).max(1);
            let lattice_tilt = TiltSpec::new(setup.a, setup.b, Potential::linear(lambda)?)?;
            let boundary = setup.boundary.to_lattice(sigma * scale.h_big);
            let spec =
                EnsembleSpec::with_default_cutoff(setup.n, -half, half, boundary, &lattice_tilt)?;
            let to_y = scale.h_small / sigma;
            let (lat, sampled) = match ExactEngine::new(&spec, &setup.kernel, &lattice_tilt) {
                Ok(engine) => {
                    let law = engine.marginal(0)?.coordinate(0)?;
                    (LatticeMarginal::from_line(&law, to_y)?, false)
                }
                Err(ExactError::TooLarge { .. }) => {
                    let sampler = GibbsSampler::new(&spec, &setup.kernel, &lattice_tilt)?;
                    let (paths, _) = sampler.sample_paths(&setup.mcmc)?;
                    let tops: Vec<i64> = paths.iter().map(|p| p.get(0, 0)).collect();
                    (LatticeMarginal::from_samples(&tops, to_y)?, true)
                }
                Err(e) => return Err(e.into()),
            };
            let width = (setup.kernel.period() as f64 * to_y).max(setup.dx);
            Ok(ConvergencePoint {
                lambda,
                half_width: half,
                tv: binned_tv(&lat, &oracle, width)?,
                sampled,
            })
        })
        .collect()
}
