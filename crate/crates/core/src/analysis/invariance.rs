use rayon::prelude::*;

use super::{lattice_heights, linear_scale, sup_cdf_distance, AnalysisError, LatticeMarginal};
use crate::exact::{Distribution, ExactEngine};
use crate::model::{Boundary, EnsembleSpec, Kernel, Potential, TiltSpec};
use crate::oracle::{default_height_cap, polymer_marginal, GridSpec, PolymerBoundary, PolymerTilt};

/// Boundary heights of the limiting polymer, in rescaled units.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitBoundary {
    Walk { u: Vec<f64> },
    Bridge { u: Vec<f64>, v: Vec<f64> },
}

impl LimitBoundary {
    fn start(&self) -> &[f64] {
        match self {
            LimitBoundary::Walk { u } | LimitBoundary::Bridge { u, .. } => u,
        }
    }

    /// Lattice boundary for the spatial factor `σ H`.
    pub fn to_lattice(&self, sigma_h: f64) -> Boundary {
        match self {
            LimitBoundary::Walk { u } => Boundary::Walk {
                u: lattice_heights(u, sigma_h),
            },
            LimitBoundary::Bridge { u, v } => Boundary::Bridge {
                u: lattice_heights(u, sigma_h),
                v: lattice_heights(v, sigma_h),
            },
        }
    }

    pub fn to_polymer(&self) -> PolymerBoundary {
        match self {
            LimitBoundary::Walk { u } => PolymerBoundary::FreeRight { u: Some(u.clone()) },
            LimitBoundary::Bridge { u, v } => PolymerBoundary::Fixed {
                u: u.clone(),
                v: v.clone(),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvarianceSetup {
    pub n: usize,
    /// Half-width `M` of the continuum window.
    pub m_cont: f64,
    pub lambdas: Vec<f64>,
    pub kernel: Kernel,
    pub a: f64,
    pub b: f64,
    pub boundary: LimitBoundary,
    pub dx: f64,
    /// Oracle height cap; the default cap for tilt `a σ` when `None`.
    pub height_cap: Option<f64>,
    /// Observation time, at most `M` in absolute value.
    pub t_obs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariancePoint {
    pub lambda: f64,
    /// Lattice half-width `ceil(λ^{-2/3} M)`.
    pub half_width: i64,
    pub distance: f64,
}

impl InvarianceSetup {
    fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.m_cont > 0.0) {
            return Err(AnalysisError::Invalid("M must be positive".into()));
        }
        if !(self.t_obs.abs() <= self.m_cont) {
            return Err(AnalysisError::Invalid(format!(
                "observation time {} lies outside [-M, M] with M = {}",
                self.t_obs, self.m_cont
            )));
        }
        if self.boundary.start().len() != self.n {
            return Err(AnalysisError::Invalid("boundary has the wrong number of curves".into()));
        }
        Ok(())
    }

    fn oracle_tilt(&self) -> Result<PolymerTilt, AnalysisError> {
        Ok(PolymerTilt::new(self.a * self.kernel.std_dev(), self.b)?)
    }

    fn oracle_law(&self, dx: f64) -> Result<Distribution, AnalysisError> {
        let tilt = self.oracle_tilt()?;
        let cap = self
            .height_cap
            .unwrap_or_else(|| default_height_cap(self.n, tilt.a));
        let grid = GridSpec::new(dx, cap, self.m_cont)?;
        let t = ((self.t_obs + self.m_cont) / grid.dt()).round() * grid.dt() - self.m_cont;
        let law = polymer_marginal(self.n, tilt, &grid, &self.boundary.to_polymer(), t)?;
        Ok(law.coordinate(0)?)
    }

    /// Rescaled one-time law of the top curve and the lattice half-width.
    fn lattice_law(&self, lambda: f64) -> Result<(LatticeMarginal, i64), AnalysisError> {
        let scale = linear_scale(lambda)?;
        let sigma = self.kernel.std_dev();
        let steps_per_unit = scale.time_factor();
        let half = (steps_per_unit * self.m_cont - 1e-9).ceil() as i64;
        let j = (self.t_obs * steps_per_unit).round() as i64;
        let tilt = TiltSpec::new(self.a, self.b, Potential::linear(lambda)?)?;
        let boundary = self.boundary.to_lattice(sigma * scale.h_big);
        let spec = EnsembleSpec::with_default_cutoff(self.n, -half, half, boundary, &tilt)?;
        let engine = ExactEngine::new(&spec, &self.kernel, &tilt)?;
        let law = engine.marginal(j.clamp(-half, half))?.coordinate(0)?;
        Ok((LatticeMarginal::from_line(&law, scale.h_small / sigma)?, half))
    }
}

/// Sup-CDF distance between the rescaled lattice marginal of `x_1(t)` and the
/// polymer marginal, one point per λ.
pub fn invariance_check(setup: &InvarianceSetup) -> Result<Vec<InvariancePoint>, AnalysisError> {
    setup.validate()?;
    let oracle = setup.oracle_law(setup.dx)?;
    setup
        .lambdas
        .par_iter()
        .map(|&lambda| {
            let (lat, half_width) = setup.lattice_law(lambda)?;
            Ok(InvariancePoint {
                lambda,
                half_width,
                distance: sup_cdf_distance(&lat, &oracle)?,
            })
        })
        .collect()
}

/// Distance at one λ against the oracle on grids `dx` and `dx_fine`.
pub fn invariance_refinement(
    setup: &InvarianceSetup,
    lambda: f64,
    dx_fine: f64,
) -> Result<(f64, f64), AnalysisError> {
    setup.validate()?;
    let (lat, _) = setup.lattice_law(lambda)?;
    let coarse = sup_cdf_distance(&lat, &setup.oracle_law(setup.dx)?)?;
    let fine = sup_cdf_distance(&lat, &setup.oracle_law(dx_fine)?)?;
    Ok((coarse, fine))
}
