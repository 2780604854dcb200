use rayon::prelude::*;

use super::AnalysisError;
use crate::exact::{tv_exact, ExactEngine};
use crate::model::{default_cutoff, Boundary, EnsembleSpec, Kernel, TiltSpec};
use crate::numeric::ols;

/// TV values below this are treated as numerically zero in the fit.
pub const TV_FLOOR: f64 = 1e-12;

/// Two ensembles on `[-(K + T), K + T]` that differ only in boundary data.
#[derive(Debug, Clone)]
pub struct MixingSetup {
    pub n: usize,
    pub kernel: Kernel,
    pub tilt: TiltSpec,
    /// Half-width of the observed central window, in lattice steps.
    pub t_lattice: i64,
    pub ks: Vec<i64>,
    pub first: Boundary,
    pub second: Boundary,
    /// Common cutoff; defaults to the larger of the two default cutoffs.
    pub x_max: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub points: Vec<(i64, f64)>,
    /// Fit of `log tv ≈ log c1 - c2 K`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    /// No increase beyond `TV_FLOOR` along `K`.
    pub monotone: bool,
    pub strictly_decreasing: bool,
}

impl MixingReport {
    pub fn c1(&self) -> Option<f64> {
        self.intercept.map(f64::exp)
    }

    pub fn c2(&self) -> Option<f64> {
        self.slope.map(|s| -s)
    }
}

pub fn mixing_curve(setup: &MixingSetup) -> Result<MixingReport, AnalysisError> {
    if setup.t_lattice < 0 {
        return Err(AnalysisError::Invalid("t_lattice must be non-negative".into()));
    }
    if setup.ks.windows(2).any(|w| w[0] >= w[1]) || setup.ks.iter().any(|&k| k < 1) {
        return Err(AnalysisError::Invalid("K list must be positive and increasing".into()));
    }
    if setup.first.is_bridge() != setup.second.is_bridge() {
        return Err(AnalysisError::Invalid("both ensembles need the same mode".into()));
    }
    let x_max = setup.x_max.unwrap_or_else(|| {
        default_cutoff(&setup.tilt, setup.first.top()).max(default_cutoff(&setup.tilt, setup.second.top()))
    });
    let t = setup.t_lattice;
    let times: Vec<i64> = (-t..=t).collect();

    let points = setup
        .ks
        .par_iter()
        .map(|&k| {
            let half = k + t;
            let law = |b: &Boundary| -> Result<_, AnalysisError> {
                let spec = EnsembleSpec::new(setup.n, -half, half, b.clone(), x_max)?;
                let engine = ExactEngine::new(&spec, &setup.kernel, &setup.tilt)?;
                Ok(engine.law_restricted(&times)?)
            };
            let tv = tv_exact(&law(&setup.first)?, &law(&setup.second)?)?;
            Ok((k, tv))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;

    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(_, tv)| *tv > TV_FLOOR)
        .map(|&(k, tv)| (k as f64, tv.ln()))
        .unzip();
    let fit = ols(&xs, &ys);
    let monotone = points.windows(2).all(|w| w[1].1 <= w[0].1 + TV_FLOOR);
    let strictly_decreasing = points.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(MixingReport {
        points,
        slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
        r_squared: fit.map(|f| f.r_squared),
        monotone,
        strictly_decreasing,
    })
}
