use rayon::prelude::*;

use super::AnalysisError;
use crate::exact::ExactEngine;
use crate::model::{Boundary, EnsembleSpec, Kernel, TiltSpec};
use crate::numeric::ols;

/// Stability tolerance for the slope when `T` doubles.
const STABILITY_TOL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    /// `(T, log Z_T)` for walks of `T` steps.
    pub points: Vec<(i64, f64)>,
    /// Secant slopes between consecutive grid points.
    pub secants: Vec<f64>,
    /// Differences of consecutive secant slopes.
    pub second_differences: Vec<f64>,
    /// Least-squares slope on the upper half of the grid.
    pub slope: f64,
    /// Intercept lowered until the line sits below every point.
    pub intercept: f64,
    /// `|s_last / s_prev - 1|` for the last two secants.
    pub stability: f64,
    pub pass: bool,
}

/// `log Z^w_T` of the walk ensemble started at `w` on `[0, T]` for each `T`.
pub fn log_partition_slope(
    w: &[i64],
    ts: &[i64],
    kernel: &Kernel,
    tilt: &TiltSpec,
    x_max: i64,
) -> Result<SlopeReport, AnalysisError> {
    if ts.len() < 3 || ts.windows(2).any(|p| p[0] >= p[1]) || ts[0] < 1 {
        return Err(AnalysisError::Invalid(
            "need at least three increasing positive T".into(),
        ));
    }
    let points = ts
        .par_iter()
        .map(|&t| {
            let spec = EnsembleSpec::new(w.len(), 0, t, Boundary::Walk { u: w.to_vec() }, x_max)?;
            Ok((t, ExactEngine::new(&spec, kernel, tilt)?.partition()?.log_z))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;

    let secants: Vec<f64> = points
        .windows(2)
        .map(|p| (p[1].1 - p[0].1) / (p[1].0 - p[0].0) as f64)
        .collect();
    let second_differences: Vec<f64> = secants.windows(2).map(|s| s[1] - s[0]).collect();
    let tail = &points[points.len() / 2..];
    let (xs, ys): (Vec<f64>, Vec<f64>) = tail.iter().map(|&(t, z)| (t as f64, z)).unzip();
    let slope = ols(&xs, &ys).map_or(secants[secants.len() - 1], |f| f.slope);
    let intercept = points
        .iter()
        .map(|&(t, z)| z - slope * t as f64)
        .fold(f64::INFINITY, f64::min);
    let (prev, last) = (secants[secants.len() - 2], secants[secants.len() - 1]);
    let stability = if prev == 0.0 {
        if last == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (last / prev - 1.0).abs()
    };
    let finite = points.iter().all(|p| p.1.is_finite()) && slope.is_finite();
    Ok(SlopeReport {
        pass: finite && stability <= STABILITY_TOL,
        points,
        secants,
        second_differences,
        slope,
        intercept,
        stability,
    })
}
