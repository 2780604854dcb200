use super::GibbsError;

pub const MIN_SERIES_LEN: usize = 10;
/// Window is grown until it exceeds this multiple of the running estimate.
pub const WINDOW_FACTOR: f64 = 5.0;

/// Integrated autocorrelation time `τ = ½ + Σ_{t=1}^{W} ρ(t)` with the
/// self-consistent window `W ≥ 5τ`. An uncorrelated series gives `½`.
pub fn autocorr(series: &[f64]) -> Result<f64, GibbsError> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(GibbsError::TooShort(n));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centred.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if !(c0 > 0.0) || c0 < 1e-300 {
        return Err(GibbsError::Degenerate);
    }
    let mut tau = 0.5;
    for lag in 1..n / 2 {
        let c: f64 = centred[..n - lag]
            .iter()
            .zip(&centred[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        tau += c / c0;
        if lag as f64 >= WINDOW_FACTOR * tau {
            break;
        }
    }
    Ok(tau.max(0.5))
}
