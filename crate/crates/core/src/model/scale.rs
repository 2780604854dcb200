use super::{ModelError, Potential};

const BISECTION_RTOL: f64 = 1e-12;

/// Space/time scaling attached to a tilt strength: `H² V_λ(H) = 1`, `h = 1/H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleInfo {
    pub lambda: f64,
    pub h_big: f64,
    pub h_small: f64,
}

impl ScaleInfo {
    /// Scale with a prescribed `H`, for callers that already know it.
    pub fn from_h_big(lambda: f64, h_big: f64) -> Self {
        Self {
            lambda,
            h_big,
            h_small: 1.0 / h_big,
        }
    }

    /// Lattice steps per unit of rescaled time.
    pub fn time_factor(&self) -> f64 {
        self.h_big * self.h_big
    }
}

/// Solves `H² V_λ(H) = 1`. Closed form `λ^{-1/3}` for the linear potential,
/// bracketing bisection otherwise.
pub fn h_scale(potential: &Potential) -> Result<ScaleInfo, ModelError> {
    let lambda = potential.lambda();
    if potential.is_linear() {
        return Ok(ScaleInfo::from_h_big(lambda, lambda.powf(-1.0 / 3.0)));
    }
    let f = |h: f64| h * h * potential.eval(h) - 1.0;
    let mut hi = 1.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(ModelError::NoRoot);
        }
    }
    let mut lo = 0.0;
    while hi - lo > BISECTION_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ScaleInfo::from_h_big(lambda, 0.5 * (lo + hi)))
}
