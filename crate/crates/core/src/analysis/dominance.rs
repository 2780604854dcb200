use super::AnalysisError;
use crate::exact::{Distribution, ExactEngine};
use crate::model::{Boundary, EnsembleSpec, Kernel, TiltSpec};
use crate::oracle::{polymer_marginal, GridSpec, PolymerBoundary, PolymerTilt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceReport {
    /// `max_x (F_upper(x) - F_lower(x))`; non-positive when the order holds.
    pub max_violation: f64,
    pub pass: bool,
}

impl DominanceReport {
    fn merge(reports: impl IntoIterator<Item = DominanceReport>) -> DominanceReport {
        let max_violation = reports
            .into_iter()
            .map(|r| r.max_violation)
            .fold(f64::NEG_INFINITY, f64::max);
        DominanceReport {
            max_violation,
            pass: max_violation <= 0.0,
        }
    }
}

fn suffix_sums(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    let mut acc = 0.0;
    for k in (0..p.len()).rev() {
        out[k] = acc;
        acc += p[k];
    }
    out
}

/// Checks `F_upper ≤ F_lower` pointwise, i.e. the law of `upper` dominates.
/// Lower tails are compared where the CDF is small and upper tails elsewhere,
/// so rounding near 1 cannot masquerade as a violation.
pub fn dominance_check(
    lower: &Distribution,
    upper: &Distribution,
) -> Result<DominanceReport, AnalysisError> {
    if lower.support() != upper.support() || lower.atoms().is_none() {
        return Err(AnalysisError::GridMismatch);
    }
    let (p, q) = (lower.probs(), upper.probs());
    let (sp, sq) = (suffix_sums(p), suffix_sums(q));
    let (mut fp, mut fq) = (0.0, 0.0);
    let mut worst = 0.0f64;
    for k in 0..p.len().saturating_sub(1) {
        fp += p[k];
        fq += q[k];
        let diff = if fp <= 0.5 { fq - fp } else { sp[k] - sq[k] };
        worst = worst.max(diff);
    }
    Ok(DominanceReport {
        max_violation: worst,
        pass: worst <= 0.0,
    })
}

fn per_curve(
    n: usize,
    lower: &Distribution,
    upper: &Distribution,
) -> Result<DominanceReport, AnalysisError> {
    let reports = (0..n)
        .map(|i| dominance_check(&lower.coordinate(i)?, &upper.coordinate(i)?))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(DominanceReport::merge(reports))
}

/// Coordinatewise ordering at time `t` between two polymer boundary conditions.
pub fn oracle_monotonicity(
    n: usize,
    tilt: PolymerTilt,
    grid: &GridSpec,
    lower: &PolymerBoundary,
    upper: &PolymerBoundary,
    t: f64,
) -> Result<DominanceReport, AnalysisError> {
    let lo = polymer_marginal(n, tilt, grid, lower, t)?;
    let hi = polymer_marginal(n, tilt, grid, upper, t)?;
    per_curve(n, &lo, &hi)
}

/// Zero boundary ⪯ free right end from zero ⪯ both ends free, at `t = 0`.
pub fn oracle_sandwich(
    n: usize,
    tilt: PolymerTilt,
    grid: &GridSpec,
) -> Result<[DominanceReport; 2], AnalysisError> {
    let zero = polymer_marginal(n, tilt, grid, &PolymerBoundary::ZeroBC, 0.0)?;
    let right = polymer_marginal(n, tilt, grid, &PolymerBoundary::FreeRight { u: None }, 0.0)?;
    let both = polymer_marginal(n, tilt, grid, &PolymerBoundary::FreeBoth, 0.0)?;
    Ok([per_curve(n, &zero, &right)?, per_curve(n, &right, &both)?])
}

/// Lattice counterpart for walks started at `u_low ≤ u_high`, observed at time
/// `t`. Not claimed by theory; failures are findings, not errors.
#[allow(clippy::too_many_arguments)]
pub fn walk_dominance(
    kernel: &Kernel,
    tilt: &TiltSpec,
    m_left: i64,
    n_right: i64,
    u_low: &[i64],
    u_high: &[i64],
    x_max: i64,
    t: i64,
) -> Result<DominanceReport, AnalysisError> {
    let n = u_low.len();
    let law = |u: &[i64]| -> Result<Distribution, AnalysisError> {
        let spec = EnsembleSpec::new(n, m_left, n_right, Boundary::Walk { u: u.to_vec() }, x_max)?;
        Ok(ExactEngine::new(&spec, kernel, tilt)?.marginal(t)?)
    };
    per_curve(n, &law(u_low)?, &law(u_high)?)
}
