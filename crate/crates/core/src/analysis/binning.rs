use std::collections::BTreeMap;

use super::AnalysisError;
use crate::exact::{Distribution, MIN_ENDPOINT_PROB};

/// One-dimensional lattice law mapped to rescaled heights `y = h X / σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeMarginal {
    pub atoms: Vec<f64>,
    pub probs: Vec<f64>,
}

impl LatticeMarginal {
    /// Keeps atoms with probability above the endpoint floor.
    pub fn from_line(law: &Distribution, scale: f64) -> Result<Self, AnalysisError> {
        let atoms = law.atoms().ok_or(AnalysisError::GridMismatch)?;
        let (atoms, probs) = atoms
            .iter()
            .zip(law.probs())
            .filter(|(_, &p)| p > MIN_ENDPOINT_PROB)
            .map(|(&x, &p)| (x * scale, p))
            .unzip();
        Ok(Self { atoms, probs })
    }

    /// Empirical law of samples already expressed in lattice units.
    pub fn from_samples(values: &[i64], scale: f64) -> Result<Self, AnalysisError> {
        if values.is_empty() {
            return Err(AnalysisError::Invalid("no samples".into()));
        }
        let mut counts = BTreeMap::new();
        for &v in values {
            *counts.entry(v).or_insert(0u64) += 1;
        }
        let total = values.len() as f64;
        let (atoms, probs) = counts
            .into_iter()
            .map(|(v, c)| (v as f64 * scale, c as f64 / total))
            .unzip();
        Ok(Self { atoms, probs })
    }
}

/// Cumulative mass at `x` when each oracle cell spreads its mass uniformly
/// over `[x_k - dx/2, x_k + dx/2]`.
fn smoothed_cdf(atoms: &[f64], probs: &[f64], dx: f64, x: f64) -> f64 {
    let mut acc = 0.0;
    for (&a, &p) in atoms.iter().zip(probs) {
        let lo = a - 0.5 * dx;
        if x >= lo + dx {
            acc += p;
        } else if x > lo {
            acc += p * (x - lo) / dx;
            break;
        } else {
            break;
        }
    }
    acc
}

/// `sup |F_lattice - F_oracle|` evaluated midway between consecutive lattice
/// atoms, where the lattice CDF is flat.
pub fn sup_cdf_distance(
    lattice: &LatticeMarginal,
    oracle: &Distribution,
) -> Result<f64, AnalysisError> {
    let atoms = oracle.atoms().ok_or(AnalysisError::GridMismatch)?;
    let dx = if atoms.len() > 1 { atoms[1] - atoms[0] } else { 1.0 };
    let mut worst: f64 = 0.0;
    let mut f_lat = 0.0;
    for k in 0..lattice.atoms.len().saturating_sub(1) {
        f_lat += lattice.probs[k];
        let mid = 0.5 * (lattice.atoms[k] + lattice.atoms[k + 1]);
        let f_orc = smoothed_cdf(&atoms, oracle.probs(), dx, mid);
        worst = worst.max((f_lat - f_orc).abs());
    }
    Ok(worst)
}

/// TV after binning both laws into cells of width `width`, shifted so that
/// lattice atoms sit at cell centres.
pub fn binned_tv(
    lattice: &LatticeMarginal,
    oracle: &Distribution,
    width: f64,
) -> Result<f64, AnalysisError> {
    if !(width > 0.0) {
        return Err(AnalysisError::Invalid(format!("bin width {width}")));
    }
    let atoms = oracle.atoms().ok_or(AnalysisError::GridMismatch)?;
    let first = lattice
        .atoms
        .first()
        .ok_or_else(|| AnalysisError::Invalid("empty lattice law".into()))?;
    let offset = 0.5 * width - first.rem_euclid(width);
    let bin = |y: f64| ((y + offset) / width).floor() as i64;
    let mut diff: BTreeMap<i64, f64> = BTreeMap::new();
    for (&y, &p) in lattice.atoms.iter().zip(&lattice.probs) {
        *diff.entry(bin(y)).or_insert(0.0) += p;
    }
    for (&y, &p) in atoms.iter().zip(oracle.probs()) {
        *diff.entry(bin(y)).or_insert(0.0) -= p;
    }
    Ok((0.5 * diff.values().map(|d| d.abs()).sum::<f64>()).min(1.0))
}
