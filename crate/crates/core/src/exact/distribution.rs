use std::sync::Arc;

use super::{binomial, Budget, ExactError, StateSpace};
use crate::numeric::log_sum_exp;

/// What the entries of a [`Distribution`] are indexed by.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Joint law of the lattice chamber state at `times`; the flat index is
    /// mixed radix with the first time most significant.
    Chamber {
        n: usize,
        x_max: i64,
        times: Vec<i64>,
    },
    /// Ordered grid chamber: states are `k·dx` with `k` a strictly decreasing
    /// tuple in `{1, ..., cells}`, enumerated like [`StateSpace`].
    Grid { n: usize, cells: i64, dx: f64 },
    /// Real atoms `origin + k·step`, `k = 0..count`.
    Line { origin: f64, step: f64, count: usize },
    /// Explicitly listed interior paths, each flattened column by column.
    Paths {
        n: usize,
        times: Vec<i64>,
        paths: Arc<Vec<Vec<i64>>>,
    },
}

impl Support {
    pub fn len(&self) -> usize {
        match self {
            Support::Chamber { n, x_max, times } => {
                let per = binomial(*x_max as u64, *n as u64) as usize;
                per.pow(times.len() as u32)
            }
            Support::Grid { n, cells, .. } => binomial(*cells as u64, *n as u64) as usize,
            Support::Line { count, .. } => *count,
            Support::Paths { paths, .. } => paths.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Normalized probability vector with its log normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    support: Support,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    log_norm: f64,
}

impl Distribution {
    pub fn from_log_weights(support: Support, log_weights: Vec<f64>) -> Result<Self, ExactError> {
        if log_weights.len() != support.len() {
            return Err(ExactError::SpaceMismatch);
        }
        let log_norm = log_sum_exp(&log_weights);
        if log_norm == f64::NEG_INFINITY || log_norm.is_nan() {
            return Err(ExactError::ZeroMass);
        }
        let probs = log_weights.iter().map(|&w| (w - log_norm).exp()).collect();
        Ok(Self {
            support,
            log_weights,
            probs,
            log_norm,
        })
    }

    /// From nonnegative linear weights.
    pub fn from_weights(support: Support, weights: &[f64]) -> Result<Self, ExactError> {
        let logs = weights
            .iter()
            .map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY })
            .collect();
        Self::from_log_weights(support, logs)
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `log Σ exp(log_weights)`.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Total variation distance, `½ Σ |p - q|`.
    pub fn tv(&self, other: &Distribution) -> Result<f64, ExactError> {
        tv_exact(self, other)
    }

    /// Marginal at the `k`-th of several times of a chamber law.
    pub fn time_marginal(&self, k: usize) -> Result<Distribution, ExactError> {
        let Support::Chamber { n, x_max, times } = &self.support else {
            return Err(ExactError::SpaceMismatch);
        };
        if k >= times.len() {
            return Err(ExactError::SpaceMismatch);
        }
        let per = binomial(*x_max as u64, *n as u64) as usize;
        let inner = per.pow((times.len() - 1 - k) as u32);
        let mut w = vec![0.0; per];
        for (idx, &p) in self.probs.iter().enumerate() {
            w[(idx / inner) % per] += p;
        }
        Self::from_weights(
            Support::Chamber {
                n: *n,
                x_max: *x_max,
                times: vec![times[k]],
            },
            &w,
        )
    }

    /// Law of the sub-vector of times `keep` (strictly increasing positions).
    pub fn restrict_times(&self, keep: &[usize]) -> Result<Distribution, ExactError> {
        let Support::Chamber { n, x_max, times } = &self.support else {
            return Err(ExactError::SpaceMismatch);
        };
        if keep.iter().any(|&k| k >= times.len()) || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExactError::SpaceMismatch);
        }
        let per = binomial(*x_max as u64, *n as u64) as usize;
        let m = times.len();
        let mut w = vec![0.0; per.pow(keep.len() as u32)];
        let mut digits = vec![0usize; m];
        for (idx, &p) in self.probs.iter().enumerate() {
            let mut rem = idx;
            for d in digits.iter_mut().rev() {
                *d = rem % per;
                rem /= per;
            }
            let target = keep.iter().fold(0usize, |acc, &k| acc * per + digits[k]);
            w[target] += p;
        }
        Self::from_weights(
            Support::Chamber {
                n: *n,
                x_max: *x_max,
                times: keep.iter().map(|&k| times[k]).collect(),
            },
            &w,
        )
    }

    /// One-time law of a single curve (zero-based) as atoms on a line.
    pub fn coordinate(&self, curve: usize) -> Result<Distribution, ExactError> {
        let (n, cells, origin, step) = match &self.support {
            Support::Chamber { n, x_max, times } if times.len() == 1 => (*n, *x_max, 1.0, 1.0),
            Support::Grid { n, cells, dx } => (*n, *cells, *dx, *dx),
            _ => return Err(ExactError::SpaceMismatch),
        };
        if curve >= n {
            return Err(ExactError::SpaceMismatch);
        }
        let unlimited = Budget {
            max_entries: u64::MAX,
        };
        let space = StateSpace::enumerate(n, cells, &unlimited)?;
        let mut w = vec![0.0; cells as usize];
        for (s, &p) in space.iter().zip(&self.probs) {
            w[(s[curve] - 1) as usize] += p;
        }
        Self::from_weights(
            Support::Line {
                origin,
                step,
                count: cells as usize,
            },
            &w,
        )
    }

    /// Atom positions for a line support.
    pub fn atoms(&self) -> Option<Vec<f64>> {
        match self.support {
            Support::Line {
                origin,
                step,
                count,
            } => Some((0..count).map(|k| origin + k as f64 * step).collect()),
            _ => None,
        }
    }

    /// Cumulative probabilities for a line support.
    pub fn cdf(&self) -> Option<Vec<f64>> {
        self.atoms()?;
        let mut acc = 0.0;
        Some(
            self.probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect(),
        )
    }

    pub fn mean(&self) -> Option<f64> {
        let atoms = self.atoms()?;
        Some(atoms.iter().zip(&self.probs).map(|(x, p)| x * p).sum())
    }
}

pub fn tv_exact(d1: &Distribution, d2: &Distribution) -> Result<f64, ExactError> {
    if d1.support != d2.support {
        return Err(ExactError::SpaceMismatch);
    }
    let s: f64 = d1
        .probs
        .iter()
        .zip(&d2.probs)
        .map(|(p, q)| (p - q).abs())
        .sum();
    Ok((0.5 * s).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(count: usize) -> Support {
        Support::Line {
            origin: 0.0,
            step: 1.0,
            count,
        }
    }

    #[test]
    fn tv_examples() {
        let a = Distribution::from_weights(line(2), &[0.5, 0.5]).unwrap();
        let b = Distribution::from_weights(line(2), &[1.0, 0.0]).unwrap();
        assert_eq!(tv_exact(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_exact(&a, &b).unwrap(), 0.5);
        let c = Distribution::from_weights(line(2), &[0.0, 3.0]).unwrap();
        assert_eq!(tv_exact(&b, &c).unwrap(), 1.0);
        let d = Distribution::from_weights(line(3), &[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(tv_exact(&a, &d), Err(ExactError::SpaceMismatch)));
    }

    #[test]
    fn normalizes_in_log_space() {
        let d = Distribution::from_log_weights(line(2), vec![-1000.0, -1000.0 + 2f64.ln()]).unwrap();
        assert!((d.probs()[1] - 2.0 / 3.0).abs() < 1e-13);
        assert!(matches!(
            Distribution::from_log_weights(line(1), vec![f64::NEG_INFINITY]),
            Err(ExactError::ZeroMass)
        ));
    }

    #[test]
    fn marginals_of_product() {
        // two times over the 3 states of n = 1, x_max = 3
        let support = Support::Chamber {
            n: 1,
            x_max: 3,
            times: vec![0, 1],
        };
        let w: Vec<f64> = (0..9).map(|k| (k + 1) as f64).collect();
        let d = Distribution::from_weights(support, &w).unwrap();
        let first = d.time_marginal(0).unwrap();
        let want = [6.0 / 45.0, 15.0 / 45.0, 24.0 / 45.0];
        for (p, q) in first.probs().iter().zip(want) {
            assert!((p - q).abs() < 1e-15);
        }
        let again = d.restrict_times(&[1]).unwrap();
        assert_eq!(again.support(), d.time_marginal(1).unwrap().support());
        assert!(tv_exact(&again, &d.time_marginal(1).unwrap()).unwrap() < 1e-15);
        let cdf = first.coordinate(0).unwrap().cdf().unwrap();
        assert!((cdf[2] - 1.0).abs() < 1e-15);
    }
}
