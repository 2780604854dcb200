use super::ModelError;

const NORMALIZATION_TOL: f64 = 1e-12;
const MEAN_TOL: f64 = 1e-12;

/// Finite-support step distribution of the underlying random walk.
///
/// Offsets are kept sorted ascending; `probs[k]` is the probability of a step
/// of size `offsets[k]`. The kernel is validated to be normalized, centred and
/// irreducible on the integers. The variance is recorded but not forced to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    offsets: Vec<i64>,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
    variance: f64,
    period: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Kernel {
    pub fn new(offsets: Vec<i64>, probs: Vec<f64>) -> Result<Self, ModelError> {
        if offsets.len() != probs.len() {
            return Err(ModelError::LengthMismatch {
                offsets: offsets.len(),
                probs: probs.len(),
            });
        }
        if offsets.is_empty() {
            return Err(ModelError::EmptyKernel);
        }
        if let Some(&p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(ModelError::NonPositiveProbability(p));
        }
        let mut pairs: Vec<(i64, f64)> = offsets.into_iter().zip(probs).collect();
        pairs.sort_by_key(|&(z, _)| z);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(ModelError::DuplicateOffset(w[0].0));
        }

        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ModelError::NotNormalized(total));
        }
        let mean: f64 = pairs.iter().map(|&(z, p)| z as f64 * p).sum();
        if mean.abs() > MEAN_TOL {
            return Err(ModelError::NonzeroMean(mean));
        }
        // The subgroup generated by the support is gcd(support) * Z.
        let generator = pairs.iter().fold(0, |g, &(z, _)| gcd(g, z));
        if generator != 1 {
            return Err(ModelError::NotIrreducible(generator));
        }
        let first = pairs[0].0;
        let period = pairs.iter().fold(0, |g, &(z, _)| gcd(g, z - first));
        let variance = pairs.iter().map(|&(z, p)| (z * z) as f64 * p).sum();

        let (offsets, probs): (Vec<i64>, Vec<f64>) = pairs.into_iter().unzip();
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Ok(Self {
            offsets,
            probs,
            log_probs,
            variance,
            period,
        })
    }

    /// Simple random walk, steps ±1 with probability 1/2.
    pub fn simple() -> Self {
        Self::new(vec![-1, 1], vec![0.5, 0.5]).expect("simple walk kernel is valid")
    }

    /// Lazy walk: 0 with probability 1/2, ±1 with probability 1/4.
    pub fn lazy() -> Self {
        Self::new(vec![-1, 0, 1], vec![0.25, 0.5, 0.25]).expect("lazy walk kernel is valid")
    }

    /// Uniform steps on `{-radius, ..., radius}`.
    pub fn uniform(radius: i64) -> Result<Self, ModelError> {
        let offsets: Vec<i64> = (-radius..=radius).collect();
        let p = 1.0 / offsets.len() as f64;
        let probs = vec![p; offsets.len()];
        Self::new(offsets, probs)
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn support_size(&self) -> usize {
        self.offsets.len()
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// gcd of the pairwise differences of the support.
    pub fn period(&self) -> i64 {
        self.period
    }

    pub fn min_step(&self) -> i64 {
        self.offsets[0]
    }

    pub fn max_step(&self) -> i64 {
        *self.offsets.last().unwrap()
    }

    /// Largest absolute step.
    pub fn reach(&self) -> i64 {
        self.min_step().abs().max(self.max_step())
    }

    pub fn prob(&self, z: i64) -> f64 {
        match self.offsets.binary_search(&z) {
            Ok(k) => self.probs[k],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.offsets.iter().copied().zip(self.probs.iter().copied())
    }

    /// Whether a free walk can go from `from` to `to` in exactly `steps`
    /// steps, ignoring the wall. Accounts for the period of the support.
    pub fn bridge_feasible(&self, from: i64, to: i64, steps: u64) -> bool {
        let steps = steps as i64;
        let delta = to - from;
        if delta < self.min_step() * steps || delta > self.max_step() * steps {
            return false;
        }
        (delta - steps * self.offsets[0]).rem_euclid(self.period) == 0
    }
}
