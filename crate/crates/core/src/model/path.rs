use super::{in_open_chamber, EnsembleSpec, ModelError, ScaleInfo, TiltSpec};

/// Heights `X_i(j)` for `i = 1..n`, `j = M..N`, stored column by column.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathConfig {
    n: usize,
    m_left: i64,
    data: Vec<i64>,
}

/// Log of an unnormalized weight; `NegInfinity` marks a forbidden path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogWeight {
    Finite(f64),
    NegInfinity,
}

impl LogWeight {
    pub fn is_finite(&self) -> bool {
        matches!(self, LogWeight::Finite(_))
    }

    /// `f64::NEG_INFINITY` for the sentinel, for callers doing arithmetic.
    pub fn to_f64(self) -> f64 {
        match self {
            LogWeight::Finite(w) => w,
            LogWeight::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

impl PathConfig {
    /// Builds a path from its columns, checking shape and boundary columns.
    pub fn from_columns(spec: &EnsembleSpec, columns: &[Vec<i64>]) -> Result<Self, ModelError> {
        if columns.len() != spec.len() || columns.iter().any(|c| c.len() != spec.n()) {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {} columns of height {}",
                spec.len(),
                spec.n()
            )));
        }
        if columns[0] != spec.boundary().start() {
            return Err(ModelError::DimensionMismatch(
                "first column differs from u".into(),
            ));
        }
        if let Some(v) = spec.boundary().end() {
            if columns[columns.len() - 1] != v {
                return Err(ModelError::DimensionMismatch(
                    "last column differs from v".into(),
                ));
            }
        }
        Ok(Self::from_columns_unchecked(spec.n(), spec.m_left(), columns))
    }

    pub fn from_columns_unchecked(n: usize, m_left: i64, columns: &[Vec<i64>]) -> Self {
        let data = columns.iter().flat_map(|c| c.iter().copied()).collect();
        Self { n, m_left, data }
    }

    /// Flat column-major storage, `n` entries per time.
    pub fn from_flat(n: usize, m_left: i64, data: Vec<i64>) -> Self {
        assert!(n > 0 && data.len() % n == 0, "flat data not a multiple of n");
        Self { n, m_left, data }
    }

    /// Constant path equal to `column` at every time of the window.
    pub fn constant(m_left: i64, n_right: i64, column: &[i64]) -> Self {
        let len = (n_right - m_left + 1) as usize;
        let data = column.iter().copied().cycle().take(len * column.len()).collect();
        Self {
            n: column.len(),
            m_left,
            data,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_left(&self) -> i64 {
        self.m_left
    }

    pub fn n_right(&self) -> i64 {
        self.m_left + self.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn flat(&self) -> &[i64] {
        &self.data
    }

    /// Heights of all curves at time `t`.
    pub fn column(&self, t: i64) -> &[i64] {
        let k = (t - self.m_left) as usize;
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn column_mut(&mut self, t: i64) -> &mut [i64] {
        let k = (t - self.m_left) as usize;
        &mut self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[i64]> + '_ {
        self.data.chunks_exact(self.n)
    }

    /// `X_i(t)` with zero-based curve index.
    pub fn get(&self, curve: usize, t: i64) -> i64 {
        self.column(t)[curve]
    }

    pub fn set(&mut self, curve: usize, t: i64, value: i64) {
        self.column_mut(t)[curve] = value;
    }

    /// Trajectory of one curve over the window.
    pub fn curve(&self, curve: usize) -> Vec<i64> {
        self.columns().map(|c| c[curve]).collect()
    }

    /// Restriction to `{k, ..., l}`.
    pub fn slice(&self, k: i64, l: i64) -> Self {
        let a = (k - self.m_left) as usize * self.n;
        let b = (l - self.m_left + 1) as usize * self.n;
        Self {
            n: self.n,
            m_left: k,
            data: self.data[a..b].to_vec(),
        }
    }

    /// `𝒜 = a Σ_i b^{i-1} Σ_{j=M}^{N-1} V_λ(X_i(j))`; the last column is not charged.
    pub fn area_functional(&self, tilt: &TiltSpec) -> f64 {
        let last = self.len() - 1;
        self.columns().take(last).map(|c| tilt.column_cost(c)).sum()
    }

    /// Every column lies in the open chamber.
    pub fn ordering_ok(&self) -> bool {
        self.columns().all(in_open_chamber)
    }

    pub fn log_tilt_weight(&self, tilt: &TiltSpec) -> LogWeight {
        if self.ordering_ok() {
            LogWeight::Finite(-self.area_functional(tilt))
        } else {
            LogWeight::NegInfinity
        }
    }

    pub fn rescale(&self, scale: &ScaleInfo) -> RescaledPath {
        let h = scale.h_small;
        let times = (0..self.len())
            .map(|k| h * h * (self.m_left + k as i64) as f64)
            .collect();
        let values = self.data.iter().map(|&x| h * x as f64).collect();
        RescaledPath {
            n: self.n,
            m_left: self.m_left,
            h,
            times,
            values,
        }
    }
}

/// `x(t) = h X(t/h²)`, linearly interpolated between grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledPath {
    n: usize,
    m_left: i64,
    h: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl RescaledPath {
    /// Builds a rescaled path directly from real-valued grid samples.
    pub fn from_grid(n: usize, m_left: i64, h: f64, columns: &[Vec<f64>]) -> Self {
        let times = (0..columns.len())
            .map(|k| h * h * (m_left + k as i64) as f64)
            .collect();
        let values = columns.iter().flat_map(|c| c.iter().copied()).collect();
        Self {
            n,
            m_left,
            h,
            times,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_min(&self) -> f64 {
        self.times[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Values of all curves at the `k`-th grid time.
    pub fn grid_column(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    fn grid_value(&self, curve: usize, k: usize) -> f64 {
        self.values[k * self.n + curve]
    }

    /// Grid index of the last grid time not after `t`.
    fn locate(&self, t: f64) -> Result<usize, ModelError> {
        if !(t >= self.t_min() && t <= self.t_max()) {
            return Err(ModelError::OutOfRange {
                t,
                lo: self.t_min(),
                hi: self.t_max(),
            });
        }
        let j = (t / (self.h * self.h)).floor() as i64 - self.m_left;
        Ok((j.max(0) as usize).min(self.times.len() - 1))
    }

    pub fn eval(&self, curve: usize, t: f64) -> Result<f64, ModelError> {
        let k = self.locate(t)?;
        if k + 1 == self.times.len() {
            return Ok(self.grid_value(curve, k));
        }
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        Ok((1.0 - w) * self.grid_value(curve, k) + w * self.grid_value(curve, k + 1))
    }

    pub fn eval_column(&self, t: f64) -> Result<Vec<f64>, ModelError> {
        (0..self.n).map(|i| self.eval(i, t)).collect()
    }

    /// Grid indices whose times lie in `[t0, t1]`.
    pub fn grid_range(&self, t0: f64, t1: f64) -> std::ops::Range<usize> {
        let lo = self.times.partition_point(|&s| s < t0);
        let hi = self.times.partition_point(|&s| s <= t1);
        lo..hi.max(lo)
    }

    /// Maximum of one curve over `[t0, t1]`, endpoints included. The
    /// interpolant is linear between grid points, so grid values and the
    /// two endpoint values suffice.
    pub fn max_on(&self, curve: usize, t0: f64, t1: f64) -> Result<f64, ModelError> {
        self.extreme_on(curve, t0, t1, f64::max)
    }

    pub fn min_on(&self, curve: usize, t0: f64, t1: f64) -> Result<f64, ModelError> {
        self.extreme_on(curve, t0, t1, f64::min)
    }

    fn extreme_on(
        &self,
        curve: usize,
        t0: f64,
        t1: f64,
        pick: fn(f64, f64) -> f64,
    ) -> Result<f64, ModelError> {
        let mut best = pick(self.eval(curve, t0)?, self.eval(curve, t1)?);
        for k in self.grid_range(t0, t1) {
            best = pick(best, self.grid_value(curve, k));
        }
        Ok(best)
    }

    /// Multiplies values by `H` and times by `H²`, recovering lattice heights.
    pub fn unrescale(&self) -> PathConfig {
        let big = 1.0 / self.h;
        let data = self.values.iter().map(|&x| (x * big).round() as i64).collect();
        PathConfig::from_flat(self.n, self.m_left, data)
    }

    /// Lattice times recovered from the grid.
    pub fn lattice_times(&self) -> Vec<f64> {
        let big = 1.0 / self.h;
        self.times.iter().map(|&t| t * big * big).collect()
    }
}
