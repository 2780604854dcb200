use super::OracleError;

/// Space-time grid with diffusive coupling `dt = dx²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dx: f64,
    height_cap: f64,
    m_half: f64,
}

/// `30/a + 5` for one curve, plus `3/a` for each further curve.
pub fn default_height_cap(n: usize, a: f64) -> f64 {
    30.0 / a + 5.0 + 3.0 / a * (n as f64 - 1.0)
}

impl GridSpec {
    pub fn new(dx: f64, height_cap: f64, m_half: f64) -> Result<Self, OracleError> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(OracleError::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if !(height_cap.is_finite() && height_cap >= dx) {
            return Err(OracleError::InvalidGrid(format!(
                "height cap {height_cap} below one cell"
            )));
        }
        if !(m_half.is_finite() && m_half >= 0.0) {
            return Err(OracleError::InvalidGrid(format!(
                "half-width must be non-negative, got {m_half}"
            )));
        }
        Ok(Self {
            dx,
            height_cap,
            m_half,
        })
    }

    pub fn with_default_cap(dx: f64, m_half: f64, n: usize, a: f64) -> Result<Self, OracleError> {
        Self::new(dx, default_height_cap(n, a), m_half)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dx * self.dx
    }

    pub fn height_cap(&self) -> f64 {
        self.height_cap
    }

    pub fn m_half(&self) -> f64 {
        self.m_half
    }

    pub fn with_m_half(&self, m_half: f64) -> Self {
        Self { m_half, ..*self }
    }

    pub fn with_dx(&self, dx: f64) -> Self {
        Self { dx, ..*self }
    }

    /// Heights are `k·dx` for `k = 1..=cells`.
    pub fn cells(&self) -> usize {
        (self.height_cap / self.dx).round() as usize
    }

    /// Steps from `-M` to `M`.
    pub fn total_steps(&self) -> usize {
        (2.0 * self.m_half / self.dt()).round() as usize
    }

    /// Steps from `-M` to `t`; `t` must sit on the time grid.
    pub fn steps_to(&self, t: f64) -> Result<usize, OracleError> {
        let k = (t + self.m_half) / self.dt();
        let r = k.round();
        if !(t >= -self.m_half - 1e-12 && t <= self.m_half + 1e-12) || (k - r).abs() > 1e-6 {
            return Err(OracleError::TimeOutOfRange(t));
        }
        Ok(r as usize)
    }

    /// Nearest cell index (1-based) for a height.
    pub fn cell(&self, x: f64) -> i64 {
        (x / self.dx).round() as i64
    }
}
