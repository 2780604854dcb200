use super::{Kernel, ModelError, TiltSpec};

/// Boundary data of the ensemble on `{M, ..., N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Boundary {
    /// Fixed at `u` at time `M`, free at `N`.
    Walk { u: Vec<i64> },
    /// Fixed at `u` at time `M` and at `v` at time `N`.
    Bridge { u: Vec<i64>, v: Vec<i64> },
}

impl Boundary {
    pub fn start(&self) -> &[i64] {
        match self {
            Boundary::Walk { u } | Boundary::Bridge { u, .. } => u,
        }
    }

    pub fn end(&self) -> Option<&[i64]> {
        match self {
            Boundary::Walk { .. } => None,
            Boundary::Bridge { v, .. } => Some(v),
        }
    }

    pub fn is_bridge(&self) -> bool {
        matches!(self, Boundary::Bridge { .. })
    }

    /// Largest top-curve boundary height.
    pub fn top(&self) -> i64 {
        let u1 = self.start()[0];
        self.end().map_or(u1, |v| u1.max(v[0]))
    }
}

/// Strictly decreasing with last entry at least one.
pub fn in_open_chamber(x: &[i64]) -> bool {
    x.windows(2).all(|w| w[0] > w[1]) && x.last().is_some_and(|&l| l > 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    n: usize,
    m_left: i64,
    n_right: i64,
    boundary: Boundary,
    x_max: i64,
}

impl EnsembleSpec {
    pub fn new(
        n: usize,
        m_left: i64,
        n_right: i64,
        boundary: Boundary,
        x_max: i64,
    ) -> Result<Self, ModelError> {
        let invalid = |msg: String| Err(ModelError::InvalidEnsemble(msg));
        if n == 0 {
            return invalid("need at least one curve".into());
        }
        if m_left >= n_right {
            return invalid(format!("empty window [{m_left}, {n_right}]"));
        }
        for (name, x) in [("u", Some(boundary.start())), ("v", boundary.end())] {
            let Some(x) = x else { continue };
            if x.len() != n {
                return invalid(format!("{name} has {} entries, expected {n}", x.len()));
            }
            if !in_open_chamber(x) {
                return invalid(format!("{name} = {x:?} is not strictly decreasing and positive"));
            }
            if x[0] > x_max {
                return invalid(format!("{name}_1 = {} exceeds the cutoff {x_max}", x[0]));
            }
        }
        Ok(Self {
            n,
            m_left,
            n_right,
            boundary,
            x_max,
        })
    }

    /// Builds a spec with the default cutoff for the given tilt.
    pub fn with_default_cutoff(
        n: usize,
        m_left: i64,
        n_right: i64,
        boundary: Boundary,
        tilt: &TiltSpec,
    ) -> Result<Self, ModelError> {
        let x_max = default_cutoff(tilt, boundary.top());
        Self::new(n, m_left, n_right, boundary, x_max)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_left(&self) -> i64 {
        self.m_left
    }

    pub fn n_right(&self) -> i64 {
        self.n_right
    }

    pub fn len(&self) -> usize {
        (self.n_right - self.m_left + 1) as usize
    }

    /// Number of steps `N - M`.
    pub fn steps(&self) -> usize {
        (self.n_right - self.m_left) as usize
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn x_max(&self) -> i64 {
        self.x_max
    }

    pub fn contains(&self, t: i64) -> bool {
        (self.m_left..=self.n_right).contains(&t)
    }

    pub fn with_x_max(&self, x_max: i64) -> Result<Self, ModelError> {
        Self::new(self.n, self.m_left, self.n_right, self.boundary.clone(), x_max)
    }

    /// Whether every coordinate of a bridge can reach its endpoint, wall ignored.
    pub fn parity_feasible(&self, kernel: &Kernel) -> bool {
        match &self.boundary {
            Boundary::Walk { .. } => true,
            Boundary::Bridge { u, v } => u
                .iter()
                .zip(v)
                .all(|(&a, &b)| kernel.bridge_feasible(a, b, self.steps() as u64)),
        }
    }
}

/// `ceil(x* + top + 5)` where `V_λ(x*) = 30`; for the linear potential
/// `x* = 30/λ`, so mass above the cutoff carries a factor at most `e^{-30}`.
pub fn default_cutoff(tilt: &TiltSpec, top: i64) -> i64 {
    let reach = tilt.potential().level_crossing(30.0);
    (reach + top as f64 + 5.0).ceil() as i64
}
