use super::{ModelError, Potential};

/// Geometric area tilt: curve `i` (zero-based) pays `a · b^i · V_λ(x)` per site.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltSpec {
    a: f64,
    b: f64,
    potential: Potential,
}

impl TiltSpec {
    pub fn new(a: f64, b: f64, potential: Potential) -> Result<Self, ModelError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(ModelError::InvalidTilt(format!("a must be positive, got {a}")));
        }
        if !(b.is_finite() && b > 1.0) {
            return Err(ModelError::InvalidTilt(format!("b must exceed 1, got {b}")));
        }
        Ok(Self { a, b, potential })
    }

    /// The untilted reference measure (`a = 0`): only the wall and the
    /// ordering constraint remain.
    pub fn reference(potential: Potential) -> Self {
        Self {
            a: 0.0,
            b: 2.0,
            potential,
        }
    }

    /// Same potential and `b`, different prefactor `a ≥ 0`.
    pub fn with_prefactor(&self, a: f64) -> Self {
        Self {
            a,
            b: self.b,
            potential: self.potential.clone(),
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn lambda(&self) -> f64 {
        self.potential.lambda()
    }

    /// `a b^{i}` for zero-based curve index `i`.
    pub fn curve_weight(&self, curve: usize) -> f64 {
        self.a * self.b.powi(curve as i32)
    }

    /// Tilt charged for one time slice, `a Σ_i b^{i} V_λ(x_i)`.
    pub fn column_cost(&self, column: &[i64]) -> f64 {
        if self.a == 0.0 {
            return 0.0;
        }
        let mut factor = self.a;
        let mut cost = 0.0;
        for &x in column {
            cost += factor * self.potential.eval(x as f64);
            factor *= self.b;
        }
        cost
    }
}
