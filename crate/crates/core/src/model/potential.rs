use super::ModelError;

/// How a user-supplied table depends on the tilt strength λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaRule {
    /// `V_λ(x) = λ · g(x)` where `g` is the tabulated function.
    Scaled,
    /// The table already is `V_λ` for the stated λ.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `V_λ(x) = λ x`.
    Linear,
    /// Monotone table evaluated by piecewise-linear interpolation, with linear
    /// extrapolation along the last segment beyond the final sample.
    UserMonotone {
        table: Vec<(f64, f64)>,
        rule: LambdaRule,
    },
}

/// A monotone lower-bound profile `q0(r)` used for reporting only.
#[derive(Debug, Clone, PartialEq)]
pub enum LowerBound {
    Identity,
    Table(Vec<(f64, f64)>),
}

impl LowerBound {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            LowerBound::Identity => r,
            LowerBound::Table(t) => interpolate(t, r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    lambda: f64,
    q0: Option<LowerBound>,
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let last = table.len() - 1;
    let seg = match table.iter().position(|&(tx, _)| tx >= x) {
        Some(0) => 0,
        Some(k) => k - 1,
        None => last - 1,
    };
    let (x0, y0) = table[seg];
    let (x1, y1) = table[seg + 1];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

impl Potential {
    pub fn linear(lambda: f64) -> Result<Self, ModelError> {
        check_lambda(lambda)?;
        Ok(Self {
            kind: PotentialKind::Linear,
            lambda,
            q0: Some(LowerBound::Identity),
        })
    }

    pub fn user_monotone(
        table: Vec<(f64, f64)>,
        rule: LambdaRule,
        lambda: f64,
    ) -> Result<Self, ModelError> {
        check_lambda(lambda)?;
        if table.len() < 2 {
            return Err(ModelError::InvalidPotential(
                "table needs at least two samples".into(),
            ));
        }
        if table[0] != (0.0, 0.0) {
            return Err(ModelError::InvalidPotential(
                "table must start at (0, 0)".into(),
            ));
        }
        for w in table.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ModelError::InvalidPotential(
                    "sample abscissae must be strictly increasing".into(),
                ));
            }
            if !(w[1].1 >= w[0].1) || !w[1].1.is_finite() {
                return Err(ModelError::InvalidPotential(
                    "potential must be non-decreasing and finite".into(),
                ));
            }
        }
        let n = table.len();
        if !(table[n - 1].1 > table[n - 2].1) {
            return Err(ModelError::InvalidPotential(
                "last segment must be strictly increasing so the potential diverges".into(),
            ));
        }
        Ok(Self {
            kind: PotentialKind::UserMonotone { table, rule },
            lambda,
            q0: None,
        })
    }

    pub fn with_lower_bound(mut self, q0: LowerBound) -> Self {
        self.q0 = Some(q0);
        self
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, PotentialKind::Linear)
    }

    pub fn lower_bound(&self) -> Option<&LowerBound> {
        self.q0.as_ref()
    }

    /// `V_λ(x)` for `x ≥ 0`.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Linear => self.lambda * x,
            PotentialKind::UserMonotone { table, rule } => {
                let g = interpolate(table, x);
                match rule {
                    LambdaRule::Scaled => self.lambda * g,
                    LambdaRule::Fixed => g,
                }
            }
        }
    }

    /// Smallest `x ≥ 0` with `V_λ(x) ≥ level`.
    pub fn level_crossing(&self, level: f64) -> f64 {
        if let PotentialKind::Linear = self.kind {
            return level / self.lambda;
        }
        let mut hi = 1.0;
        while self.eval(hi) < level {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

fn check_lambda(lambda: f64) -> Result<(), ModelError> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidPotential(format!(
            "lambda must be positive, got {lambda}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_is_exact() {
        let v = Potential::linear(0.25).unwrap();
        assert_eq!(v.eval(0.0), 0.0);
        assert_eq!(v.eval(8.0), 2.0);
        assert_eq!(v.level_crossing(30.0), 120.0);
    }

    #[test]
    fn table_interpolates_and_extrapolates() {
        let table = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)];
        let v = Potential::user_monotone(table, LambdaRule::Scaled, 0.5).unwrap();
        assert_eq!(v.eval(0.5), 0.25);
        assert_eq!(v.eval(1.5), 1.25);
        // beyond the table the last slope (3) continues
        assert_eq!(v.eval(3.0), 0.5 * 7.0);
    }

    #[test]
    fn table_validation() {
        let bad_origin = vec![(0.0, 1.0), (1.0, 2.0)];
        assert!(Potential::user_monotone(bad_origin, LambdaRule::Fixed, 1.0).is_err());
        let decreasing = vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)];
        assert!(Potential::user_monotone(decreasing, LambdaRule::Fixed, 1.0).is_err());
        let flat_tail = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)];
        assert!(Potential::user_monotone(flat_tail, LambdaRule::Fixed, 1.0).is_err());
        assert!(Potential::linear(0.0).is_err());
    }
}
