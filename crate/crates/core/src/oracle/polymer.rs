use crate::exact::{binomial, Budget, Distribution, StateSpace, Support};

use super::{GridSpec, OracleError};

/// Half-width of the discrete Gaussian step, in cells.
pub const KERNEL_RADIUS: i64 = 8;
pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 100_000;

/// Tilt of the polymer: curve `i` (zero-based) pays `a b^i x_i` per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolymerTilt {
    pub a: f64,
    pub b: f64,
}

impl PolymerTilt {
    pub fn new(a: f64, b: f64) -> Result<Self, OracleError> {
        if !(a.is_finite() && a >= 0.0 && b.is_finite() && b > 0.0) {
            return Err(OracleError::InvalidBoundary(format!("bad tilt a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }
}

/// Boundary condition at the two ends `-M` and `M`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolymerBoundary {
    /// Both ends at the lowest chamber point `(n, ..., 1)·dx`.
    ZeroBC,
    /// Both ends pinned.
    Fixed { u: Vec<f64>, v: Vec<f64> },
    /// Left end pinned (lowest chamber point when `u` is `None`), right end free.
    FreeRight { u: Option<Vec<f64>> },
    /// Both ends free.
    FreeBoth,
}

/// One step of the grid chain on the dense cube `{1..cells}^n`:
/// `v ← w · G(w · v)` with `w = exp(-½ dt cost)` on the open chamber and
/// zero elsewhere, and `G` the discrete Gaussian of variance `dt` applied
/// coordinatewise. Mass stepping below the first cell or above the cap is lost.
#[derive(Debug, Clone)]
pub struct ChamberOperator {
    n: usize,
    cells: usize,
    half_w: Vec<f64>,
    taps: Vec<f64>,
}

impl ChamberOperator {
    pub fn new(n: usize, tilt: PolymerTilt, grid: &GridSpec) -> Result<Self, OracleError> {
        let cells = grid.cells();
        if cells < n {
            return Err(OracleError::InvalidGrid("fewer cells than curves".into()));
        }
        let size = (cells as u128).saturating_pow(n as u32);
        let budget = Budget::from_env();
        if size > budget.max_entries as u128 {
            return Err(OracleError::TooLarge {
                needed: size,
                budget: budget.max_entries,
            });
        }
        let dt = grid.dt();
        let dx = grid.dx();
        let mut half_w = vec![0.0; size as usize];
        let mut idx = vec![0usize; n];
        for w in half_w.iter_mut() {
            // idx[0] is the slowest-varying coordinate, curve 1
            let ordered = idx.windows(2).all(|p| p[0] > p[1]);
            if ordered {
                let mut cost = 0.0;
                let mut f = tilt.a;
                for &c in &idx {
                    cost += f * (c + 1) as f64 * dx;
                    f *= tilt.b;
                }
                *w = (-0.5 * dt * cost).exp();
            }
            for d in idx.iter_mut().rev() {
                *d += 1;
                if *d < cells {
                    break;
                }
                *d = 0;
            }
        }
        let raw: Vec<f64> = (-KERNEL_RADIUS..=KERNEL_RADIUS)
            .map(|k| (-(k * k) as f64 / 2.0).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        let taps = raw.iter().map(|g| g / total).collect();
        Ok(Self {
            n,
            cells,
            half_w,
            taps,
        })
    }

    pub fn len(&self) -> usize {
        self.half_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.half_w.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Dense index of a cell tuple (1-based cells).
    pub fn dense_index(&self, cells: &[i64]) -> usize {
        cells
            .iter()
            .fold(0usize, |acc, &c| acc * self.cells + (c - 1) as usize)
    }

    pub fn in_chamber(&self, i: usize) -> bool {
        self.half_w[i] > 0.0
    }

    fn convolve_axis(&self, v: &mut [f64], axis: usize, line: &mut Vec<f64>, out: &mut Vec<f64>) {
        let k = self.cells;
        let stride = k.pow((self.n - 1 - axis) as u32);
        let outer = v.len() / (k * stride);
        let r = KERNEL_RADIUS as usize;
        line.resize(k + 2 * r, 0.0);
        out.resize(k, 0.0);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * k * stride + inner;
                let mut any = false;
                for c in 0..k {
                    let x = v[base + c * stride];
                    line[r + c] = x;
                    any |= x != 0.0;
                }
                if !any {
                    continue;
                }
                for (c, slot) in out.iter_mut().enumerate() {
                    let window = &line[c..c + 2 * r + 1];
                    *slot = window.iter().zip(&self.taps).map(|(a, b)| a * b).sum();
                }
                for (c, &x) in out.iter().enumerate() {
                    v[base + c * stride] = x;
                }
            }
        }
    }

    /// Applies the symmetric step in place.
    pub fn apply(&self, v: &mut [f64]) {
        let mut line = Vec::new();
        let mut out = Vec::new();
        for (x, w) in v.iter_mut().zip(&self.half_w) {
            *x *= w;
        }
        for axis in 0..self.n {
            self.convolve_axis(v, axis, &mut line, &mut out);
        }
        for (x, w) in v.iter_mut().zip(&self.half_w) {
            *x *= w;
        }
    }

    /// `steps` applications, rescaling to unit maximum after each.
    pub fn propagate(&self, v: &mut [f64], steps: usize) {
        for _ in 0..steps {
            self.apply(v);
            let m = v.iter().copied().fold(0.0, f64::max);
            if m > 0.0 {
                v.iter_mut().for_each(|x| *x /= m);
            }
        }
    }

    /// Indicator of the chamber, the free-end boundary weight.
    pub fn free(&self) -> Vec<f64> {
        self.half_w.iter().map(|&w| if w > 0.0 { 1.0 } else { 0.0 }).collect()
    }

    pub fn point(&self, cells: &[i64]) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        v[self.dense_index(cells)] = 1.0;
        v
    }

    /// Chamber-restricted law from a dense weight vector, ordered like
    /// [`StateSpace`] over `cells`.
    pub fn to_distribution(&self, dense: &[f64], dx: f64) -> Result<Distribution, OracleError> {
        let unlimited = Budget {
            max_entries: u64::MAX,
        };
        let space = StateSpace::enumerate(self.n, self.cells as i64, &unlimited)?;
        debug_assert_eq!(space.len() as u128, binomial(self.cells as u64, self.n as u64));
        let w: Vec<f64> = space.iter().map(|s| dense[self.dense_index(s)]).collect();
        Ok(Distribution::from_weights(
            Support::Grid {
                n: self.n,
                cells: self.cells as i64,
                dx,
            },
            &w,
        )?)
    }
}

fn lowest(n: usize, scale: i64) -> Vec<i64> {
    (1..=n as i64).rev().map(|k| k * scale).collect()
}

fn cells_of(grid: &GridSpec, op: &ChamberOperator, x: &[f64]) -> Result<Vec<i64>, OracleError> {
    let c: Vec<i64> = x.iter().map(|&h| grid.cell(h)).collect();
    let ok = c.windows(2).all(|p| p[0] > p[1])
        && c.last().is_some_and(|&l| l >= 1)
        && c[0] <= op.cells() as i64;
    if ok {
        Ok(c)
    } else {
        Err(OracleError::InvalidBoundary(format!(
            "{x:?} does not map into the grid chamber"
        )))
    }
}

/// Left and right boundary weights as dense vectors.
fn ends(
    n: usize,
    grid: &GridSpec,
    op: &ChamberOperator,
    boundary: &PolymerBoundary,
) -> Result<(Vec<f64>, Vec<f64>), OracleError> {
    let check = |x: &[f64]| {
        if x.len() != n {
            Err(OracleError::InvalidBoundary(format!(
                "boundary {x:?} has the wrong length"
            )))
        } else {
            cells_of(grid, op, x)
        }
    };
    Ok(match boundary {
        PolymerBoundary::ZeroBC => {
            let p = op.point(&lowest(n, 1));
            (p.clone(), p)
        }
        PolymerBoundary::Fixed { u, v } => (op.point(&check(u)?), op.point(&check(v)?)),
        PolymerBoundary::FreeRight { u } => {
            let start = match u {
                Some(u) => op.point(&check(u)?),
                None => op.point(&lowest(n, 1)),
            };
            (start, op.free())
        }
        PolymerBoundary::FreeBoth => (op.free(), op.free()),
    })
}

/// Forward-backward product at `t` from given end weights.
fn marginal_from_ends(
    op: &ChamberOperator,
    grid: &GridSpec,
    mut alpha: Vec<f64>,
    mut beta: Vec<f64>,
    t: f64,
) -> Result<Distribution, OracleError> {
    let s = grid.steps_to(t)?;
    op.propagate(&mut alpha, s);
    op.propagate(&mut beta, grid.total_steps() - s);
    let prod: Vec<f64> = alpha.iter().zip(&beta).map(|(a, b)| a * b).collect();
    op.to_distribution(&prod, grid.dx())
}

/// One-time law at `t ∈ [-M, M]` of the discretized polymer.
pub fn polymer_marginal(
    n: usize,
    tilt: PolymerTilt,
    grid: &GridSpec,
    boundary: &PolymerBoundary,
    t: f64,
) -> Result<Distribution, OracleError> {
    let op = ChamberOperator::new(n, tilt, grid)?;
    let (alpha, beta) = ends(n, grid, &op, boundary)?;
    marginal_from_ends(&op, grid, alpha, beta, t)
}

pub fn free_marginal(
    n: usize,
    tilt: PolymerTilt,
    grid: &GridSpec,
    both: bool,
    t: f64,
) -> Result<Distribution, OracleError> {
    let boundary = if both {
        PolymerBoundary::FreeBoth
    } else {
        PolymerBoundary::FreeRight { u: None }
    };
    polymer_marginal(n, tilt, grid, &boundary, t)
}

/// Free-right polymer whose left end is drawn from `start` (a grid law at
/// `-M`), each component measure normalized separately.
pub fn mixture_marginal(
    n: usize,
    tilt: PolymerTilt,
    grid: &GridSpec,
    start: &Distribution,
    t: f64,
) -> Result<Distribution, OracleError> {
    let op = ChamberOperator::new(n, tilt, grid)?;
    let Support::Grid { cells, .. } = start.support() else {
        return Err(OracleError::InvalidBoundary("start law must live on the grid".into()));
    };
    if *cells as usize != op.cells() {
        return Err(OracleError::InvalidBoundary("start law on a different grid".into()));
    }
    // partition function of each pinned start with a free right end, up to
    // a common factor
    let mut z = op.free();
    op.propagate(&mut z, grid.total_steps());
    let unlimited = Budget {
        max_entries: u64::MAX,
    };
    let space = StateSpace::enumerate(n, op.cells() as i64, &unlimited)?;
    let mut alpha = vec![0.0; op.len()];
    for (s, &p) in space.iter().zip(start.probs()) {
        let i = op.dense_index(s);
        if p > 0.0 && z[i] > 0.0 {
            alpha[i] = p / z[i];
        }
    }
    marginal_from_ends(&op, grid, alpha, op.free(), t)
}

/// Leading eigenvector `φ` of the symmetric step operator; the stationary
/// one-time law is `φ²` normalized.
pub fn stationary_density(
    n: usize,
    tilt: PolymerTilt,
    grid: &GridSpec,
) -> Result<Distribution, OracleError> {
    let op = ChamberOperator::new(n, tilt, grid)?;
    let mut v = op.free();
    normalize_l2(&mut v);
    let mut next = v.clone();
    for _ in 0..POWER_MAX_ITER {
        next.copy_from_slice(&v);
        op.apply(&mut next);
        normalize_l2(&mut next);
        let diff = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if diff < POWER_TOL {
            if v.iter().enumerate().any(|(i, &x)| op.in_chamber(i) && !(x > 0.0)) {
                return Err(OracleError::NotPositive);
            }
            let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
            return op.to_distribution(&sq, grid.dx());
        }
    }
    Err(OracleError::NoConvergence {
        iterations: POWER_MAX_ITER,
    })
}

fn normalize_l2(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Laws at `t = 0` for starts `ε w` with `ε ∈ {4dx, 2dx, dx}`.
#[derive(Debug, Clone)]
pub struct ZeroBcReport {
    /// The `ε = dx` law.
    pub law: Distribution,
    /// `[TV(4dx, 2dx), TV(2dx, dx)]`.
    pub cauchy: [f64; 2],
    /// TV at `ε = dx` between directions `w = (n, ..., 1)` and `w + e_1`.
    pub direction_tv: f64,
}

/// Approximates the zero boundary condition by pinning both ends at `ε w`
/// and shrinking `ε` down to one cell.
pub fn zero_bc_extrapolate(
    n: usize,
    tilt: PolymerTilt,
    grid: &GridSpec,
) -> Result<ZeroBcReport, OracleError> {
    let op = ChamberOperator::new(n, tilt, grid)?;
    let law_at = |cells: Vec<i64>| {
        let p = op.point(&cells);
        marginal_from_ends(&op, grid, p.clone(), p, 0.0)
    };
    let laws = [4, 2, 1]
        .into_iter()
        .map(|e| law_at(lowest(n, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w2 = lowest(n, 1);
    w2[0] += 1;
    let other = law_at(w2)?;
    let cauchy = [laws[0].tv(&laws[1])?, laws[1].tv(&laws[2])?];
    let direction_tv = laws[2].tv(&other)?;
    Ok(ZeroBcReport {
        law: laws.into_iter().nth(2).unwrap(),
        cauchy,
        direction_tv,
    })
}
