use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::brute::enumerate_paths;
use super::{Budget, Distribution, ExactError, StateSpace, Support, TransferStep};
use crate::model::{EnsembleSpec, Kernel, PathConfig, TiltSpec};
use crate::numeric::{log_sum_exp, LogAcc};

/// Share of boundary mass near the cutoff above which a warning is raised.
pub const CUTOFF_WARN_FRACTION: f64 = 1e-8;
/// Conditioning events lighter than this are refused.
pub const MIN_ENDPOINT_PROB: f64 = 1e-300;
/// Cap on whole-window paths enumerated for the conditional-law diagnostic.
pub const DIAGNOSTIC_PATH_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Largest one-time probability that the top curve sits within 2 of `x_max`.
    CutoffDominated { fraction: f64 },
}

/// Log partition value with the messages that produced it.
#[derive(Debug, Clone)]
pub struct TransferResult {
    pub log_z: f64,
    /// `forward[k]` is the log forward vector at time `M + k`.
    pub forward: Vec<Vec<f64>>,
    /// `backward[k]` is the log backward vector at time `M + k`.
    pub backward: Option<Vec<Vec<f64>>>,
    pub warnings: Vec<Warning>,
    n: usize,
    x_max: i64,
    m_left: i64,
}

impl TransferResult {
    /// `log Σ_s forward(t, s) backward(t, s)` at every time.
    pub fn log_z_by_time(&self) -> Option<Vec<f64>> {
        let bwd = self.backward.as_ref()?;
        Some(
            self.forward
                .iter()
                .zip(bwd)
                .map(|(f, b)| {
                    let mut acc = LogAcc::new();
                    f.iter().zip(b).for_each(|(x, y)| acc.add(x + y));
                    acc.value()
                })
                .collect(),
        )
    }

    /// One-time law of the chamber state at time `t`.
    pub fn marginal(&self, t: i64) -> Result<Distribution, ExactError> {
        let bwd = self.backward.as_ref().ok_or(ExactError::SpaceMismatch)?;
        let k = t - self.m_left;
        if k < 0 || k as usize >= self.forward.len() {
            return Err(ExactError::TimeOutOfWindow(t));
        }
        let k = k as usize;
        let w = self.forward[k]
            .iter()
            .zip(&bwd[k])
            .map(|(a, b)| a + b)
            .collect();
        Distribution::from_log_weights(
            Support::Chamber {
                n: self.n,
                x_max: self.x_max,
                times: vec![t],
            },
            w,
        )
    }
}

/// Law of the interior of a block given both of its endpoints.
#[derive(Debug, Clone)]
pub struct ConditionalLaw {
    pub law: Distribution,
    /// TV between the law obtained by conditioning the whole-window measure
    /// and the directly computed bridge law; `None` when the window is too
    /// large to enumerate.
    pub diagnostic_tv: Option<f64>,
}

/// Exact computations for one ensemble on its truncated state space.
#[derive(Debug, Clone)]
pub struct ExactEngine {
    spec: EnsembleSpec,
    kernel: Kernel,
    tilt: TiltSpec,
    step: Arc<TransferStep>,
    budget: Budget,
}

impl ExactEngine {
    pub fn new(spec: &EnsembleSpec, kernel: &Kernel, tilt: &TiltSpec) -> Result<Self, ExactError> {
        Self::with_budget(spec, kernel, tilt, Budget::from_env())
    }

    pub fn with_budget(
        spec: &EnsembleSpec,
        kernel: &Kernel,
        tilt: &TiltSpec,
        budget: Budget,
    ) -> Result<Self, ExactError> {
        let space = Arc::new(StateSpace::enumerate(spec.n(), spec.x_max(), &budget)?);
        let step = Arc::new(TransferStep::build(space, kernel, tilt, &budget)?);
        Ok(Self {
            spec: spec.clone(),
            kernel: kernel.clone(),
            tilt: tilt.clone(),
            step,
            budget,
        })
    }

    /// Reuses a transfer step built for the same `n`, `x_max`, kernel and tilt.
    pub fn from_step(
        spec: &EnsembleSpec,
        kernel: &Kernel,
        tilt: &TiltSpec,
        step: Arc<TransferStep>,
    ) -> Result<Self, ExactError> {
        let space = step.space();
        if space.n() != spec.n() || space.x_max() != spec.x_max() {
            return Err(ExactError::SpaceMismatch);
        }
        Ok(Self {
            spec: spec.clone(),
            kernel: kernel.clone(),
            tilt: tilt.clone(),
            step,
            budget: Budget::from_env(),
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn tilt(&self) -> &TiltSpec {
        &self.tilt
    }

    pub fn step(&self) -> &Arc<TransferStep> {
        &self.step
    }

    pub fn space(&self) -> &StateSpace {
        self.step.space()
    }

    fn id(&self, s: &[i64]) -> Result<usize, ExactError> {
        self.space()
            .index(s)
            .ok_or_else(|| ExactError::NotAState(s.to_vec()))
    }

    fn check_time(&self, t: i64) -> Result<usize, ExactError> {
        if self.spec.contains(t) {
            Ok((t - self.spec.m_left()) as usize)
        } else {
            Err(ExactError::TimeOutOfWindow(t))
        }
    }

    fn check_parity(&self) -> Result<(), ExactError> {
        if self.spec.parity_feasible(&self.kernel) {
            Ok(())
        } else {
            Err(ExactError::ParityInfeasible)
        }
    }

    fn start(&self) -> Result<Vec<f64>, ExactError> {
        let u = self.id(self.spec.boundary().start())?;
        Ok(self.step.point(u, self.step.len()))
    }

    fn end(&self) -> Result<Vec<f64>, ExactError> {
        match self.spec.boundary().end() {
            Some(v) => Ok(self.step.point(self.id(v)?, self.step.len())),
            None => Ok(vec![0.0; self.step.len()]),
        }
    }

    pub fn forward_all(&self) -> Result<Vec<Vec<f64>>, ExactError> {
        Ok(self
            .step
            .forward(self.start()?, self.spec.steps(), self.step.len()))
    }

    pub fn backward_all(&self) -> Result<Vec<Vec<f64>>, ExactError> {
        Ok(self
            .step
            .backward(self.end()?, self.spec.steps(), self.step.len()))
    }

    /// Partition function: bridge value at `v`, or total mass for a free end.
    pub fn partition(&self) -> Result<TransferResult, ExactError> {
        self.check_parity()?;
        let forward = self.forward_all()?;
        let backward = self.backward_all()?;
        let last = forward.last().unwrap();
        let log_z = match self.spec.boundary().end() {
            Some(v) => last[self.id(v)?],
            None => log_sum_exp(last),
        };
        if log_z == f64::NEG_INFINITY {
            return Err(ExactError::Infeasible);
        }

        let space = self.space();
        let near = space.prefix_len(space.x_max() - 2);
        let fraction = forward
            .iter()
            .zip(&backward)
            .map(|(f, b)| {
                let mut acc = LogAcc::new();
                for s in near..f.len() {
                    acc.add(f[s] + b[s]);
                }
                (acc.value() - log_z).exp()
            })
            .fold(0.0, f64::max);
        let mut warnings = Vec::new();
        if fraction > CUTOFF_WARN_FRACTION {
            warnings.push(Warning::CutoffDominated { fraction });
        }
        Ok(TransferResult {
            log_z,
            forward,
            backward: Some(backward),
            warnings,
            n: self.spec.n(),
            x_max: self.spec.x_max(),
            m_left: self.spec.m_left(),
        })
    }

    pub fn marginal(&self, t: i64) -> Result<Distribution, ExactError> {
        self.check_time(t)?;
        self.partition()?.marginal(t)
    }

    /// Joint law of the chamber state at the given increasing times.
    pub fn law_restricted(&self, times: &[i64]) -> Result<Distribution, ExactError> {
        if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExactError::InvalidTimes(times.to_vec()));
        }
        for &t in times {
            self.check_time(t)?;
        }
        let result = self.partition()?;
        let len = self.step.len();
        let total = (len as u128).saturating_pow(times.len() as u32);
        self.budget.check(total)?;
        let bwd = result.backward.as_ref().unwrap();
        let m = self.spec.m_left();

        let first = &result.forward[(times[0] - m) as usize];
        let mut frontier: Vec<(usize, usize, f64)> = first
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_finite())
            .map(|(s, &w)| (s, s, w))
            .collect();
        let mut rows: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
        for pair in times.windows(2) {
            let gap = (pair[1] - pair[0]) as usize;
            let mut next = Vec::new();
            for &(idx, s, w) in &frontier {
                let row = rows.entry((gap, s)).or_insert_with(|| {
                    let start = self.step.point(s, len);
                    self.step.forward(start, gap, len).pop().unwrap()
                });
                for (d, &g) in row.iter().enumerate() {
                    if g.is_finite() {
                        next.push((idx * len + d, d, w + g));
                    }
                }
            }
            frontier = next;
        }
        let last = &bwd[(times[times.len() - 1] - m) as usize];
        let mut weights = vec![f64::NEG_INFINITY; total as usize];
        for (idx, s, w) in frontier {
            weights[idx] = w + last[s];
        }
        Distribution::from_log_weights(
            Support::Chamber {
                n: self.spec.n(),
                x_max: self.spec.x_max(),
                times: times.to_vec(),
            },
            weights,
        )
    }

    /// Law of `X` on `{K+1, ..., L-1}` given `X(K) = x_k` and `X(L) = x_l`,
    /// computed as the tilted bridge between the two endpoints.
    pub fn conditional_bridge_law(
        &self,
        k: i64,
        l: i64,
        x_k: &[i64],
        x_l: &[i64],
    ) -> Result<ConditionalLaw, ExactError> {
        if !(self.spec.m_left() <= k && k < l && l <= self.spec.n_right()) {
            return Err(ExactError::InvalidBlock { k, l });
        }
        let (a, b) = (self.id(x_k)?, self.id(x_l)?);
        let steps = (l - k) as usize;
        let len = self.step.len();
        let n = self.spec.n();

        // paths through the transfer step, pruned by distance to x_l
        let to_end = self.step.backward(self.step.point(b, len), steps, len);
        let interior = n * (steps - 1);
        let cap = (self.budget.max_entries as usize / interior.max(1)).max(1);
        let mut paths: Vec<Vec<i64>> = Vec::new();
        let mut logw: Vec<f64> = Vec::new();
        let mut stack: Vec<usize> = Vec::with_capacity(steps);
        self.dfs(a, b, steps, &to_end, 0.0, &mut stack, &mut paths, &mut logw, cap)?;

        let log_mass = log_sum_exp(&logw);
        let result = self.partition()?;
        let bwd = result.backward.as_ref().unwrap();
        let m = self.spec.m_left();
        let log_event = result.forward[(k - m) as usize][a] + log_mass
            + bwd[(l - m) as usize][b]
            - result.log_z;
        if !(log_event >= MIN_ENDPOINT_PROB.ln()) {
            return Err(ExactError::ZeroProbabilityEndpoint { log_prob: log_event });
        }

        let paths = Arc::new(paths);
        let law = Distribution::from_log_weights(
            Support::Paths {
                n,
                times: (k + 1..l).collect(),
                paths: paths.clone(),
            },
            logw,
        )?;
        let diagnostic_tv = self.conditioned_by_enumeration(k, l, x_k, x_l).map(|cond| {
            let mut diff = 0.0;
            let mut seen = 0.0;
            for (path, &p) in paths.iter().zip(law.probs()) {
                let q = cond.get(path).copied().unwrap_or(0.0);
                seen += q;
                diff += (p - q).abs();
            }
            // mass of interiors the bridge law never produced
            diff += (1.0 - seen).max(0.0);
            0.5 * diff
        });
        Ok(ConditionalLaw { law, diagnostic_tv })
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        s: usize,
        target: usize,
        steps: usize,
        to_end: &[Vec<f64>],
        w: f64,
        stack: &mut Vec<usize>,
        paths: &mut Vec<Vec<i64>>,
        logw: &mut Vec<f64>,
        cap: usize,
    ) -> Result<(), ExactError> {
        let depth = stack.len();
        if depth + 1 == steps {
            let last = self.step.log_entry(s, target);
            if last.is_finite() {
                if paths.len() >= cap {
                    return Err(ExactError::TooLarge {
                        needed: cap as u128 + 1,
                        budget: self.budget.max_entries,
                    });
                }
                let space = self.space();
                paths.push(stack.iter().flat_map(|&id| space.state(id).to_vec()).collect());
                logw.push(w + last);
            }
            return Ok(());
        }
        for (d, e) in self.step.outgoing(s) {
            if to_end[depth + 1][d].is_finite() {
                stack.push(d);
                self.dfs(d, target, steps, to_end, w + e, stack, paths, logw, cap)?;
                stack.pop();
            }
        }
        Ok(())
    }

    /// Interior law from whole-window enumeration, conditioned on the endpoints.
    fn conditioned_by_enumeration(
        &self,
        k: i64,
        l: i64,
        x_k: &[i64],
        x_l: &[i64],
    ) -> Option<BTreeMap<Vec<i64>, f64>> {
        let all = enumerate_paths(&self.spec, &self.kernel, &self.tilt, DIAGNOSTIC_PATH_CAP)?;
        let mut grouped: BTreeMap<Vec<i64>, LogAcc> = BTreeMap::new();
        for (path, w) in &all {
            if !w.is_finite() || path.column(k) != x_k || path.column(l) != x_l {
                continue;
            }
            let key = if l > k + 1 {
                path.slice(k + 1, l - 1).flat().to_vec()
            } else {
                Vec::new()
            };
            grouped.entry(key).or_default().add(*w);
        }
        let total = {
            let mut acc = LogAcc::new();
            grouped.values().for_each(|a| acc.add(a.value()));
            acc.value()
        };
        if total == f64::NEG_INFINITY {
            return Some(BTreeMap::new());
        }
        Some(
            grouped
                .into_iter()
                .map(|(key, a)| (key, (a.value() - total).exp()))
                .collect(),
        )
    }

    /// One exact draw given backward messages from [`Self::backward_all`].
    pub fn sample_with<R: Rng + ?Sized>(&self, backward: &[Vec<f64>], rng: &mut R) -> PathConfig {
        let n = self.spec.n();
        let space = self.space();
        let len = self.step.len();
        let mut s = space.rank_unchecked(self.spec.boundary().start());
        let mut data = Vec::with_capacity(n * self.spec.len());
        data.extend_from_slice(space.state(s));
        let mut scratch = Vec::new();
        for beta in &backward[1..] {
            s = self
                .step
                .sample_next(s, beta, len, rng, &mut scratch)
                .expect("backward messages guarantee a successor");
            data.extend_from_slice(space.state(s));
        }
        PathConfig::from_flat(n, self.spec.m_left(), data)
    }

    /// `count` independent exact samples; sample `r` uses stream `r` of `seed`.
    pub fn exact_sample(&self, seed: u64, count: usize) -> Result<Vec<PathConfig>, ExactError> {
        if count == 0 {
            return Ok(Vec::new());
        }
        self.check_parity()?;
        let backward = self.backward_all()?;
        let u = self.id(self.spec.boundary().start())?;
        if backward[0][u] == f64::NEG_INFINITY {
            return Err(ExactError::Infeasible);
        }
        Ok((0..count as u64)
            .into_par_iter()
            .map(|r| self.sample_with(&backward, &mut crate::rng::stream(seed, r)))
            .collect())
    }
}
