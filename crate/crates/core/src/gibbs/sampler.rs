use std::sync::{Arc, RwLock};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::{autocorr, GibbsError};
use crate::exact::{Budget, ExactEngine, ExactError, StateSpace, TransferStep};
use crate::model::{EnsembleSpec, Kernel, PathConfig, TiltSpec};

/// Extra headroom above the reachable set when choosing a block cutoff.
pub const RESAMPLE_SLACK: i64 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McmcParams {
    pub block_len: usize,
    pub overlap: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Independent chains, chain `r` on stream `r` of `seed`.
    pub chains: usize,
}

impl Default for McmcParams {
    fn default() -> Self {
        Self {
            block_len: 8,
            overlap: 4,
            sweeps: 1000,
            burn_in: 100,
            thin: 1,
            seed: 0,
            chains: 1,
        }
    }
}

impl McmcParams {
    pub fn validate(&self) -> Result<(), GibbsError> {
        let bad = |m: &str| Err(GibbsError::InvalidParams(m.into()));
        if self.block_len < 2 {
            return bad("block_len must be at least 2");
        }
        if self.overlap < 1 || self.overlap >= self.block_len {
            return bad("overlap must lie in [1, block_len)");
        }
        if self.thin < 1 {
            return bad("thin must be at least 1");
        }
        if self.chains < 1 {
            return bad("need at least one chain");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableDiag {
    pub name: String,
    pub mean: Option<f64>,
    /// Mean over chains of the integrated autocorrelation time.
    pub tau: Option<f64>,
    /// Recorded values divided by `2τ`.
    pub effective_samples: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainDiagnostics {
    pub observables: Vec<ObservableDiag>,
    /// Always 1 for heat-bath updates.
    pub acceptance: f64,
    pub chains: usize,
    pub recorded_sweeps: usize,
    /// Wall-clock seconds per sweep, averaged over chains. Not reproducible.
    pub sweep_seconds: f64,
}

/// Output of one chain.
#[derive(Debug, Clone)]
pub struct ChainRun {
    pub samples: Vec<PathConfig>,
    /// `x_1` at the window centre and `𝒜`, one entry per recorded sweep.
    pub series: [Vec<f64>; 2],
    pub seconds: f64,
}

const OBSERVABLES: [&str; 2] = ["x1_center", "area"];

/// Block heat-bath sampler. The transfer step is shared by all chains and is
/// grown on demand up to the ensemble cutoff; block computations only read a
/// prefix of it, so results do not depend on its current size.
#[derive(Debug)]
pub struct GibbsSampler {
    spec: EnsembleSpec,
    kernel: Kernel,
    tilt: TiltSpec,
    budget: Budget,
    cache: RwLock<Arc<TransferStep>>,
}

impl GibbsSampler {
    pub fn new(spec: &EnsembleSpec, kernel: &Kernel, tilt: &TiltSpec) -> Result<Self, GibbsError> {
        let budget = Budget::from_env();
        let first = (spec.boundary().top() + 8 * kernel.reach() + RESAMPLE_SLACK)
            .max(spec.n() as i64)
            .min(spec.x_max());
        let step = build_step(spec.n(), first, kernel, tilt, &budget)?;
        Ok(Self {
            spec: spec.clone(),
            kernel: kernel.clone(),
            tilt: tilt.clone(),
            budget,
            cache: RwLock::new(Arc::new(step)),
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// A transfer step covering heights up to `c` (at most `x_max`).
    fn step_for(&self, c: i64) -> Result<Arc<TransferStep>, GibbsError> {
        let c = c.min(self.spec.x_max());
        {
            let cur = self.cache.read().unwrap();
            if cur.space().x_max() >= c {
                return Ok(cur.clone());
            }
        }
        let mut cur = self.cache.write().unwrap();
        if cur.space().x_max() < c {
            let grown = (2 * cur.space().x_max()).max(c).min(self.spec.x_max());
            *cur = Arc::new(build_step(
                self.spec.n(),
                grown,
                &self.kernel,
                &self.tilt,
                &self.budget,
            )?);
        }
        Ok(cur.clone())
    }

    /// A configuration of positive weight: one exact draw of the untilted
    /// ensemble under the smallest doubling cutoff that admits a path.
    pub fn init_config<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PathConfig, GibbsError> {
        if !self.spec.parity_feasible(&self.kernel) {
            return Err(GibbsError::Infeasible);
        }
        let reference = self.tilt.with_prefactor(0.0);
        let mut c = (self.spec.boundary().top() + self.spec.n() as i64 + RESAMPLE_SLACK)
            .min(self.spec.x_max());
        loop {
            let local = self.spec.with_x_max(c)?;
            let engine = ExactEngine::with_budget(&local, &self.kernel, &reference, self.budget)?;
            let backward = engine.backward_all()?;
            let u = engine.space().rank_unchecked(self.spec.boundary().start());
            if backward[0][u].is_finite() {
                return Ok(engine.sample_with(&backward, rng));
            }
            if c >= self.spec.x_max() {
                return Err(GibbsError::Infeasible);
            }
            c = (2 * c).min(self.spec.x_max());
        }
    }

    /// Replaces `X` on `{K+1, ..., L-1}` by an exact draw given `X(K)` and
    /// `X(L)`. For a walk boundary `L = N + 1` resamples `{K+1, ..., N}`
    /// given `X(K)` alone.
    pub fn resample_block_in_place<R: Rng + ?Sized>(
        &self,
        config: &mut PathConfig,
        k: i64,
        l: i64,
        rng: &mut R,
    ) -> Result<(), GibbsError> {
        let (m, nn) = (self.spec.m_left(), self.spec.n_right());
        let free = l == nn + 1 && !self.spec.boundary().is_bridge();
        if !(m <= k && k < l && (l <= nn || free)) {
            return Err(ExactError::InvalidBlock { k, l }.into());
        }
        if l == k + 1 {
            return Ok(());
        }
        let last = if free { nn } else { l };
        let steps = (last - k) as usize;
        let top_k = config.get(0, k);
        let c = if free {
            top_k + steps as i64 * self.kernel.max_step()
        } else {
            top_k.max(config.get(0, l)) + steps as i64 * self.kernel.reach()
        } + RESAMPLE_SLACK;
        let step = self.step_for(c)?;
        let space = step.space().clone();
        let limit = space.prefix_len(c.min(space.x_max()));

        let a = space
            .index(config.column(k))
            .ok_or_else(|| ExactError::NotAState(config.column(k).to_vec()))?;
        let end = if free {
            vec![0.0; limit]
        } else {
            let b = space
                .index(config.column(l))
                .filter(|&b| b < limit)
                .ok_or_else(|| ExactError::NotAState(config.column(l).to_vec()))?;
            step.point(b, limit)
        };
        let beta = step.backward(end, steps, limit);
        if !beta[0][a].is_finite() {
            return Err(GibbsError::Infeasible);
        }
        let mut s = a;
        let mut scratch = Vec::new();
        let interior = if free { steps } else { steps - 1 };
        for j in 1..=interior {
            s = step
                .sample_next(s, &beta[j], limit, rng, &mut scratch)
                .ok_or(GibbsError::Infeasible)?;
            config
                .column_mut(k + j as i64)
                .copy_from_slice(space.state(s));
        }
        Ok(())
    }

    pub fn resample_block<R: Rng + ?Sized>(
        &self,
        config: &PathConfig,
        k: i64,
        l: i64,
        rng: &mut R,
    ) -> Result<PathConfig, GibbsError> {
        let mut out = config.clone();
        self.resample_block_in_place(&mut out, k, l, rng)?;
        Ok(out)
    }

    /// Blocks `[K, L]` of one sweep, left to right. A walk boundary ends with
    /// a free-end block `[K, N + 1]`.
    pub fn schedule(&self, params: &McmcParams) -> Vec<(i64, i64)> {
        let (m, nn) = (self.spec.m_left(), self.spec.n_right());
        let len = params.block_len as i64;
        let stride = (params.block_len - params.overlap) as i64;
        let mut blocks = Vec::new();
        let mut k = m;
        while k + len < nn {
            blocks.push((k, k + len));
            k += stride;
        }
        let end = if self.spec.boundary().is_bridge() { nn } else { nn + 1 };
        blocks.push((k, end));
        blocks
    }

    pub fn sweep<R: Rng + ?Sized>(
        &self,
        config: &mut PathConfig,
        params: &McmcParams,
        rng: &mut R,
    ) -> Result<(), GibbsError> {
        for (k, l) in self.schedule(params) {
            self.resample_block_in_place(config, k, l, rng)?;
        }
        Ok(())
    }

    fn observe(&self, config: &PathConfig) -> [f64; 2] {
        let centre = self.spec.m_left() + (self.spec.steps() / 2) as i64;
        [
            config.get(0, centre) as f64,
            config.area_functional(&self.tilt),
        ]
    }

    /// Runs chain `r`: initialisation, burn-in, then `sweeps` recorded sweeps
    /// keeping every `thin`-th configuration.
    pub fn run_chain(&self, params: &McmcParams, chain: u64) -> Result<ChainRun, GibbsError> {
        params.validate()?;
        let started = Instant::now();
        let mut rng = crate::rng::stream(params.seed, chain);
        let mut samples = Vec::new();
        let mut series = [Vec::new(), Vec::new()];
        if params.sweeps == 0 {
            return Ok(ChainRun {
                samples,
                series,
                seconds: 0.0,
            });
        }
        let mut config = self.init_config(&mut rng)?;
        for _ in 0..params.burn_in {
            self.sweep(&mut config, params, &mut rng)?;
        }
        for i in 0..params.sweeps {
            self.sweep(&mut config, params, &mut rng)?;
            let obs = self.observe(&config);
            series[0].push(obs[0]);
            series[1].push(obs[1]);
            if (i + 1) % params.thin == 0 {
                samples.push(config.clone());
            }
        }
        Ok(ChainRun {
            samples,
            series,
            seconds: started.elapsed().as_secs_f64(),
        })
    }

    /// All chains in parallel, results in chain order.
    pub fn run_chains(&self, params: &McmcParams) -> Result<Vec<ChainRun>, GibbsError> {
        params.validate()?;
        (0..params.chains as u64)
            .into_par_iter()
            .map(|r| self.run_chain(params, r))
            .collect()
    }

    pub fn sample_paths(
        &self,
        params: &McmcParams,
    ) -> Result<(Vec<PathConfig>, ChainDiagnostics), GibbsError> {
        let runs = self.run_chains(params)?;
        let diagnostics = diagnose(&runs);
        let samples = runs.into_iter().flat_map(|r| r.samples).collect();
        Ok((samples, diagnostics))
    }
}

fn build_step(
    n: usize,
    x_max: i64,
    kernel: &Kernel,
    tilt: &TiltSpec,
    budget: &Budget,
) -> Result<TransferStep, GibbsError> {
    let space = Arc::new(StateSpace::enumerate(n, x_max, budget)?);
    Ok(TransferStep::build(space, kernel, tilt, budget)?)
}

/// Aggregates per-chain series; summaries are taken in chain order.
pub fn diagnose(runs: &[ChainRun]) -> ChainDiagnostics {
    let recorded: usize = runs.iter().map(|r| r.series[0].len()).sum();
    let observables = OBSERVABLES
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let values: Vec<f64> = runs.iter().flat_map(|r| r.series[k].iter().copied()).collect();
            let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
            let taus: Vec<f64> = runs
                .iter()
                .filter_map(|r| autocorr(&r.series[k]).ok())
                .collect();
            let tau = (!taus.is_empty()).then(|| taus.iter().sum::<f64>() / taus.len() as f64);
            ObservableDiag {
                name: name.to_string(),
                mean,
                tau,
                effective_samples: tau.map(|t| recorded as f64 / (2.0 * t)),
            }
        })
        .collect();
    let sweeps: usize = runs.iter().map(|r| r.series[0].len()).sum();
    let seconds: f64 = runs.iter().map(|r| r.seconds).sum();
    ChainDiagnostics {
        observables,
        acceptance: 1.0,
        chains: runs.len(),
        recorded_sweeps: recorded,
        sweep_seconds: if sweeps == 0 { 0.0 } else { seconds / sweeps as f64 },
    }
}
