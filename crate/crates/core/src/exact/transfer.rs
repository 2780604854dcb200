use std::sync::Arc;

use rand::Rng;

use super::{Budget, ExactError, StateSpace};
use crate::model::{in_open_chamber, Kernel, TiltSpec};
use crate::numeric::LogAcc;

/// One step of the tilted chain on a truncated chamber:
/// `log T(s → s') = Σ_i log p(s'_i - s_i) - a Σ_i b^{i-1} V_λ(s_i)`.
///
/// Stored twice, by source (rows sorted by target) and by target (columns
/// sorted by source), so that both passes can pull and stop early at a
/// prefix of the state space.
#[derive(Debug, Clone)]
pub struct TransferStep {
    space: Arc<StateSpace>,
    out_ptr: Vec<usize>,
    out_dst: Vec<u32>,
    out_logw: Vec<f64>,
    in_ptr: Vec<usize>,
    in_src: Vec<u32>,
    in_logw: Vec<f64>,
}

impl TransferStep {
    pub fn build(
        space: Arc<StateSpace>,
        kernel: &Kernel,
        tilt: &TiltSpec,
        budget: &Budget,
    ) -> Result<Self, ExactError> {
        let n = space.n();
        let len = space.len();
        let fanout = (kernel.support_size() as u128).saturating_pow(n as u32);
        budget.check((len as u128).saturating_mul(fanout))?;
        if len > u32::MAX as usize {
            return Err(ExactError::TooLarge {
                needed: len as u128,
                budget: u32::MAX as u64,
            });
        }

        let offsets = kernel.offsets();
        let log_p = kernel.log_probs();
        let k = offsets.len();
        let mut out_ptr = Vec::with_capacity(len + 1);
        let mut out_dst = Vec::new();
        let mut out_logw = Vec::new();
        out_ptr.push(0);
        let mut digits = vec![0usize; n];
        let mut target = vec![0i64; n];
        let mut row: Vec<(u32, f64)> = Vec::new();
        for (id, s) in space.iter().enumerate() {
            let cost = tilt.column_cost(s);
            row.clear();
            digits.iter_mut().for_each(|d| *d = 0);
            'combos: loop {
                let mut lw = -cost;
                for i in 0..n {
                    target[i] = s[i] + offsets[digits[i]];
                    lw += log_p[digits[i]];
                }
                if target[0] <= space.x_max() && in_open_chamber(&target) {
                    row.push((space.rank_unchecked(&target) as u32, lw));
                }
                for d in digits.iter_mut().rev() {
                    *d += 1;
                    if *d < k {
                        continue 'combos;
                    }
                    *d = 0;
                }
                break;
            }
            row.sort_by_key(|&(d, _)| d);
            for &(d, w) in &row {
                out_dst.push(d);
                out_logw.push(w);
            }
            out_ptr.push(out_dst.len());
            debug_assert!(id + 1 == out_ptr.len() - 1);
        }

        // transpose; scanning sources in order leaves every column sorted by source
        let nnz = out_dst.len();
        let mut in_ptr = vec![0usize; len + 1];
        for &d in &out_dst {
            in_ptr[d as usize + 1] += 1;
        }
        for i in 0..len {
            in_ptr[i + 1] += in_ptr[i];
        }
        let mut fill = in_ptr.clone();
        let mut in_src = vec![0u32; nnz];
        let mut in_logw = vec![0.0; nnz];
        for s in 0..len {
            for e in out_ptr[s]..out_ptr[s + 1] {
                let d = out_dst[e] as usize;
                in_src[fill[d]] = s as u32;
                in_logw[fill[d]] = out_logw[e];
                fill[d] += 1;
            }
        }
        Ok(Self {
            space,
            out_ptr,
            out_dst,
            out_logw,
            in_ptr,
            in_src,
            in_logw,
        })
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.out_dst.len()
    }

    /// Outgoing edges of `s` as `(target, log weight)`.
    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.out_ptr[s]..self.out_ptr[s + 1];
        self.out_dst[r.clone()]
            .iter()
            .map(|&d| d as usize)
            .zip(self.out_logw[r].iter().copied())
    }

    /// `log T(s → d)`, `-∞` when the entry is zero.
    pub fn log_entry(&self, s: usize, d: usize) -> f64 {
        let r = self.out_ptr[s]..self.out_ptr[s + 1];
        match self.out_dst[r.clone()].binary_search(&(d as u32)) {
            Ok(k) => self.out_logw[r.start + k],
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// One forward step restricted to the first `limit` states:
    /// `next(d) = log Σ_s exp(cur(s) + log T(s → d))`.
    pub fn forward_step(&self, cur: &[f64], next: &mut [f64], limit: usize) {
        for (d, slot) in next.iter_mut().enumerate().take(limit) {
            let mut acc = LogAcc::new();
            for e in self.in_ptr[d]..self.in_ptr[d + 1] {
                let s = self.in_src[e] as usize;
                if s >= limit {
                    break;
                }
                let a = cur[s];
                if a != f64::NEG_INFINITY {
                    acc.add(a + self.in_logw[e]);
                }
            }
            *slot = acc.value();
        }
    }

    /// One backward step: `prev(s) = log Σ_d exp(log T(s → d) + cur(d))`.
    pub fn backward_step(&self, cur: &[f64], prev: &mut [f64], limit: usize) {
        for (s, slot) in prev.iter_mut().enumerate().take(limit) {
            let mut acc = LogAcc::new();
            for e in self.out_ptr[s]..self.out_ptr[s + 1] {
                let d = self.out_dst[e] as usize;
                if d >= limit {
                    break;
                }
                let b = cur[d];
                if b != f64::NEG_INFINITY {
                    acc.add(self.out_logw[e] + b);
                }
            }
            *slot = acc.value();
        }
    }

    /// Log forward vectors at every step `0..=steps`, starting from `start`.
    pub fn forward(&self, start: Vec<f64>, steps: usize, limit: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(start);
        for k in 0..steps {
            let mut next = vec![f64::NEG_INFINITY; limit];
            self.forward_step(&out[k], &mut next, limit);
            out.push(next);
        }
        out
    }

    /// Log backward vectors at every step `0..=steps`, `end` being the last.
    pub fn backward(&self, end: Vec<f64>, steps: usize, limit: usize) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); steps + 1];
        out[steps] = end;
        for k in (0..steps).rev() {
            let mut prev = vec![f64::NEG_INFINITY; limit];
            self.backward_step(&out[k + 1], &mut prev, limit);
            out[k] = prev;
        }
        out
    }

    /// Point mass at state `id` as a log vector of length `limit`.
    pub fn point(&self, id: usize, limit: usize) -> Vec<f64> {
        let mut v = vec![f64::NEG_INFINITY; limit];
        v[id] = 0.0;
        v
    }

    /// Draws the next state from `s` with probability proportional to
    /// `T(s → d) exp(beta(d))`, over targets below `limit`.
    pub fn sample_next<R: Rng + ?Sized>(
        &self,
        s: usize,
        beta: &[f64],
        limit: usize,
        rng: &mut R,
        scratch: &mut Vec<(usize, f64)>,
    ) -> Option<usize> {
        scratch.clear();
        let mut max = f64::NEG_INFINITY;
        for (d, w) in self.outgoing(s) {
            if d >= limit {
                break;
            }
            let lw = w + beta[d];
            if lw != f64::NEG_INFINITY {
                max = max.max(lw);
                scratch.push((d, lw));
            }
        }
        if scratch.is_empty() {
            return None;
        }
        let mut total = 0.0;
        for e in scratch.iter_mut() {
            e.1 = (e.1 - max).exp();
            total += e.1;
        }
        let mut x = rng.random::<f64>() * total;
        for &(d, w) in scratch.iter() {
            if x < w {
                return Some(d);
            }
            x -= w;
        }
        scratch.last().map(|e| e.0)
    }
}
