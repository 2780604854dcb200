use super::ExactError;

/// Default cap on enumerated states times kernel fan-out.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Limit on the size of enumerated state spaces and transfer matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_entries: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_entries: DEFAULT_BUDGET,
        }
    }
}

impl Budget {
    /// Default budget, overridden by `ENSEMBLES_BUDGET` when it parses as a
    /// positive number (`5e7` style accepted).
    pub fn from_env() -> Self {
        std::env::var("ENSEMBLES_BUDGET")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v >= 1.0)
            .map(|v| Self {
                max_entries: v as u64,
            })
            .unwrap_or_default()
    }

    pub fn check(&self, needed: u128) -> Result<(), ExactError> {
        if needed > self.max_entries as u128 {
            Err(ExactError::TooLarge {
                needed,
                budget: self.max_entries,
            })
        } else {
            Ok(())
        }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Strictly decreasing `n`-tuples in `{1, ..., x_max}`, in lexicographic
/// order of `(s_1, ..., s_n)`. With this order the states whose top entry is
/// at most `c` form a prefix of length `C(c, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    n: usize,
    x_max: i64,
    states: Vec<i64>,
    /// `table[i][x] = C(x, n - i)`, used for ranking.
    table: Vec<Vec<u64>>,
}

impl StateSpace {
    pub fn enumerate(n: usize, x_max: i64, budget: &Budget) -> Result<Self, ExactError> {
        if n == 0 || x_max < n as i64 {
            return Err(ExactError::InvalidStateSpace { n, x_max });
        }
        let count = binomial(x_max as u64, n as u64);
        budget.check(count)?;
        let count = count as usize;

        let mut states = Vec::with_capacity(count * n);
        let mut cur: Vec<i64> = (1..=n as i64).rev().collect();
        'next: loop {
            states.extend_from_slice(&cur);
            // bump the lowest coordinate with room under its upper neighbour
            for i in (0..n).rev() {
                let cap = if i == 0 { x_max } else { cur[i - 1] - 1 };
                if cur[i] < cap {
                    cur[i] += 1;
                    for (k, c) in cur.iter_mut().enumerate().skip(i + 1) {
                        *c = (n - k) as i64;
                    }
                    continue 'next;
                }
            }
            break;
        }
        debug_assert_eq!(states.len(), count * n);

        let table = (0..n)
            .map(|i| {
                (0..=x_max as u64)
                    .map(|x| binomial(x, (n - i) as u64) as u64)
                    .collect()
            })
            .collect();
        Ok(Self {
            n,
            x_max,
            states,
            table,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_max(&self) -> i64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: usize) -> &[i64] {
        &self.states[id * self.n..(id + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> + '_ {
        self.states.chunks_exact(self.n)
    }

    /// Position of a tuple, `None` if it is not a state.
    pub fn index(&self, s: &[i64]) -> Option<usize> {
        if s.len() != self.n || s[0] > self.x_max || !crate::model::in_open_chamber(s) {
            return None;
        }
        Some(self.rank_unchecked(s))
    }

    /// Rank of a state known to be valid: `Σ_i C(s_i - 1, n - i + 1)`.
    #[inline]
    pub fn rank_unchecked(&self, s: &[i64]) -> usize {
        s.iter()
            .enumerate()
            .map(|(i, &x)| self.table[i][(x - 1) as usize])
            .sum::<u64>() as usize
    }

    /// Number of states whose top entry is at most `c`.
    pub fn prefix_len(&self, c: i64) -> usize {
        let c = c.min(self.x_max);
        if c < self.n as i64 {
            0
        } else {
            self.table[0][c as usize] as usize
        }
    }
}
