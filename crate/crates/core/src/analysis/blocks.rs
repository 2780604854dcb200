use crate::model::RescaledPath;

/// Block `D_ℓ = [2ℓ, 2ℓ + 2]` and whether it is good for each path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockFlag {
    pub ell: i64,
    pub good_x: bool,
    pub good_y: bool,
}

impl BlockFlag {
    pub fn joint(&self) -> bool {
        self.good_x && self.good_y
    }
}

/// Five-block `D_{5ℓ-2} ∪ ... ∪ D_{5ℓ+2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiveBlockFlag {
    pub ell: i64,
    pub pre_good_x: bool,
    pub pre_good_y: bool,
}

impl FiveBlockFlag {
    pub fn joint(&self) -> bool {
        self.pre_good_x && self.pre_good_y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodBlockReport {
    pub eta: f64,
    pub eps: f64,
    pub m_blocks: i64,
    pub m0: usize,
    pub m0_5: usize,
    pub blocks: Vec<BlockFlag>,
    pub five_blocks: Vec<FiveBlockFlag>,
}

fn regular_point(x: &[f64], eta: f64, eps: f64) -> bool {
    x[0] <= eta && x.windows(2).all(|w| w[0] - w[1] >= eps)
}

/// `[ℓ, ℓ+1]` is regular: endpoints in the regular set and `x_1 ≤ 2η` throughout.
fn regular_interval(p: &RescaledPath, ell: i64, eta: f64, eps: f64) -> bool {
    let (t0, t1) = (ell as f64, ell as f64 + 1.0);
    let ends_ok = [t0, t1]
        .iter()
        .all(|&t| p.eval_column(t).is_ok_and(|x| regular_point(&x, eta, eps)));
    ends_ok && p.max_on(0, t0, t1).is_ok_and(|m| m <= 2.0 * eta)
}

fn good_block(p: &RescaledPath, ell: i64, eta: f64, eps: f64) -> bool {
    regular_interval(p, 2 * ell, eta, eps) && regular_interval(p, 2 * ell + 1, eta, eps)
}

fn low_touch(p: &RescaledPath, ell: i64, eta: f64) -> bool {
    let t0 = 2.0 * ell as f64;
    p.min_on(0, t0, t0 + 2.0).is_ok_and(|m| m <= eta)
}

/// Largest `M` with `[-2M, 2M]` inside both paths.
fn block_range(x: &RescaledPath, y: &RescaledPath) -> i64 {
    let lo = x.t_min().max(y.t_min());
    let hi = x.t_max().min(y.t_max());
    let m = (hi / 2.0).floor().min((-lo / 2.0).floor());
    (m as i64).max(0)
}

/// Good-block statistics on the largest block window both paths cover.
pub fn good_blocks(x: &RescaledPath, y: &RescaledPath, eta: f64, eps: f64) -> GoodBlockReport {
    good_blocks_within(x, y, eta, eps, block_range(x, y))
}

/// Same, restricted to blocks `-M ≤ ℓ ≤ M - 1`; `m_blocks` is clipped to
/// what the paths cover.
pub fn good_blocks_within(
    x: &RescaledPath,
    y: &RescaledPath,
    eta: f64,
    eps: f64,
    m_blocks: i64,
) -> GoodBlockReport {
    let m = m_blocks.min(block_range(x, y)).max(0);
    let blocks: Vec<BlockFlag> = (-m..m)
        .map(|ell| BlockFlag {
            ell,
            good_x: good_block(x, ell, eta, eps),
            good_y: good_block(y, ell, eta, eps),
        })
        .collect();
    // only five-blocks whose outer blocks lie in the window
    let five_blocks: Vec<FiveBlockFlag> = (-(m / 5)..=m / 5)
        .filter(|&l| 5 * l - 2 >= -m && 5 * l + 2 <= m - 1)
        .map(|l| {
            let pre = |p: &RescaledPath| low_touch(p, 5 * l - 2, eta) && low_touch(p, 5 * l + 2, eta);
            FiveBlockFlag {
                ell: l,
                pre_good_x: pre(x),
                pre_good_y: pre(y),
            }
        })
        .collect();
    GoodBlockReport {
        eta,
        eps,
        m_blocks: m,
        m0: blocks.iter().filter(|b| b.joint()).count(),
        m0_5: five_blocks.iter().filter(|b| b.joint()).count(),
        blocks,
        five_blocks,
    }
}
