//! Coarse graining: partition the box into K-blocks anchored at the origin,
//! track integer spin sums per block, and classify each block as plus-like,
//! minus-like, or bad against the spontaneous magnetization.
//!
//! Labels use quarter-width windows: a block of magnetization M is plus-like
//! when |M - m*| <= m*/4, minus-like when |M + m*| <= m*/4, bad otherwise.
//! The windows cannot overlap, so the label is well defined.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{LatticeDomain, SpinConfig};
use crate::numeric::Real;

/// Block side from the box side: K = ceil((b ln N)^(1/gamma)), clamped to
/// [1, N]. Defaults b = 2, gamma = 1 give K = ceil(2 ln N).
pub fn block_side_rule(side: usize, b: f64, gamma: f64) -> usize {
    assert!(b > 0.0 && gamma > 0.0);
    let raw = (b * (side as f64).ln()).powf(1.0 / gamma).ceil();
    (raw.max(1.0) as usize).clamp(1, side)
}

pub fn default_block_side(side: usize) -> usize {
    block_side_rule(side, 2.0, 1.0)
}

/// Corner-anchored partition into floor(N/K)^d blocks per axis, the last
/// block on each axis absorbing the remainder.
#[derive(Debug, Clone)]
pub struct BlockGrid {
    domain: Arc<LatticeDomain>,
    block_side: usize,
    per_axis: usize,
    block_of_site: Vec<u32>,
    sizes: Vec<u32>,
}

impl BlockGrid {
    pub fn new(domain: &Arc<LatticeDomain>, block_side: usize) -> Result<Self> {
        let side = domain.side();
        if block_side == 0 || block_side > side {
            return Err(Error::BlockTooLarge { block: block_side, side });
        }
        let per_axis = side / block_side;
        let n_blocks = per_axis.pow(domain.dim());
        let mut block_of_site = vec![0u32; domain.sites()];
        let mut sizes = vec![0u32; n_blocks];
        for site in 0..domain.sites() {
            let coords = domain.coords_of(site);
            let mut block = 0usize;
            for axis in (0..domain.dim() as usize).rev() {
                let b = (coords[axis] / block_side).min(per_axis - 1);
                block = block * per_axis + b;
            }
            block_of_site[site] = block as u32;
            sizes[block] += 1;
        }
        Ok(Self { domain: Arc::clone(domain), block_side, per_axis, block_of_site, sizes })
    }

    pub fn with_default_rule(domain: &Arc<LatticeDomain>) -> Self {
        Self::new(domain, default_block_side(domain.side())).expect("rule clamps to [1, side]")
    }

    pub fn domain(&self) -> &Arc<LatticeDomain> {
        &self.domain
    }

    pub fn block_side(&self) -> usize {
        self.block_side
    }

    pub fn blocks_per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn n_blocks(&self) -> usize {
        self.sizes.len()
    }

    #[inline]
    pub fn block_of(&self, site: usize) -> usize {
        self.block_of_site[site] as usize
    }

    pub fn size_of(&self, block: usize) -> usize {
        self.sizes[block] as usize
    }
}

/// Integer spin sums per block; exact, and updatable in O(1) per flip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSums {
    sums: Vec<i32>,
}

impl BlockSums {
    pub fn compute(grid: &BlockGrid, cfg: &SpinConfig) -> Self {
        assert_eq!(cfg.domain(), grid.domain());
        let mut sums = vec![0i32; grid.n_blocks()];
        for site in 0..cfg.domain().sites() {
            sums[grid.block_of(site)] += cfg.spin(site) as i32;
        }
        Self { sums }
    }

    /// Records that `site` now carries `new_spin` (it must have just
    /// flipped): the block sum moves by 2 * new_spin.
    #[inline]
    pub fn apply_flip(&mut self, grid: &BlockGrid, site: usize, new_spin: i8) {
        self.sums[grid.block_of(site)] += 2 * new_spin as i32;
    }

    pub fn sum_of(&self, block: usize) -> i32 {
        self.sums[block]
    }

    /// Block magnetization in [-1, 1].
    pub fn magnetization<R: Real>(&self, grid: &BlockGrid, block: usize) -> R {
        R::of_i32(self.sums[block]) / R::of_usize(grid.size_of(block))
    }

    pub fn magnetizations<'a, R: Real>(
        &'a self,
        grid: &'a BlockGrid,
    ) -> impl Iterator<Item = R> + 'a {
        (0..self.sums.len()).map(move |b| self.magnetization(grid, b))
    }
}

/// Phase label of one block magnetization: +1, -1, or 0 (bad).
pub fn phase_label<R: Real>(m: R, m_star: R) -> i8 {
    assert!(m_star > R::zero());
    let quarter = m_star / R::of(4.0);
    if (m - m_star).abs() <= quarter {
        1
    } else if (m + m_star).abs() <= quarter {
        -1
    } else {
        0
    }
}

/// Census of block labels plus the two windows the variational machinery
/// cares about: strictly-below-threshold blocks (M < -m*/4) and blocks in
/// the closed gradient ramp [-m*/2, -m*/4].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockCounts {
    pub plus: usize,
    pub minus: usize,
    pub bad: usize,
    pub below_threshold: usize,
    pub in_ramp: usize,
}

pub fn count_blocks<R: Real>(grid: &BlockGrid, sums: &BlockSums, m_star: R) -> BlockCounts {
    assert!(m_star > R::zero());
    let quarter = m_star / R::of(4.0);
    let half = m_star * R::half();
    let mut counts = BlockCounts { plus: 0, minus: 0, bad: 0, below_threshold: 0, in_ramp: 0 };
    for m in sums.magnetizations::<R>(grid) {
        match phase_label(m, m_star) {
            1 => counts.plus += 1,
            -1 => counts.minus += 1,
            _ => counts.bad += 1,
        }
        if m < -quarter {
            counts.below_threshold += 1;
        }
        if m >= -half && m <= -quarter {
            counts.in_ramp += 1;
        }
    }
    counts
}

pub fn count_bad_blocks<R: Real>(grid: &BlockGrid, sums: &BlockSums, m_star: R) -> usize {
    count_blocks(grid, sums, m_star).bad
}

pub fn count_minus_blocks<R: Real>(grid: &BlockGrid, sums: &BlockSums, m_star: R) -> usize {
    count_blocks(grid, sums, m_star).below_threshold
}
