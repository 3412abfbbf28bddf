//! The variational test function: an exponential tilt of smoothed block
//! counts,
//!
//!   log f(sigma) = (lambda K^d / N) Sum_blocks g(M_block),
//!
//! where g ramps from 1 (block magnetization at or below -m*/2) to 0 (at or
//! above -m*/4) through a cubic smoothstep. f rewards configurations whose
//! blocks look minus-like, is non-increasing in every spin, and has a
//! site-flip gradient supported on blocks sitting in the ramp window, which
//! is what keeps its Dirichlet form small and the variance/Dirichlet and
//! entropy/Dirichlet ratios large.

use crate::coarse::{BlockGrid, BlockSums};
use crate::lattice::SpinConfig;
use crate::numeric::Real;

/// Smoothstep ramp: 1 below -m*/2, 0 above -m*/4, with the cubic
/// 1 - (3u^2 - 2u^3) in between; u = (s + m*/2) / (m*/4).
pub fn ramp<R: Real>(s: R, m_star: R) -> R {
    debug_assert!(m_star > R::zero());
    let quarter = m_star / R::of(4.0);
    let lo = -m_star * R::half();
    if s <= lo {
        return R::one();
    }
    let u = ((s - lo) / quarter).min(R::one());
    if u >= R::one() {
        return R::zero();
    }
    R::one() - u * u * (R::of(3.0) - R::two() * u)
}

/// d ramp / ds; bounded by 6/m* in magnitude, attained at the midpoint.
pub fn ramp_slope<R: Real>(s: R, m_star: R) -> R {
    let quarter = m_star / R::of(4.0);
    let lo = -m_star * R::half();
    let u = (s - lo) / quarter;
    if u <= R::zero() || u >= R::one() {
        return R::zero();
    }
    -(R::of(6.0) * u * (R::one() - u)) / quarter
}

#[derive(Debug, Clone, Copy)]
pub struct TestFunction<R> {
    pub lambda: R,
    pub m_star: R,
    /// lambda K^d / N, the weight of one block's ramp value in log f.
    pub prefactor: R,
}

impl<R: Real> TestFunction<R> {
    pub fn new(lambda: R, m_star: R, grid: &BlockGrid) -> Self {
        assert!(lambda > R::zero(), "the tilt strength must be positive");
        assert!(m_star > R::zero() && m_star <= R::one(), "m* must lie in (0, 1]");
        let k_to_d = R::of_usize(grid.block_side().pow(grid.domain().dim()));
        let prefactor = lambda * k_to_d / R::of_usize(grid.domain().side());
        Self { lambda, m_star, prefactor }
    }

    /// log f from precomputed block sums.
    pub fn log_value(&self, grid: &BlockGrid, sums: &BlockSums) -> R {
        self.log_value_of_magnetizations(sums.magnetizations(grid))
    }

    /// log f from raw block magnetizations; the low-level entry point used
    /// by tests and by callers that track magnetizations themselves.
    pub fn log_value_of_magnetizations(&self, ms: impl IntoIterator<Item = R>) -> R {
        let mut total = R::zero();
        for m in ms {
            total += ramp(m, self.m_star);
        }
        self.prefactor * total
    }

    /// Change of log f when `site` (currently carrying `spin`) flips.
    /// Exact zero whenever the block's ramp value does not move.
    #[inline]
    pub fn flip_log_delta(&self, grid: &BlockGrid, sums: &BlockSums, site: usize, spin: i8) -> R {
        let block = grid.block_of(site);
        let size = R::of_usize(grid.size_of(block));
        let sum = R::of_i32(sums.sum_of(block));
        let m = sum / size;
        let m_after = (sum - R::two() * R::of_i32(spin as i32)) / size;
        self.prefactor * (ramp(m_after, self.m_star) - ramp(m, self.m_star))
    }

    /// Sum over sites of (f(sigma^x)/f(sigma) - 1)^2, the carre-du-champ of
    /// f relative to f^2 under unit flip rates.
    pub fn relative_grad_sq(&self, cfg: &SpinConfig, grid: &BlockGrid, sums: &BlockSums) -> R {
        let mut total = R::zero();
        for site in 0..cfg.domain().sites() {
            let delta = self.flip_log_delta(grid, sums, site, cfg.spin(site));
            if delta != R::zero() {
                let e = delta.exp_m1();
                total += e * e;
            }
        }
        total
    }
}
