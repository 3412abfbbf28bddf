//! Droplet relaxation: start the box all-minus inside a plus boundary and
//! watch the shrinking minus phase through the observable
//!
//!   log Psi(sigma) = (lambda K^d / N) * #{blocks with M < -m*/4},
//!
//! the exponential weight of below-threshold blocks. Its decay toward the
//! all-plus equilibrium value tracks the droplet volume; the first time the
//! started-from-minus mean is statistically indistinguishable from
//! equilibrium is the crossing time, which grows with the box side.

use crate::coarse::{default_block_side, BlockGrid, BlockSums};
use crate::dynamics::UniformizedChain;
use crate::error::Result;
use crate::lattice::{LatticeDomain, SpinConfig};
use crate::numeric::{Estimate, Real, RunningMoments};
use crate::rates::RateModel;

/// Incrementally maintained count of blocks with magnetization strictly
/// below -m*/4, and the tilt it induces.
pub struct MinusBlockTilt<'g, R> {
    grid: &'g BlockGrid,
    sums: BlockSums,
    below: Vec<bool>,
    count: usize,
    quarter: R,
    prefactor: R,
}

impl<'g, R: Real> MinusBlockTilt<'g, R> {
    pub fn new(grid: &'g BlockGrid, lambda: R, m_star: R, cfg: &SpinConfig) -> Self {
        assert!(lambda > R::zero() && m_star > R::zero());
        let sums = BlockSums::compute(grid, cfg);
        let quarter = m_star / R::of(4.0);
        let k_to_d = R::of_usize(grid.block_side().pow(grid.domain().dim()));
        let prefactor = lambda * k_to_d / R::of_usize(grid.domain().side());
        let below: Vec<bool> = (0..grid.n_blocks())
            .map(|b| sums.magnetization::<R>(grid, b) < -quarter)
            .collect();
        let count = below.iter().filter(|&&b| b).count();
        Self { grid, sums, below, count, quarter, prefactor }
    }

    #[inline]
    pub fn on_flip(&mut self, site: usize, new_spin: i8) {
        self.sums.apply_flip(self.grid, site, new_spin);
        let block = self.grid.block_of(site);
        let now = self.sums.magnetization::<R>(self.grid, block) < -self.quarter;
        if now != self.below[block] {
            self.below[block] = now;
            if now {
                self.count += 1;
            } else {
                self.count -= 1;
            }
        }
    }

    pub fn below_count(&self) -> usize {
        self.count
    }

    pub fn log_psi(&self) -> R {
        self.prefactor * R::of_usize(self.count)
    }
}

#[derive(Debug, Clone)]
pub struct DropletPlan<R> {
    pub lambda: R,
    pub m_star: R,
    /// Block side; `None` applies the default ceil(2 ln N) rule.
    pub block_side: Option<usize>,
    pub replicas: usize,
    /// Observation horizon as a multiple of N^2 (volume decay time scale).
    pub horizon_factor: R,
    pub grid_points: usize,
    pub equilibrium_replicas: usize,
    pub equilibrium_burnin: R,
    pub equilibrium_samples: usize,
}

impl<R: Real> DropletPlan<R> {
    pub fn new(lambda: R, m_star: R) -> Self {
        Self {
            lambda,
            m_star,
            block_side: None,
            replicas: 6,
            horizon_factor: R::of(4.0),
            grid_points: 40,
            equilibrium_replicas: 4,
            equilibrium_burnin: R::of(60.0),
            equilibrium_samples: 80,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DropletCurve<R> {
    pub side: usize,
    pub block_side: usize,
    pub times: Vec<R>,
    pub mean_log_psi: Vec<R>,
    pub se_log_psi: Vec<R>,
    pub equilibrium: Estimate<R>,
    /// First grid time whose started-from-minus mean is within one combined
    /// standard error of equilibrium; `None` if never inside the horizon.
    pub crossing_time: Option<R>,
}

/// Time 0 plus geometrically spaced observation times up to the horizon.
fn observation_grid<R: Real>(horizon: R, points: usize) -> Vec<R> {
    assert!(points >= 2);
    let mut grid = Vec::with_capacity(points + 1);
    grid.push(R::zero());
    let t0 = R::one().min(horizon);
    let ratio = (horizon / t0).powf(R::one() / R::of_usize(points - 1));
    let mut t = t0;
    for _ in 0..points {
        grid.push(t.min(horizon));
        t = t * ratio;
    }
    grid
}

pub fn droplet_relaxation_experiment<R: Real>(
    model: &RateModel<R>,
    dim: u32,
    sides: &[usize],
    plan: &DropletPlan<R>,
    seed: u64,
) -> Result<Vec<DropletCurve<R>>> {
    sides.iter().map(|&side| droplet_curve(model, dim, side, plan, seed)).collect()
}

fn droplet_curve<R: Real>(
    model: &RateModel<R>,
    dim: u32,
    side: usize,
    plan: &DropletPlan<R>,
    seed: u64,
) -> Result<DropletCurve<R>> {
    let domain = LatticeDomain::plus_boundary(dim, side);
    let k = plan.block_side.unwrap_or_else(|| default_block_side(side));
    let grid = BlockGrid::new(&domain, k)?;
    let horizon = plan.horizon_factor * R::of_usize(side * side);
    let times = observation_grid(horizon, plan.grid_points);

    let mut acc = vec![RunningMoments::<R>::new(); times.len()];
    for replica in 0..plan.replicas as u64 {
        let mut chain = UniformizedChain::with_stream(
            *model,
            SpinConfig::all_minus(&domain),
            seed,
            replica,
        );
        let mut tilt = MinusBlockTilt::new(&grid, plan.lambda, plan.m_star, chain.config());
        for (i, &t) in times.iter().enumerate() {
            chain.advance_to(t, |site, new_spin| tilt.on_flip(site, new_spin));
            acc[i].push(tilt.log_psi());
        }
    }

    // Independent all-plus runs give the equilibrium reference; one time
    // average per replica, spread across replicas for the error bar.
    let mut eq = RunningMoments::new();
    for replica in 0..plan.equilibrium_replicas as u64 {
        let mut chain = UniformizedChain::with_stream(
            *model,
            SpinConfig::all_plus(&domain),
            seed,
            (1u64 << 32) + replica,
        );
        let mut tilt = MinusBlockTilt::new(&grid, plan.lambda, plan.m_star, chain.config());
        let mut t = plan.equilibrium_burnin;
        chain.advance_to(t, |site, new_spin| tilt.on_flip(site, new_spin));
        let mut avg = RunningMoments::new();
        for _ in 0..plan.equilibrium_samples {
            t += R::two();
            chain.advance_to(t, |site, new_spin| tilt.on_flip(site, new_spin));
            avg.push(tilt.log_psi());
        }
        eq.push(avg.mean());
    }
    let equilibrium = eq.estimate();

    let mean_log_psi: Vec<R> = acc.iter().map(|m| m.mean()).collect();
    let se_log_psi: Vec<R> = acc.iter().map(|m| m.se_of_mean()).collect();
    let crossing_time = times
        .iter()
        .zip(mean_log_psi.iter().zip(&se_log_psi))
        .find(|(_, (mean, se))| {
            **mean - equilibrium.value <= **se + equilibrium.se
        })
        .map(|(&t, _)| t);

    Ok(DropletCurve {
        side,
        block_side: k,
        times,
        mean_log_psi,
        se_log_psi,
        equilibrium,
        crossing_time,
    })
}
