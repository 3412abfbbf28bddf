//! Moments of the test function under the Gibbs measure, by exact
//! enumeration on small boxes and by uniformized MCMC elsewhere, plus the
//! variational lower bounds built from them:
//!
//!   inverse gap        >= var(f) / dirichlet(f),
//!   log-Sobolev inverse >= entropy(f^2) / dirichlet(f),
//!
//! with dirichlet(f) = mu(Sum_x (f(sigma^x) - f(sigma))^2), the unit-rate
//! site sum. Both rate families have flip rates at most 1, so these ratios
//! bound the true relaxation constants from below for either dynamics.
//!
//! All accumulation runs in log space: a strongly tilted f overflows linear
//! arithmetic long before it stops being a legitimate test function.

use std::sync::Arc;

use crate::coarse::{BlockGrid, BlockSums};
use crate::dynamics::{estimate_center_magnetization, UniformizedChain};
use crate::error::{Error, Result};
use crate::gibbs::{spontaneous_magnetization_d2, GibbsTable};
use crate::lattice::SpinConfig;
use crate::numeric::{
    batch_means, log_sub_exp, Estimate, LogSumAcc, Real, RunningMoments, SignedLogAcc,
};
use crate::rates::RateModel;

/// One moment in both scales: a linear estimate (which may round to 0 or
/// infinity under extreme tilts) and the always-finite log value the ratio
/// bounds are computed from.
#[derive(Debug, Clone, Copy)]
pub struct Moments<R> {
    pub mean_f: Estimate<R>,
    pub mean_f2: Estimate<R>,
    pub var_f: Estimate<R>,
    pub entropy_f2: Estimate<R>,
    pub dirichlet: Estimate<R>,
    pub log_mean_f: R,
    pub log_mean_f2: R,
    pub log_var_f: R,
    pub log_entropy_f2: R,
    pub log_dirichlet: R,
    pub ess: R,
    pub samples: usize,
    pub low_ess: bool,
}

pub const MIN_EFFECTIVE_SAMPLES: f64 = 10.0;

/// Log-space tallies of one batch (or of the whole exact enumeration):
/// everything needed to evaluate the five moments of one empirical measure.
struct Tally<R> {
    log_weight: LogSumAcc<R>,
    log_f: LogSumAcc<R>,
    log_f2: LogSumAcc<R>,
    f2_logf2: SignedLogAcc<R>,
    log_f2_grad: LogSumAcc<R>,
}

impl<R: Real> Tally<R> {
    fn new() -> Self {
        Self {
            log_weight: LogSumAcc::new(),
            log_f: LogSumAcc::new(),
            log_f2: LogSumAcc::new(),
            f2_logf2: SignedLogAcc::new(),
            log_f2_grad: LogSumAcc::new(),
        }
    }

    /// One state with log-weight `log_w` (log probability or log 1/n),
    /// log f value `ell`, and relative gradient square `grad`.
    fn push(&mut self, log_w: R, ell: R, grad: R) {
        self.log_weight.push(log_w);
        self.log_f.push(log_w + ell);
        let two_ell = R::two() * ell;
        self.log_f2.push(log_w + two_ell);
        if ell != R::zero() {
            self.f2_logf2.push(ell > R::zero(), log_w + two_ell + two_ell.abs().ln());
        }
        if grad > R::zero() {
            self.log_f2_grad.push(log_w + two_ell + grad.ln());
        }
    }

    /// Per-batch means on the log scale, kept for the delta-method standard
    /// errors around the pooled estimates.
    fn batch_stats(&self) -> BatchStats<R> {
        let log_total = self.log_weight.log_total();
        let (w_positive, log_abs) = self.f2_logf2.value_log();
        BatchStats {
            log_m1: self.log_f.log_total() - log_total,
            log_m2: self.log_f2.log_total() - log_total,
            w_positive,
            log_abs_w: log_abs - log_total,
            log_dir: self.log_f2_grad.log_total() - log_total,
        }
    }

    /// (log mean f, log mean f^2, log var f, log entropy f^2, log dirichlet).
    fn moments(&self) -> [R; 5] {
        let log_total = self.log_weight.log_total();
        let log_m1 = self.log_f.log_total() - log_total;
        let log_m2 = self.log_f2.log_total() - log_total;
        let log_var = if R::two() * log_m1 >= log_m2 {
            R::neg_infinity()
        } else {
            log_sub_exp(log_m2, R::two() * log_m1)
        };
        // Weighted mean of log f^2 under the f^2-tilted measure:
        // mu(f^2 log f^2) / mu(f^2) stays order log f, hence representable.
        let (w_pos, w_log_abs) = self.f2_logf2.value_log();
        let w_mag = (w_log_abs - self.log_f2.log_total()).exp();
        let w = if w_pos { w_mag } else { -w_mag };
        // entropy = mu(f^2) (w - log mu(f^2)); Jensen keeps w >= log mu(f^2).
        let gap = w - log_m2;
        let log_ent = if gap > R::zero() { log_m2 + gap.ln() } else { R::neg_infinity() };
        let log_dir = self.log_f2_grad.log_total() - log_total;
        [log_m1, log_m2, log_var, log_ent, log_dir]
    }
}

/// One batch of samples reduced to the means the delta method needs:
/// batch mean f, batch mean f^2, batch mean f^2 ln f^2 (signed), and the
/// batch Dirichlet summand, all on the log scale.
struct BatchStats<R> {
    log_m1: R,
    log_m2: R,
    w_positive: bool,
    log_abs_w: R,
    log_dir: R,
}

/// Pooled value with a batch-means standard error, everything evaluated on
/// the scale of the pooled value so strongly tilted runs never overflow the
/// intermediate arithmetic.
fn linear_estimate<R: Real>(log_pooled: R, batch_logs: &[R]) -> Estimate<R> {
    let value = log_pooled.exp();
    if log_pooled == R::neg_infinity() || batch_logs.len() < 2 {
        return Estimate { value, se: R::zero() };
    }
    let mut acc = RunningMoments::new();
    for &l in batch_logs {
        acc.push((l - log_pooled).exp());
    }
    Estimate { value, se: value * acc.se_of_mean() }
}

/// Delta-method error of var = m2 - m1^2 around the pooled estimate: the
/// linearization m2_b - 2 m1 m1_b is averaged batch by batch on the scale
/// of the pooled variance.
fn variance_se<R: Real>(pooled: &[R; 5], batches: &[BatchStats<R>]) -> R {
    let [log_m1, _, log_var, _, _] = *pooled;
    let value = log_var.exp();
    if log_var == R::neg_infinity() || batches.len() < 2 {
        return R::zero();
    }
    let two = R::two();
    let mut acc = RunningMoments::new();
    for b in batches {
        let quad = (two.ln() + log_m1 + b.log_m1 - log_var).exp();
        acc.push((b.log_m2 - log_var).exp() - quad);
    }
    value * acc.se_of_mean()
}

/// Delta-method error of ent = w - m2 ln m2 with w = mean f^2 ln f^2: the
/// linearization is w_b - (ln m2 + 1) m2_b around the pooled values.
fn entropy_se<R: Real>(pooled: &[R; 5], batches: &[BatchStats<R>]) -> R {
    let [_, log_m2, _, log_ent, _] = *pooled;
    let value = log_ent.exp();
    if log_ent == R::neg_infinity() || batches.len() < 2 {
        return R::zero();
    }
    let k = log_m2 + R::one();
    let mut acc = RunningMoments::new();
    for b in batches {
        let w_mag = (b.log_abs_w - log_ent).exp();
        let w = if b.w_positive { w_mag } else { -w_mag };
        let lin = if k == R::zero() {
            R::zero()
        } else {
            let mag = (k.abs().ln() + b.log_m2 - log_ent).exp();
            if k > R::zero() { mag } else { -mag }
        };
        acc.push(w - lin);
    }
    value * acc.se_of_mean()
}

fn assemble<R: Real>(
    pooled: [R; 5],
    batches: &[BatchStats<R>],
    ess: R,
    samples: usize,
) -> Moments<R> {
    let [log_mean_f, log_mean_f2, log_var_f, log_entropy_f2, log_dirichlet] = pooled;
    let m1_logs: Vec<R> = batches.iter().map(|b| b.log_m1).collect();
    let m2_logs: Vec<R> = batches.iter().map(|b| b.log_m2).collect();
    let dir_logs: Vec<R> = batches.iter().map(|b| b.log_dir).collect();
    let low_ess = ess < R::of(MIN_EFFECTIVE_SAMPLES);
    Moments {
        mean_f: linear_estimate(log_mean_f, &m1_logs),
        mean_f2: linear_estimate(log_mean_f2, &m2_logs),
        var_f: Estimate { value: log_var_f.exp(), se: variance_se(&pooled, batches) },
        entropy_f2: Estimate {
            value: log_entropy_f2.exp(),
            se: entropy_se(&pooled, batches),
        },
        dirichlet: linear_estimate(log_dirichlet, &dir_logs),
        log_mean_f,
        log_mean_f2,
        log_var_f,
        log_entropy_f2,
        log_dirichlet,
        ess,
        samples,
        low_ess,
    }
}

/// Exact moments over an enumerated Gibbs table.
pub fn exact_moments<R: Real>(
    table: &GibbsTable<R>,
    grid: &BlockGrid,
    tf: &crate::testfn::TestFunction<R>,
) -> Moments<R> {
    let domain = grid.domain();
    let n_states = table.states();
    assert_eq!(n_states, 1usize << domain.sites());
    let mut tally = Tally::new();
    for index in 0..n_states {
        let cfg = SpinConfig::from_packed(domain, index);
        let sums = BlockSums::compute(grid, &cfg);
        let ell = tf.log_value(grid, &sums);
        let grad = tf.relative_grad_sq(&cfg, grid, &sums);
        tally.push(table.log_prob[index], ell, grad);
    }
    // Enumeration is exact: no batches, every standard error is zero.
    assemble(tally.moments(), &[], R::of_usize(n_states), n_states)
}

#[derive(Debug, Clone, Copy)]
pub struct SamplingPlan {
    /// Burn-in time units before any samples are taken.
    pub burnin: usize,
    /// Number of samples, one per unit of chain time.
    pub samples: usize,
    pub batches: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self { burnin: 200, samples: 4000, batches: 40 }
    }
}

/// MCMC moments from the all-plus start. One sample per unit time; batch
/// means over contiguous batches supply the standard errors and the
/// effective-sample-size flag.
pub fn estimate_moments<R: Real>(
    model: &RateModel<R>,
    grid: &BlockGrid,
    tf: &crate::testfn::TestFunction<R>,
    plan: &SamplingPlan,
    seed: u64,
) -> Moments<R> {
    assert!(plan.samples >= 4 && plan.batches >= 2);
    let domain = grid.domain();
    let mut chain = UniformizedChain::new(*model, SpinConfig::all_plus(domain), seed);
    let mut sums = BlockSums::compute(grid, chain.config());
    {
        let grid_ref = &*grid;
        let sums_ref = &mut sums;
        chain.advance_to(R::of_usize(plan.burnin), |site, new_spin| {
            sums_ref.apply_flip(grid_ref, site, new_spin);
        });
    }

    let batches = plan.batches.min(plan.samples / 2).max(2);
    let per_batch = plan.samples / batches;
    let samples = per_batch * batches;
    let mut ells = Vec::with_capacity(samples);
    // Point estimates come from the pooled tally over the whole run; the
    // per-batch tallies only feed the delta-method standard errors. Pooling
    // avoids the O(1/batch length) bias a per-batch variance or entropy
    // would pick up from recentring inside each batch.
    let mut pooled = Tally::new();
    let mut stats = Vec::with_capacity(batches);
    let mut t = R::of_usize(plan.burnin);
    for _ in 0..batches {
        let mut tally = Tally::new();
        for _ in 0..per_batch {
            t += R::one();
            let grid_ref = &*grid;
            let sums_ref = &mut sums;
            chain.advance_to(t, |site, new_spin| {
                sums_ref.apply_flip(grid_ref, site, new_spin);
            });
            let ell = tf.log_value(grid, &sums);
            let grad = tf.relative_grad_sq(chain.config(), grid, &sums);
            tally.push(R::zero(), ell, grad);
            pooled.push(R::zero(), ell, grad);
            ells.push(ell);
        }
        stats.push(tally.batch_stats());
    }
    let ess = batch_means(&ells, batches).ess;
    assemble(pooled.moments(), &stats, ess, samples)
}

/// Ratio bound numerator/denominator with the estimates behind it.
#[derive(Debug, Clone, Copy)]
pub struct BoundEstimate<R> {
    pub value: R,
    pub se: R,
    pub log_value: R,
    pub numerator: Estimate<R>,
    pub denominator: Estimate<R>,
    pub ess: R,
    pub samples: usize,
}

fn ratio_bound<R: Real>(
    m: &Moments<R>,
    numerator: Estimate<R>,
    log_num: R,
) -> Result<BoundEstimate<R>> {
    let denominator = m.dirichlet;
    // A Dirichlet form statistically indistinguishable from zero cannot
    // certify any finite ratio.
    if m.log_dirichlet == R::neg_infinity()
        || denominator.value <= R::two() * denominator.se
    {
        return Err(Error::DegenerateDirichlet);
    }
    let log_value = log_num - m.log_dirichlet;
    let value = log_value.exp();
    let se = if numerator.value.is_finite()
        && denominator.value.is_finite()
        && numerator.value > R::zero()
    {
        let rn = numerator.se / numerator.value;
        let rd = denominator.se / denominator.value;
        value * (rn * rn + rd * rd).sqrt()
    } else {
        R::zero()
    };
    Ok(BoundEstimate {
        value,
        se,
        log_value,
        numerator,
        denominator,
        ess: m.ess,
        samples: m.samples,
    })
}

/// Lower bound on the inverse spectral gap: var(f) / dirichlet(f).
pub fn gap_lower_bound<R: Real>(m: &Moments<R>) -> Result<BoundEstimate<R>> {
    ratio_bound(m, m.var_f, m.log_var_f)
}

/// Lower bound on the inverse log-Sobolev constant: entropy(f^2) / dirichlet(f).
pub fn ls_lower_bound<R: Real>(m: &Moments<R>) -> Result<BoundEstimate<R>> {
    ratio_bound(m, m.entropy_f2, m.log_entropy_f2)
}

/// Where the spontaneous magnetization parameter m* comes from.
#[derive(Debug, Clone, Copy)]
pub enum MagnetizationRule<R> {
    /// Closed-form d=2 value; requires beta above critical.
    ExactD2,
    /// Caller-supplied value in (0, 1].
    Fixed(R),
    /// Center-site MCMC estimate (any dimension).
    Mcmc { burnin: usize, samples: usize, seed: u64 },
}

pub fn resolve_m_star<R: Real>(
    rule: &MagnetizationRule<R>,
    model: &RateModel<R>,
    domain: &Arc<crate::lattice::LatticeDomain>,
) -> Result<R> {
    match rule {
        MagnetizationRule::ExactD2 => spontaneous_magnetization_d2(model.beta)
            .ok_or(Error::BelowCritical { beta: model.beta.as_f64() }),
        MagnetizationRule::Fixed(v) => {
            assert!(*v > R::zero() && *v <= R::one(), "m* must lie in (0, 1]");
            Ok(*v)
        }
        MagnetizationRule::Mcmc { burnin, samples, seed } => {
            let summary =
                estimate_center_magnetization(model, domain, *burnin, *samples, 32, *seed);
            let m = summary.mean;
            if m <= R::of(0.05) {
                Err(Error::BelowCritical { beta: model.beta.as_f64() })
            } else {
                Ok(m.min(R::one()))
            }
        }
    }
}
