//! Single-spin-flip rate families. Both satisfy detailed balance with
//! respect to the finite-volume Gibbs measure, are uniformly positive, and
//! are bounded above by 1, with rate bounds k^-1 <= c <= k for
//! k = 1 + e^{4 d beta}.

use rand::Rng;

use crate::lattice::{LatticeDomain, SpinConfig};
use crate::numeric::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    /// c = 1 / (1 + e^{beta dH}).
    HeatBath,
    /// c = min(1, e^{-beta dH}).
    Metropolis,
}

impl RateKind {
    pub fn name(&self) -> &'static str {
        match self {
            RateKind::HeatBath => "heat-bath",
            RateKind::Metropolis => "metropolis",
        }
    }
}

impl std::str::FromStr for RateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heat-bath" | "heatbath" | "hb" => Ok(RateKind::HeatBath),
            "metropolis" | "met" => Ok(RateKind::Metropolis),
            other => Err(format!("unknown rate model '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RateModel<R> {
    pub kind: RateKind,
    pub beta: R,
}

/// softplus(z) = log(1 + e^z), with max(z,0) split out so that
/// softplus(z) - softplus(-z) = z holds exactly in floating point. That
/// identity is what makes the log-rate detailed-balance check exact.
fn softplus<R: Real>(z: R) -> R {
    z.max(R::zero()) + (-z.abs()).exp().ln_1p()
}

impl<R: Real> RateModel<R> {
    pub fn new(kind: RateKind, beta: R) -> Self {
        assert!(beta >= R::zero() && beta.is_finite(), "beta must be finite and nonnegative");
        Self { kind, beta }
    }

    pub fn heat_bath(beta: R) -> Self {
        Self::new(RateKind::HeatBath, beta)
    }

    pub fn metropolis(beta: R) -> Self {
        Self::new(RateKind::Metropolis, beta)
    }

    /// Flip rate at a site carrying `spin` in local field `field`;
    /// the energy change of the flip is dH = 2 spin field.
    #[inline]
    pub fn rate_for(&self, spin: i8, field: i32) -> R {
        let z = self.beta * R::of_i32(2 * spin as i32 * field);
        match self.kind {
            RateKind::HeatBath => R::one() / (R::one() + z.exp()),
            RateKind::Metropolis => (-z).exp().min(R::one()),
        }
    }

    #[inline]
    pub fn log_rate_for(&self, spin: i8, field: i32) -> R {
        let z = self.beta * R::of_i32(2 * spin as i32 * field);
        match self.kind {
            RateKind::HeatBath => -softplus(z),
            RateKind::Metropolis => (-z).min(R::zero()),
        }
    }

    pub fn flip_rate(&self, cfg: &SpinConfig, site: usize) -> R {
        self.rate_for(cfg.spin(site), cfg.local_field(site))
    }

    pub fn log_flip_rate(&self, cfg: &SpinConfig, site: usize) -> R {
        self.log_rate_for(cfg.spin(site), cfg.local_field(site))
    }

    /// Heat-bath probability that a refreshed spin lands on +1 given its
    /// local field; increasing in the field, which is what makes the shared
    /// uniform-threshold update order-preserving.
    #[inline]
    pub fn heat_bath_plus_probability(&self, field: i32) -> R {
        let z = -R::two() * self.beta * R::of_i32(field);
        R::one() / (R::one() + z.exp())
    }

    /// Uniform rate bounds (k^-1, k), k = 1 + e^{4 d beta}.
    pub fn rate_bounds(&self, dim: u32) -> (R, R) {
        let k = R::one() + (R::of(4.0 * dim as f64) * self.beta).exp();
        (k.recip(), k)
    }
}

/// Worst observed detailed-balance violation and rate range over sampled
/// (configuration, site) pairs.
#[derive(Debug, Clone, Copy)]
pub struct BalanceReport<R> {
    pub max_log_violation: R,
    pub min_rate: R,
    pub max_rate: R,
    pub pairs: usize,
}

/// Samples random (sigma, x) pairs and measures
/// |log c(sigma, x) - log c(sigma^x, x) + beta dH(sigma, x)|,
/// which vanishes identically for a reversible rate family.
pub fn check_detailed_balance<R: Real>(
    model: &RateModel<R>,
    domain: &std::sync::Arc<LatticeDomain>,
    pairs: usize,
    seed: u64,
) -> BalanceReport<R> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut worst = R::zero();
    let mut min_rate = R::infinity();
    let mut max_rate = R::neg_infinity();
    for _ in 0..pairs {
        let mut cfg = SpinConfig::random(domain, &mut rng);
        let site = rng.gen_range(0..domain.sites());
        let spin = cfg.spin(site);
        let field = cfg.local_field(site);
        let delta_h = 2 * spin as i32 * field;
        let log_fwd = model.log_flip_rate(&cfg, site);
        cfg.flip(site);
        let log_bwd = model.log_flip_rate(&cfg, site);
        let violation = (log_fwd - log_bwd + model.beta * R::of_i32(delta_h)).abs();
        worst = worst.max(violation);
        let rate = log_fwd.exp();
        min_rate = min_rate.min(rate);
        max_rate = max_rate.max(rate);
    }
    BalanceReport { max_log_violation: worst, min_rate, max_rate, pairs }
}
