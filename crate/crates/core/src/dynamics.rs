//! Continuous-time single-spin-flip dynamics: an event-driven simulator that
//! tracks every site's current rate in a sum tree, and a uniformized chain
//! (rate-1 resampling clocks per site) whose event stream is independent of
//! where observations are taken.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::lattice::{LatticeDomain, SpinConfig};
use crate::numeric::{batch_means, BatchSummary, Real};
use crate::rates::{RateKind, RateModel};

/// Exponential wait with the given rate; strictly nonnegative.
#[inline]
pub(crate) fn exp_wait<R: Real>(rng: &mut impl Rng, rate: R) -> R {
    let u: f64 = rng.gen();
    -R::of(1.0 - u).ln() / rate
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipEvent<R> {
    pub time: R,
    pub site: u32,
}

/// Full record of one event-driven run. Event times are nondecreasing and
/// every event is an actual spin flip.
#[derive(Debug, Clone)]
pub struct Trajectory<R> {
    pub initial: SpinConfig,
    pub events: Vec<FlipEvent<R>>,
    pub horizon: R,
    pub final_config: SpinConfig,
}

impl<R: Real> Trajectory<R> {
    /// Re-applies the event list to the initial state.
    pub fn replay(&self) -> SpinConfig {
        let mut cfg = self.initial.clone();
        for ev in &self.events {
            cfg.flip(ev.site as usize);
        }
        cfg
    }

    /// Visits every piecewise-constant state with its dwell time, including
    /// the final stretch up to the horizon.
    pub fn fold_states(&self, mut visit: impl FnMut(&SpinConfig, R)) {
        let mut cfg = self.initial.clone();
        let mut t = R::zero();
        for ev in &self.events {
            visit(&cfg, ev.time - t);
            cfg.flip(ev.site as usize);
            t = ev.time;
        }
        visit(&cfg, self.horizon - t);
    }
}

/// Binary sum tree over per-site rates; sampling and updates are O(log n).
struct RateTree<R> {
    cap: usize,
    nodes: Vec<R>,
}

impl<R: Real> RateTree<R> {
    fn new(rates: &[R]) -> Self {
        let cap = rates.len().next_power_of_two();
        let mut nodes = vec![R::zero(); 2 * cap];
        nodes[cap..cap + rates.len()].copy_from_slice(rates);
        for i in (1..cap).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        Self { cap, nodes }
    }

    fn total(&self) -> R {
        self.nodes[1]
    }

    fn set(&mut self, site: usize, rate: R) {
        let mut i = self.cap + site;
        self.nodes[i] = rate;
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
        }
    }

    /// Site whose cumulative rate interval contains `target` in [0, total).
    fn sample(&self, mut target: R, n_sites: usize) -> usize {
        let mut i = 1;
        while i < self.cap {
            let left = self.nodes[2 * i];
            if target < left {
                i = 2 * i;
            } else {
                target -= left;
                i = 2 * i + 1;
            }
        }
        (i - self.cap).min(n_sites - 1)
    }
}

/// Event-driven continuous-time simulation: waits are exponential in the
/// total rate, sites are chosen proportionally to their current rate, and
/// every event is a flip. Deterministic in (model, initial, horizon, seed).
pub fn simulate_ct<R: Real>(
    model: &RateModel<R>,
    initial: SpinConfig,
    horizon: R,
    seed: u64,
) -> Trajectory<R> {
    assert!(horizon >= R::zero() && horizon.is_finite());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let domain = Arc::clone(initial.domain());
    let n = domain.sites();

    let mut cfg = initial.clone();
    let rates: Vec<R> = (0..n).map(|x| model.flip_rate(&cfg, x)).collect();
    let mut tree = RateTree::new(&rates);

    let mut events = Vec::new();
    let mut t = R::zero();
    let mut since_rebuild = 0usize;
    loop {
        let total = tree.total();
        assert!(total > R::zero(), "rates must stay positive");
        t += exp_wait(&mut rng, total);
        if t > horizon || !t.is_finite() {
            break;
        }
        let u: f64 = rng.gen();
        let site = tree.sample(R::of(u) * total, n);
        cfg.flip(site);
        events.push(FlipEvent { time: t, site: site as u32 });

        tree.set(site, model.flip_rate(&cfg, site));
        for &nbr in domain.neighbor_slots(site) {
            if nbr >= 0 {
                let nbr = nbr as usize;
                tree.set(nbr, model.flip_rate(&cfg, nbr));
            }
        }

        // Periodically rebuild the partial sums so float drift cannot
        // accumulate over long runs.
        since_rebuild += 1;
        if since_rebuild == 1 << 20 {
            since_rebuild = 0;
            let rates: Vec<R> = (0..n).map(|x| model.flip_rate(&cfg, x)).collect();
            tree = RateTree::new(&rates);
        }
    }

    Trajectory { initial, events, horizon, final_config: cfg }
}

/// Uniformized dynamics: a rate-1 Poisson resampling clock per site. The next
/// event time is carried in the state, so interleaving observations at
/// arbitrary times does not perturb the random stream.
pub struct UniformizedChain<R> {
    model: RateModel<R>,
    cfg: SpinConfig,
    time: R,
    next_event: R,
    rng: ChaCha12Rng,
}

impl<R: Real> UniformizedChain<R> {
    pub fn new(model: RateModel<R>, initial: SpinConfig, seed: u64) -> Self {
        Self::with_rng(model, initial, ChaCha12Rng::seed_from_u64(seed))
    }

    /// Seeds replica `stream` of a common master seed with a disjoint
    /// ChaCha stream.
    pub fn with_stream(model: RateModel<R>, initial: SpinConfig, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self::with_rng(model, initial, rng)
    }

    fn with_rng(model: RateModel<R>, initial: SpinConfig, mut rng: ChaCha12Rng) -> Self {
        let n = initial.domain().sites();
        let first = exp_wait(&mut rng, R::of_usize(n));
        Self { model, cfg: initial, time: R::zero(), next_event: first, rng }
    }

    pub fn config(&self) -> &SpinConfig {
        &self.cfg
    }

    pub fn time(&self) -> R {
        self.time
    }

    /// Runs all events up to time `t`; `on_flip(site, new_spin)` fires for
    /// every actual spin change.
    pub fn advance_to(&mut self, t: R, mut on_flip: impl FnMut(usize, i8)) {
        assert!(t >= self.time, "time must not run backwards");
        let n = self.cfg.domain().sites();
        let rate = R::of_usize(n);
        while self.next_event <= t {
            let site = self.rng.gen_range(0..n);
            let u: f64 = self.rng.gen();
            let spin = self.cfg.spin(site);
            let field = self.cfg.local_field(site);
            match self.model.kind {
                RateKind::HeatBath => {
                    let p_plus = self.model.heat_bath_plus_probability(field);
                    let new = if R::of(u) < p_plus { 1 } else { -1 };
                    if new != spin {
                        self.cfg.set(site, new);
                        on_flip(site, new);
                    }
                }
                RateKind::Metropolis => {
                    if R::of(u) < self.model.rate_for(spin, field) {
                        self.cfg.flip(site);
                        on_flip(site, -spin);
                    }
                }
            }
            self.next_event += exp_wait(&mut self.rng, rate);
        }
        self.time = t;
    }

    /// Advances by `dt` ignoring flips.
    pub fn run(&mut self, dt: R) {
        let target = self.time + dt;
        self.advance_to(target, |_, _| {});
    }
}

/// Equilibrium center-spin magnetization via uniformized sampling from the
/// all-plus start (the natural state of the plus-boundary phase). One sample
/// per unit time after burn-in; batch means absorb the autocorrelation.
pub fn estimate_center_magnetization<R: Real>(
    model: &RateModel<R>,
    domain: &Arc<LatticeDomain>,
    burnin: usize,
    samples: usize,
    batches: usize,
    seed: u64,
) -> BatchSummary<R> {
    assert!(samples > 0);
    let mut chain = UniformizedChain::new(*model, SpinConfig::all_plus(domain), seed);
    chain.run(R::of_usize(burnin));
    let center = domain.center_site();
    let mut series = Vec::with_capacity(samples);
    for _ in 0..samples {
        chain.run(R::one());
        series.push(R::of_i32(chain.config().spin(center) as i32));
    }
    batch_means(&series, batches)
}
