//! Birth-death caricature of droplet shrinkage. The state x in {0, ..., M}
//! with M = N^d is the droplet volume; its surface order is x^alpha with
//! alpha = (d - 1)/d, so the stationary weights are
//!
//!   mu(x) proportional to exp(-x^alpha),
//!
//! the birth rate is the surface b(x) = max(x, 1)^alpha (zero at the top),
//! and detailed balance fixes the death rate
//!
//!   d(x) = max(x - 1, 1)^alpha * exp(x^alpha - (x - 1)^alpha).
//!
//! Exact quantities available here: the spectral gap of the symmetrized
//! tridiagonal generator, mean hitting times via stationary tail sums, and
//! two-sided Hardy bounds for the gap (anchored resistance times tail mass)
//! and for the log-Sobolev constant (the same products with an extra
//! log(1/tail) factor). All heavy sums run in log space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::numeric::{log_add_exp, log_sum_exp, Real, SymTridiag};
use crate::variational::{maximize_ls_ratio, Edge, ReversibleChain};

const SPECTRUM_DEGENERACY: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct BirthDeathChain<R> {
    dim: u32,
    side: usize,
    volume: usize,
    alpha: R,
    /// log mu(x), normalized.
    log_mu: Vec<R>,
    /// log sum_{y >= x} mu(y).
    log_tail: Vec<R>,
    /// log sum_{y <= x} mu(y).
    log_head: Vec<R>,
}

impl<R: Real> BirthDeathChain<R> {
    pub fn new(dim: u32, side: usize) -> Self {
        assert!(dim >= 2, "surface exponent needs d >= 2");
        assert!(side >= 1);
        let volume = side.checked_pow(dim).expect("volume overflow");
        assert!(volume <= 1 << 20, "state space too large");
        let alpha = R::of_usize(dim as usize - 1) / R::of_usize(dim as usize);

        let raw: Vec<R> = (0..=volume).map(|x| -R::of_usize(x).powf(alpha)).collect();
        let log_z = log_sum_exp(raw.iter().copied());
        let log_mu: Vec<R> = raw.iter().map(|&v| v - log_z).collect();

        let mut log_tail = vec![R::neg_infinity(); volume + 1];
        let mut acc = R::neg_infinity();
        for x in (0..=volume).rev() {
            acc = log_add_exp(acc, log_mu[x]);
            log_tail[x] = acc;
        }
        let mut log_head = vec![R::neg_infinity(); volume + 1];
        let mut acc = R::neg_infinity();
        for x in 0..=volume {
            acc = log_add_exp(acc, log_mu[x]);
            log_head[x] = acc;
        }

        Self { dim, side, volume, alpha, log_mu, log_tail, log_head }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn volume(&self) -> usize {
        self.volume
    }

    pub fn states(&self) -> usize {
        self.volume + 1
    }

    pub fn log_stationary(&self, x: usize) -> R {
        self.log_mu[x]
    }

    pub fn log_tail_ge(&self, x: usize) -> R {
        self.log_tail[x]
    }

    fn surface(&self, x: usize) -> R {
        R::of_usize(x.max(1)).powf(self.alpha)
    }

    pub fn birth(&self, x: usize) -> R {
        if x >= self.volume {
            R::zero()
        } else {
            self.surface(x)
        }
    }

    pub fn death(&self, x: usize) -> R {
        if x == 0 {
            R::zero()
        } else {
            let gain = R::of_usize(x).powf(self.alpha) - R::of_usize(x - 1).powf(self.alpha);
            self.surface(x - 1) * gain.exp()
        }
    }

    /// Inverse spectral gap from the symmetrized tridiagonal generator.
    pub fn exact_inverse_gap(&self) -> Result<R> {
        let n = self.states();
        let diag: Vec<R> = (0..n).map(|x| self.birth(x) + self.death(x)).collect();
        let off: Vec<R> = (0..n - 1)
            .map(|x| -(self.birth(x) * self.death(x + 1)).sqrt())
            .collect();
        let tri = SymTridiag::new(diag, off);
        if n == 1 {
            return Err(Error::DegenerateSpectrum { lambda1: 0.0, threshold: SPECTRUM_DEGENERACY });
        }
        let eigs = tri.smallest(2);
        debug_assert!(eigs[0].abs() < R::of(1e-8), "lowest eigenvalue should vanish");
        let lambda1 = eigs[1];
        if lambda1.as_f64() < SPECTRUM_DEGENERACY {
            return Err(Error::DegenerateSpectrum {
                lambda1: lambda1.as_f64(),
                threshold: SPECTRUM_DEGENERACY,
            });
        }
        Ok(lambda1.recip())
    }

    /// E_x[T_{x-1}] = tail(x) / (mu(x) d(x)).
    pub fn expected_downward_step(&self, x: usize) -> R {
        assert!(x >= 1 && x <= self.volume);
        (self.log_tail[x] - self.log_mu[x] - self.death(x).ln()).exp()
    }

    pub fn expected_hitting_to_zero(&self, start: usize) -> R {
        (1..=start).map(|x| self.expected_downward_step(x)).sum()
    }

    /// One continuous-time trajectory from `start` until it reaches 0.
    pub fn simulate_hitting_to_zero(&self, start: usize, seed: u64) -> R {
        assert!(start <= self.volume);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut x = start;
        let mut t = R::zero();
        while x > 0 {
            let up = self.birth(x);
            let total = up + self.death(x);
            let u: R = R::of(rng.gen::<f64>());
            t -= (R::one() - u).ln() / total;
            let v: R = R::of(rng.gen::<f64>());
            if v * total < up {
                x += 1;
            } else {
                x -= 1;
            }
        }
        t
    }

    /// log 1/(mu(y) b(y)), the resistance of the edge between y and y + 1.
    fn log_resistance(&self, y: usize) -> R {
        -(self.log_mu[y] + self.birth(y).ln())
    }

    fn hardy_bound(&self, with_log_factor: bool) -> HardyReport<R> {
        let m = self.volume;
        let neg_inf = R::neg_infinity();
        let mut best = R::infinity();
        let mut best_anchor = 0;
        let mut best_sides = (R::zero(), R::zero());
        for anchor in 0..=m {
            // Right side: functions vanishing at the anchor, supported above.
            let mut log_plus = neg_inf;
            let mut log_res = neg_inf;
            for x in anchor + 1..=m {
                log_res = log_add_exp(log_res, self.log_resistance(x - 1));
                let mut cand = log_res + self.log_tail[x];
                if with_log_factor {
                    cand += (-self.log_tail[x]).ln();
                }
                if cand > log_plus {
                    log_plus = cand;
                }
            }
            // Left side, mirrored with head masses.
            let mut log_minus = neg_inf;
            let mut log_res = neg_inf;
            for x in (0..anchor).rev() {
                log_res = log_add_exp(log_res, self.log_resistance(x));
                let mut cand = log_res + self.log_head[x];
                if with_log_factor {
                    cand += (-self.log_head[x]).ln();
                }
                if cand > log_minus {
                    log_minus = cand;
                }
            }
            let value = log_plus.max(log_minus).exp();
            if value < best {
                best = value;
                best_anchor = anchor;
                best_sides = (log_plus.exp(), log_minus.exp());
            }
        }
        HardyReport { bound: best, anchor: best_anchor, plus: best_sides.0, minus: best_sides.1 }
    }

    /// B = min over anchors of max(B+, B-); the inverse gap sits in [B/2, 4B].
    pub fn hardy_gap_bound(&self) -> HardyReport<R> {
        self.hardy_bound(false)
    }

    /// Same scan with the extra log(1/tail) weight; tracks the log-Sobolev
    /// constant up to universal factors.
    pub fn hardy_ls_bound(&self) -> HardyReport<R> {
        self.hardy_bound(true)
    }

    pub fn to_reversible_chain(&self) -> ReversibleChain<R> {
        let prob: Vec<R> = self.log_mu.iter().map(|&l| l.exp()).collect();
        let edges: Vec<Edge<R>> = (0..self.volume)
            .map(|x| Edge { i: x, j: x + 1, weight: (self.log_mu[x] + self.birth(x).ln()).exp() })
            .collect();
        ReversibleChain::new(prob, edges)
    }

    /// Certified lower bound on the log-Sobolev constant by variational
    /// ascent from a ramp, a tail indicator, and the sqrt-density tilt.
    pub fn ls_lower_bound_numeric(&self, max_iters: usize) -> R {
        let chain = self.to_reversible_chain();
        let n = self.states();
        let m = R::of_usize(self.volume.max(1));
        let ramp: Vec<R> = (0..n).map(|x| R::of_usize(x) / m).collect();
        let indicator: Vec<R> =
            (0..n).map(|x| if x > self.volume / 2 { R::one() } else { R::zero() }).collect();
        let top = R::of_usize(self.volume).powf(self.alpha);
        let tilt: Vec<R> = (0..n)
            .map(|x| ((R::of_usize(x).powf(self.alpha) - top) * R::half()).exp())
            .collect();
        maximize_ls_ratio(&chain, &[ramp, indicator, tilt], max_iters).ratio
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HardyReport<R> {
    pub bound: R,
    pub anchor: usize,
    pub plus: R,
    pub minus: R,
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingRow<R> {
    pub side: usize,
    pub volume: usize,
    pub inverse_gap: R,
    pub hardy_gap: R,
    pub hardy_ls: R,
    pub hitting_from_top: R,
}

pub fn scaling_experiment<R: Real>(dim: u32, sides: &[usize]) -> Result<Vec<ScalingRow<R>>> {
    sides
        .iter()
        .map(|&side| {
            let chain = BirthDeathChain::<R>::new(dim, side);
            Ok(ScalingRow {
                side,
                volume: chain.volume(),
                inverse_gap: chain.exact_inverse_gap()?,
                hardy_gap: chain.hardy_gap_bound().bound,
                hardy_ls: chain.hardy_ls_bound().bound,
                hitting_from_top: chain.expected_hitting_to_zero(chain.volume()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::RunningMoments;

    #[test]
    fn death_rates_match_closed_forms() {
        let chain = BirthDeathChain::<f64>::new(2, 4);
        assert!((chain.death(1) - std::f64::consts::E).abs() < 1e-12);
        assert!((chain.death(5) - 2.5325207689126146).abs() < 1e-9);
        let cube = BirthDeathChain::<f64>::new(3, 2);
        assert!((cube.death(1) - std::f64::consts::E).abs() < 1e-12);
        assert_eq!(chain.death(0), 0.0);
        assert_eq!(chain.birth(chain.volume()), 0.0);
    }

    #[test]
    fn detailed_balance_holds_across_every_edge() {
        for (dim, side) in [(2u32, 7usize), (3, 4)] {
            let chain = BirthDeathChain::<f64>::new(dim, side);
            for x in 0..chain.volume() {
                let lhs = chain.log_stationary(x) + chain.birth(x).ln();
                let rhs = chain.log_stationary(x + 1) + chain.death(x + 1).ln();
                assert!((lhs - rhs).abs() < 1e-12, "edge {} of side {}", x, side);
            }
        }
    }

    #[test]
    fn death_dominates_birth_away_from_zero() {
        for dim in [2u32, 3] {
            let chain = BirthDeathChain::<f64>::new(dim, 6);
            for x in 1..=chain.volume() {
                assert!(chain.birth(x) < chain.death(x), "x = {} dim = {}", x, dim);
            }
        }
    }

    #[test]
    fn stationary_tails_and_hitting_match_high_precision_oracle() {
        // Frozen from a 50-digit evaluation of the defining sums at
        // dim 2, side 20 (M = 400).
        let chain = BirthDeathChain::<f64>::new(2, 20);
        let log_z_direct = {
            let raw: f64 = (0..=400).map(|x| (-(x as f64).sqrt()).exp()).sum();
            raw.ln()
        };
        assert!((log_z_direct - 0.9822307950517382).abs() < 1e-10);
        assert!((chain.log_tail_ge(100) - (-7.868614057913207)).abs() < 1e-10);
        assert!((chain.expected_downward_step(100) - 2.150996413967302).abs() < 1e-9);
        assert!(
            (chain.expected_hitting_to_zero(400) - 775.7438777596437).abs() < 1e-6,
            "total hitting time drifted: {}",
            chain.expected_hitting_to_zero(400)
        );
    }

    #[test]
    fn two_state_instance_has_closed_form_gap_bound_and_hitting() {
        let chain = BirthDeathChain::<f64>::new(2, 1);
        let e = std::f64::consts::E;
        let s = chain.exact_inverse_gap().unwrap();
        assert!((s - 1.0 / (1.0 + e)).abs() < 1e-12);
        let hardy = chain.hardy_gap_bound();
        assert!((hardy.bound - 1.0 / e).abs() < 1e-12);
        assert_eq!(hardy.anchor, 0);
        assert!((chain.expected_downward_step(1) - 1.0 / e).abs() < 1e-12);
        assert!(hardy.bound / 2.0 <= s + 1e-12 && s <= 4.0 * hardy.bound + 1e-12);
    }

    /// Linear-arithmetic recomputation of the anchored Hardy scans, cubic in
    /// the state count; small enough volumes keep every term in f64 range.
    fn brute_force_hardy(chain: &BirthDeathChain<f64>, with_log: bool) -> f64 {
        let m = chain.volume();
        let mu: Vec<f64> = (0..=m).map(|x| chain.log_stationary(x).exp()).collect();
        let mut best = f64::INFINITY;
        for anchor in 0..=m {
            let mut side_max = 0.0f64;
            for x in anchor + 1..=m {
                let res: f64 = (anchor..x).map(|y| 1.0 / (mu[y] * chain.birth(y))).sum();
                let tail: f64 = (x..=m).map(|y| mu[y]).sum();
                let mut cand = res * tail;
                if with_log {
                    cand *= (1.0 / tail).ln();
                }
                side_max = side_max.max(cand);
            }
            for x in 0..anchor {
                let res: f64 = (x..anchor).map(|y| 1.0 / (mu[y] * chain.birth(y))).sum();
                let head: f64 = (0..=x).map(|y| mu[y]).sum();
                let mut cand = res * head;
                if with_log {
                    cand *= (1.0 / head).ln();
                }
                side_max = side_max.max(cand);
            }
            best = best.min(side_max);
        }
        best
    }

    #[test]
    fn hardy_scan_matches_brute_force_recomputation() {
        for (dim, side) in [(2u32, 14usize), (3, 5)] {
            let chain = BirthDeathChain::<f64>::new(dim, side);
            let fast_gap = chain.hardy_gap_bound().bound;
            let brute_gap = brute_force_hardy(&chain, false);
            assert!(
                (fast_gap - brute_gap).abs() < 1e-10 * brute_gap,
                "gap bound {} vs brute {} at dim {}",
                fast_gap,
                brute_gap,
                dim
            );
            let fast_ls = chain.hardy_ls_bound().bound;
            let brute_ls = brute_force_hardy(&chain, true);
            assert!(
                (fast_ls - brute_ls).abs() < 1e-10 * brute_ls,
                "ls bound {} vs brute {} at dim {}",
                fast_ls,
                brute_ls,
                dim
            );
        }
    }

    #[test]
    fn hardy_sandwich_captures_the_exact_gap_on_small_chains() {
        for (dim, sides) in [(2u32, vec![1usize, 2, 3, 4, 5, 6]), (3, vec![1, 2, 3])] {
            for side in sides {
                let chain = BirthDeathChain::<f64>::new(dim, side);
                let s = chain.exact_inverse_gap().unwrap();
                let b = chain.hardy_gap_bound().bound;
                assert!(
                    b / 2.0 <= s + 1e-9 && s <= 4.0 * b + 1e-9,
                    "dim {} side {}: S = {}, B = {}",
                    dim,
                    side,
                    s,
                    b
                );
            }
        }
    }

    #[test]
    fn simulated_hitting_times_agree_with_the_exact_mean() {
        let chain = BirthDeathChain::<f64>::new(2, 3);
        let exact = chain.expected_hitting_to_zero(5);
        let mut acc = RunningMoments::new();
        for run in 0..4000u64 {
            acc.push(chain.simulate_hitting_to_zero(5, 90_000 + run));
        }
        let est = acc.estimate();
        assert!(
            (est.value - exact).abs() < 3.0 * est.se,
            "simulated {} +- {} vs exact {}",
            est.value,
            est.se,
            exact
        );
        let replay = chain.simulate_hitting_to_zero(5, 90_000);
        assert_eq!(replay, chain.simulate_hitting_to_zero(5, 90_000));
    }

    #[test]
    fn numeric_ls_ascent_stays_between_plug_in_and_hardy_scale() {
        let chain = BirthDeathChain::<f64>::new(2, 8);
        let numeric = chain.ls_lower_bound_numeric(400);
        let hardy = chain.hardy_ls_bound().bound;
        assert!(numeric > 0.0);
        assert!(
            numeric <= 20.0 * hardy,
            "ascent {} exceeds 20x the Hardy bound {}",
            numeric,
            hardy
        );
        // The gap quotient of the same chain caps the entropy quotient up to
        // the standard factor 2 (Ent(f^2) <= 2 var at first order); only a
        // coarse consistency check is made here.
        let inverse_gap = chain.exact_inverse_gap().unwrap();
        assert!(numeric <= 40.0 * inverse_gap.max(hardy));
    }

    #[test]
    fn scaling_rows_are_complete_and_positive() {
        let rows = scaling_experiment::<f64>(2, &[2, 4, 8]).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert_eq!(r.volume, r.side * r.side);
            assert!(r.inverse_gap > 0.0 && r.hardy_gap > 0.0);
            assert!(r.hardy_ls > 0.0 && r.hitting_from_top > 0.0);
        }
        // Monotone growth of relaxation time with the side.
        assert!(rows[0].inverse_gap < rows[1].inverse_gap);
        assert!(rows[1].inverse_gap < rows[2].inverse_gap);
    }
}
