//! Variational characterization of relaxation constants on small reversible
//! chains. A chain is a probability vector mu together with edge
//! conductances w(i, j) = mu(i) * rate(i -> j), symmetric by reversibility.
//! The Dirichlet form is
//!
//!   E(f) = sum over edges of w * (f_j - f_i)^2,
//!
//! and the two quotients of interest are var(f) / E(f), whose supremum is
//! the inverse spectral gap, and Ent(f^2) / E(f), whose supremum is the
//! log-Sobolev constant. The optimizer here climbs the entropy quotient by
//! projected gradient ascent from caller-supplied starts; since every step
//! is accepted only on improvement, the result is always at least the
//! quotient of each start, so it certifies lower bounds.

use std::sync::Arc;

use crate::gibbs::GibbsTable;
use crate::lattice::{LatticeDomain, SpinConfig};
use crate::numeric::Real;
use crate::rates::RateModel;

#[derive(Debug, Clone, Copy)]
pub struct Edge<R> {
    pub i: usize,
    pub j: usize,
    pub weight: R,
}

#[derive(Debug, Clone)]
pub struct ReversibleChain<R> {
    prob: Vec<R>,
    edges: Vec<Edge<R>>,
}

impl<R: Real> ReversibleChain<R> {
    pub fn new(prob: Vec<R>, edges: Vec<Edge<R>>) -> Self {
        assert!(!prob.is_empty());
        let total: R = prob.iter().copied().sum();
        assert!((total - R::one()).abs() < R::of(1e-9), "mu must be normalized");
        for e in &edges {
            assert!(e.i < prob.len() && e.j < prob.len() && e.i != e.j);
            assert!(e.weight >= R::zero());
        }
        Self { prob, edges }
    }

    pub fn states(&self) -> usize {
        self.prob.len()
    }

    pub fn prob(&self) -> &[R] {
        &self.prob
    }

    pub fn edges(&self) -> &[Edge<R>] {
        &self.edges
    }

    pub fn mean(&self, f: &[R]) -> R {
        self.prob.iter().zip(f).map(|(&p, &v)| p * v).sum()
    }

    pub fn variance(&self, f: &[R]) -> R {
        let m = self.mean(f);
        self.prob.iter().zip(f).map(|(&p, &v)| p * (v - m) * (v - m)).sum()
    }

    /// Ent(f^2) = E[f^2 ln f^2] - E[f^2] ln E[f^2].
    pub fn entropy_f2(&self, f: &[R]) -> R {
        let m2: R = self.prob.iter().zip(f).map(|(&p, &v)| p * v * v).sum();
        if m2 <= R::zero() {
            return R::zero();
        }
        let log_m2 = m2.ln();
        let mut ent = R::zero();
        for (&p, &v) in self.prob.iter().zip(f) {
            let x = v * v;
            if x > R::zero() {
                ent += p * x * (x.ln() - log_m2);
            }
        }
        ent.max(R::zero())
    }

    pub fn dirichlet(&self, f: &[R]) -> R {
        self.edges
            .iter()
            .map(|e| {
                let d = f[e.j] - f[e.i];
                e.weight * d * d
            })
            .sum()
    }

    pub fn ls_ratio(&self, f: &[R]) -> R {
        let e = self.dirichlet(f);
        if e <= R::zero() {
            return R::neg_infinity();
        }
        self.entropy_f2(f) / e
    }

    pub fn gap_ratio(&self, f: &[R]) -> R {
        let e = self.dirichlet(f);
        if e <= R::zero() {
            return R::neg_infinity();
        }
        self.variance(f) / e
    }
}

/// Single-flip spin dynamics as a reversible chain over the enumerated
/// state space: one edge per unordered configuration pair differing at one
/// site, with conductance w = mu(sigma) c_x(sigma). Detailed balance makes
/// the weight independent of which endpoint supplies the rate, so each pair
/// is read off the side where the flipped site is minus.
pub fn glauber_chain<R: Real>(
    model: &RateModel<R>,
    table: &GibbsTable<R>,
    domain: &Arc<LatticeDomain>,
) -> ReversibleChain<R> {
    let n_sites = domain.sites();
    let n_states = table.states();
    assert_eq!(n_states, 1usize << n_sites, "table must enumerate the domain");
    let mut edges = Vec::with_capacity(n_states / 2 * n_sites);
    for index in 0..n_states {
        let cfg = SpinConfig::from_packed(domain, index);
        for site in 0..n_sites {
            let upper = index | (1usize << site);
            if upper == index {
                continue;
            }
            let weight = table.prob[index] * model.flip_rate(&cfg, site);
            edges.push(Edge { i: index, j: upper, weight });
        }
    }
    ReversibleChain::new(table.prob.clone(), edges)
}

fn normalize_m2<R: Real>(chain: &ReversibleChain<R>, f: &mut [R]) -> bool {
    let m2: R = chain.prob.iter().zip(f.iter()).map(|(&p, &v)| p * v * v).sum();
    if m2 <= R::zero() {
        return false;
    }
    let s = m2.sqrt().recip();
    for v in f.iter_mut() {
        *v *= s;
    }
    true
}

/// Gradient of Ent(f^2) at f with E[f^2] = m2; the i-th component is
/// 2 mu_i f_i ln(f_i^2 / m2), zero at f_i = 0 by continuity.
fn entropy_gradient<R: Real>(chain: &ReversibleChain<R>, f: &[R], grad: &mut [R]) {
    let m2: R = chain.prob.iter().zip(f).map(|(&p, &v)| p * v * v).sum();
    let log_m2 = m2.ln();
    for ((g, &p), &v) in grad.iter_mut().zip(&chain.prob).zip(f) {
        *g = if v == R::zero() {
            R::zero()
        } else {
            R::two() * p * v * ((v * v).ln() - log_m2)
        };
    }
}

fn dirichlet_gradient<R: Real>(chain: &ReversibleChain<R>, f: &[R], grad: &mut [R]) {
    for g in grad.iter_mut() {
        *g = R::zero();
    }
    for e in &chain.edges {
        let d = R::two() * e.weight * (f[e.i] - f[e.j]);
        grad[e.i] += d;
        grad[e.j] -= d;
    }
}

#[derive(Debug, Clone)]
pub struct AscentResult<R> {
    pub ratio: R,
    pub argmax: Vec<R>,
    pub iterations: usize,
}

/// Climbs Ent(f^2) / E(f) from each start and keeps the best endpoint.
/// Steps are only ever accepted on strict improvement, so the returned
/// ratio is at least the quotient of every supplied start.
pub fn maximize_ls_ratio<R: Real>(
    chain: &ReversibleChain<R>,
    starts: &[Vec<R>],
    max_iters: usize,
) -> AscentResult<R> {
    assert!(!starts.is_empty());
    let n = chain.states();
    let mut best_ratio = R::neg_infinity();
    let mut best_f = vec![R::zero(); n];
    let mut total_iters = 0;

    let mut ent_grad = vec![R::zero(); n];
    let mut dir_grad = vec![R::zero(); n];

    for start in starts {
        assert_eq!(start.len(), n);
        let mut f = start.clone();
        if !normalize_m2(chain, &mut f) {
            continue;
        }
        let mut ratio = chain.ls_ratio(&f);
        if !ratio.is_finite() {
            continue;
        }
        let mut step = R::of(0.1);
        let tiny_step = R::of(1e-14);
        for _ in 0..max_iters {
            total_iters += 1;
            let ent = chain.entropy_f2(&f);
            let dir = chain.dirichlet(&f);
            entropy_gradient(chain, &f, &mut ent_grad);
            dirichlet_gradient(chain, &f, &mut dir_grad);
            // grad of ent/dir = (dir * grad ent - ent * grad dir) / dir^2
            let inv_dir2 = (dir * dir).recip();
            let mut norm2 = R::zero();
            for i in 0..n {
                let g = (dir * ent_grad[i] - ent * dir_grad[i]) * inv_dir2;
                dir_grad[i] = g;
                norm2 += g * g;
            }
            if norm2 <= R::zero() {
                break;
            }
            let mut improved = false;
            while step > tiny_step {
                let mut cand: Vec<R> =
                    f.iter().zip(&dir_grad).map(|(&v, &g)| v + step * g).collect();
                if normalize_m2(chain, &mut cand) {
                    let cand_ratio = chain.ls_ratio(&cand);
                    if cand_ratio > ratio {
                        f = cand;
                        ratio = cand_ratio;
                        step *= R::of(1.2);
                        improved = true;
                        break;
                    }
                }
                step *= R::half();
            }
            if !improved {
                break;
            }
        }
        if ratio > best_ratio {
            best_ratio = ratio;
            best_f = f;
        }
    }

    AscentResult { ratio: best_ratio, argmax: best_f, iterations: total_iters }
}
