//! Exact single-spin-flip generators on enumerable boxes and the inverse
//! spectral gap through the mu-symmetrized form.
//!
//! The generator acts as (L f)(sigma) = Sum_x c(sigma, x) (f(sigma^x) - f(sigma)).
//! Conjugating -L by D = diag(sqrt(mu)) gives the symmetric nonnegative
//! matrix whose second-smallest eigenvalue is the spectral gap.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gibbs::{enumerate_gibbs, GibbsSpec};
use crate::lattice::{LatticeDomain, SpinConfig};
use crate::numeric::{Real, SymMatrix};
use crate::rates::RateModel;

/// Dense generators take 4^sites entries; 12 sites is already a 4096^2
/// matrix, and everything beyond that goes through sampling instead.
pub const GENERATOR_MAX_SITES: usize = 12;

/// Eigenvalues below this are treated as a degenerate (disconnected or
/// numerically indistinguishable) spectrum rather than reported as gaps.
pub const DEGENERACY_THRESHOLD: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct DenseGenerator<R> {
    n: usize,
    /// Row-major; off-diagonal (s, t) is the flip rate s -> t, diagonal
    /// entries make rows sum to zero.
    entries: Vec<R>,
}

impl<R: Real> DenseGenerator<R> {
    pub fn states(&self) -> usize {
        self.n
    }

    pub fn at(&self, from: usize, to: usize) -> R {
        self.entries[from * self.n + to]
    }

    pub fn row_sum(&self, from: usize) -> R {
        self.entries[from * self.n..(from + 1) * self.n].iter().copied().sum()
    }
}

/// Builds the full generator matrix for a rate model on an enumerable box.
pub fn exact_generator<R: Real>(
    model: &RateModel<R>,
    domain: &Arc<LatticeDomain>,
) -> Result<DenseGenerator<R>> {
    domain.enumeration_guard(GENERATOR_MAX_SITES)?;
    let sites = domain.sites();
    let n = 1usize << sites;
    let mut entries = vec![R::zero(); n * n];
    for from in 0..n {
        let cfg = SpinConfig::from_packed(domain, from);
        let mut total = R::zero();
        for site in 0..sites {
            let rate = model.flip_rate(&cfg, site);
            let to = from ^ (1usize << site);
            entries[from * n + to] = rate;
            total += rate;
        }
        entries[from * n + from] = -total;
    }
    Ok(DenseGenerator { n, entries })
}

/// Inverse spectral gap 1/lambda_1 of -L, computed from the symmetrized
/// matrix A = D^{1/2} (-L) D^{-1/2}. Entries use the conductance form
/// rate(s->t) sqrt(mu_s / mu_t), evaluated once per unordered pair so A is
/// symmetric to the last bit.
pub fn exact_inverse_gap<R: Real>(model: &RateModel<R>, domain: &Arc<LatticeDomain>) -> Result<R> {
    domain.enumeration_guard(GENERATOR_MAX_SITES)?;
    let table = enumerate_gibbs(&GibbsSpec::new(Arc::clone(domain), model.beta))?;
    let sites = domain.sites();
    let n = 1usize << sites;

    let mut sym = SymMatrix::zeros(n);
    for from in 0..n {
        let cfg = SpinConfig::from_packed(domain, from);
        let mut total = R::zero();
        for site in 0..sites {
            let to = from ^ (1usize << site);
            let rate = model.flip_rate(&cfg, site);
            total += rate;
            if to > from {
                let half_log_ratio =
                    (table.log_prob[from] - table.log_prob[to]) * R::half();
                sym.set_sym(from, to, -(rate * half_log_ratio.exp()));
            }
        }
        sym.add_sym(from, from, total);
    }

    let eigs = sym.smallest_eigenvalues(2);
    let scale = R::of_usize(sites);
    debug_assert!(
        eigs[0].abs() <= R::of(1e-8) * scale,
        "bottom eigenvalue should vanish, got {:?}",
        eigs[0]
    );
    let lambda1 = eigs[1];
    if lambda1 < R::of(DEGENERACY_THRESHOLD) {
        return Err(Error::DegenerateSpectrum {
            lambda1: lambda1.as_f64(),
            threshold: DEGENERACY_THRESHOLD,
        });
    }
    Ok(lambda1.recip())
}
