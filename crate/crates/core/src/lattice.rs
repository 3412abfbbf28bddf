//! Finite square/cubic boxes with a frozen uniform boundary ring, bit-packed
//! spin configurations, and the integer energy/field bookkeeping everything
//! else builds on.
//!
//! Conventions: spins live in {-1, +1}; the Hamiltonian is
//! H(sigma) = -Sum_{<xy> interior} sigma_x sigma_y - Sum_{<xb> boundary} sigma_x tau
//! with every unordered interior bond counted once and tau the frozen
//! boundary spin. Energies are exact integers.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest site count for which full state enumeration is allowed (2^20
/// Gibbs weights).
pub const ENUMERATION_MAX_SITES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeDomain {
    dim: u32,
    side: usize,
    boundary: i8,
    sites: usize,
    /// 2*dim neighbor slots per site; -1 marks the frozen boundary.
    neighbors: Vec<[i32; 6]>,
}

impl LatticeDomain {
    pub fn new(dim: u32, side: usize, boundary: i8) -> Arc<Self> {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        assert!(side >= 1, "side must be positive");
        assert!(boundary == 1 || boundary == -1, "boundary spin must be +1 or -1");
        let sites = side.pow(dim);
        assert!(sites <= i32::MAX as usize, "lattice too large to index");

        let strides: [usize; 3] = [1, side, side * side];
        let mut neighbors = vec![[-1i32; 6]; sites];
        for site in 0..sites {
            let mut rest = site;
            let mut slot = 0;
            for axis in 0..dim as usize {
                let coord = rest % side;
                rest /= side;
                let stride = strides[axis];
                neighbors[site][slot] =
                    if coord + 1 < side { (site + stride) as i32 } else { -1 };
                neighbors[site][slot + 1] =
                    if coord > 0 { (site - stride) as i32 } else { -1 };
                slot += 2;
            }
        }
        Arc::new(Self { dim, side, boundary, sites, neighbors })
    }

    /// Plus boundary condition, the default phase studied here.
    pub fn plus_boundary(dim: u32, side: usize) -> Arc<Self> {
        Self::new(dim, side, 1)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn boundary_spin(&self) -> i8 {
        self.boundary
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn degree(&self) -> usize {
        2 * self.dim as usize
    }

    /// Neighbor slots of `site`: interior index, or -1 for the boundary ring.
    #[inline]
    pub fn neighbor_slots(&self, site: usize) -> &[i32] {
        &self.neighbors[site][..self.degree()]
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        assert_eq!(coords.len(), self.dim as usize);
        let mut idx = 0;
        for &c in coords.iter().rev() {
            assert!(c < self.side, "coordinate out of range");
            idx = idx * self.side + c;
        }
        idx
    }

    pub fn coords_of(&self, site: usize) -> [usize; 3] {
        assert!(site < self.sites, "site out of range");
        let mut rest = site;
        let mut out = [0usize; 3];
        for axis in 0..self.dim as usize {
            out[axis] = rest % self.side;
            rest /= self.side;
        }
        out
    }

    /// Site at the geometric center (lower-rounded on even sides).
    pub fn center_site(&self) -> usize {
        let mid = (self.side - 1) / 2;
        let coords = [mid; 3];
        self.index_of(&coords[..self.dim as usize])
    }

    pub fn enumeration_guard(&self, limit: usize) -> Result<()> {
        if self.sites > limit {
            Err(Error::DomainTooLarge { sites: self.sites, limit })
        } else {
            Ok(())
        }
    }
}

/// Spin configuration packed one bit per site (bit set means spin +1).
/// Bits at indices >= sites stay zero so popcounts are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    domain: Arc<LatticeDomain>,
    words: Vec<u64>,
}

impl SpinConfig {
    pub fn filled(domain: &Arc<LatticeDomain>, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1);
        let n = domain.sites();
        let n_words = n.div_ceil(64);
        let mut words = vec![if spin == 1 { u64::MAX } else { 0 }; n_words];
        if spin == 1 {
            Self::mask_tail(&mut words, n);
        }
        Self { domain: Arc::clone(domain), words }
    }

    pub fn all_plus(domain: &Arc<LatticeDomain>) -> Self {
        Self::filled(domain, 1)
    }

    pub fn all_minus(domain: &Arc<LatticeDomain>) -> Self {
        Self::filled(domain, -1)
    }

    pub fn random(domain: &Arc<LatticeDomain>, rng: &mut impl rand::Rng) -> Self {
        let n = domain.sites();
        let n_words = n.div_ceil(64);
        let mut words: Vec<u64> = (0..n_words).map(|_| rng.gen()).collect();
        Self::mask_tail(&mut words, n);
        Self { domain: Arc::clone(domain), words }
    }

    /// Decodes a packed state index: bit i of `index` is the spin at site i.
    /// Only meaningful for enumerable domains.
    pub fn from_packed(domain: &Arc<LatticeDomain>, index: usize) -> Self {
        assert!(domain.sites() <= ENUMERATION_MAX_SITES);
        let mut words = vec![0u64; domain.sites().div_ceil(64)];
        words[0] = index as u64;
        Self { domain: Arc::clone(domain), words }
    }

    pub fn packed_index(&self) -> usize {
        assert!(self.domain.sites() <= ENUMERATION_MAX_SITES);
        self.words[0] as usize
    }

    fn mask_tail(words: &mut [u64], n: usize) {
        let rem = n % 64;
        if rem != 0 {
            *words.last_mut().unwrap() &= (1u64 << rem) - 1;
        }
    }

    pub fn domain(&self) -> &Arc<LatticeDomain> {
        &self.domain
    }

    #[inline]
    pub fn spin(&self, site: usize) -> i8 {
        debug_assert!(site < self.domain.sites(), "site out of range");
        let bit = (self.words[site >> 6] >> (site & 63)) & 1;
        (2 * bit as i8) - 1
    }

    #[inline]
    pub fn flip(&mut self, site: usize) {
        debug_assert!(site < self.domain.sites(), "site out of range");
        self.words[site >> 6] ^= 1u64 << (site & 63);
    }

    #[inline]
    pub fn set(&mut self, site: usize, spin: i8) {
        debug_assert!(spin == 1 || spin == -1);
        let word = &mut self.words[site >> 6];
        let mask = 1u64 << (site & 63);
        if spin == 1 {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    /// Sum of all spins, exactly.
    pub fn magnetization_sum(&self) -> i64 {
        let plus: u32 = self.words.iter().map(|w| w.count_ones()).sum();
        2 * plus as i64 - self.domain.sites() as i64
    }

    /// Sum over the 2d neighbor slots of `site`, with the frozen boundary
    /// spin filling slots outside the box.
    #[inline]
    pub fn local_field(&self, site: usize) -> i32 {
        assert!(site < self.domain.sites(), "site out of range");
        let boundary = self.domain.boundary_spin() as i32;
        let mut field = 0i32;
        for &nbr in self.domain.neighbor_slots(site) {
            field += if nbr >= 0 { self.spin(nbr as usize) as i32 } else { boundary };
        }
        field
    }

    /// Integer Hamiltonian with unordered interior bonds counted once and
    /// every box-boundary bond included.
    pub fn energy(&self) -> i64 {
        let domain = &self.domain;
        let side = domain.side();
        let boundary = domain.boundary_spin() as i64;
        let strides: [usize; 3] = [1, side, side * side];
        let mut interior = 0i64;
        let mut edge = 0i64;
        for site in 0..domain.sites() {
            let s = self.spin(site) as i64;
            let mut rest = site;
            for axis in 0..domain.dim() as usize {
                let coord = rest % side;
                rest /= side;
                if coord + 1 < side {
                    interior += s * self.spin(site + strides[axis]) as i64;
                } else {
                    edge += s * boundary;
                }
                if coord == 0 {
                    edge += s * boundary;
                }
            }
        }
        -(interior + edge)
    }

    /// True sitewise partial order: self(x) <= other(x) everywhere.
    pub fn dominated_by(&self, other: &SpinConfig) -> bool {
        debug_assert_eq!(self.domain, other.domain);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn count_disagreements(&self, other: &SpinConfig) -> usize {
        debug_assert_eq!(self.domain, other.domain);
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn single_site_energies_against_plus_boundary() {
        let domain = LatticeDomain::plus_boundary(2, 1);
        let plus = SpinConfig::all_plus(&domain);
        let minus = SpinConfig::all_minus(&domain);
        // One site, four boundary bonds.
        assert_eq!(plus.energy(), -4);
        assert_eq!(minus.energy(), 4);
        assert_eq!(plus.local_field(0), 4);
        assert_eq!(minus.local_field(0), 4);
    }

    #[test]
    fn two_by_two_all_plus_energy() {
        let domain = LatticeDomain::plus_boundary(2, 2);
        let plus = SpinConfig::all_plus(&domain);
        // 4 interior bonds + 8 boundary bonds, all satisfied.
        assert_eq!(plus.energy(), -12);
    }

    #[test]
    fn local_field_examples() {
        let d3 = LatticeDomain::plus_boundary(2, 3);
        let minus = SpinConfig::all_minus(&d3);
        assert_eq!(minus.local_field(d3.center_site()), -4);
        let plus = SpinConfig::all_plus(&d3);
        assert_eq!(plus.local_field(0), 4);

        let cube = LatticeDomain::plus_boundary(3, 3);
        let m3 = SpinConfig::all_minus(&cube);
        assert_eq!(m3.local_field(cube.center_site()), -6);
        assert_eq!(SpinConfig::all_plus(&cube).local_field(0), 6);
    }

    #[test]
    fn minus_boundary_flips_edge_terms() {
        let domain = LatticeDomain::new(2, 2, -1);
        let plus = SpinConfig::all_plus(&domain);
        // 4 interior satisfied, 8 boundary violated.
        assert_eq!(plus.energy(), -4 + 8);
        assert_eq!(plus.local_field(0), 0);
    }

    fn flip_identity_holds(cfg: &SpinConfig, site: usize) -> bool {
        let mut flipped = cfg.clone();
        flipped.flip(site);
        let delta = flipped.energy() - cfg.energy();
        delta == 2 * cfg.spin(site) as i64 * cfg.local_field(site) as i64
    }

    #[test]
    fn flip_energy_identity_exhaustive_3x3() {
        let domain = LatticeDomain::plus_boundary(2, 3);
        for index in 0..1usize << 9 {
            let cfg = SpinConfig::from_packed(&domain, index);
            for site in 0..9 {
                assert!(flip_identity_holds(&cfg, site), "state {index} site {site}");
            }
        }
    }

    #[test]
    fn flip_energy_identity_random_larger_boxes() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(21);
        for domain in [LatticeDomain::plus_boundary(2, 8), LatticeDomain::new(3, 4, -1)] {
            for _ in 0..50 {
                let cfg = SpinConfig::random(&domain, &mut rng);
                for _ in 0..20 {
                    let site = rand::Rng::gen_range(&mut rng, 0..domain.sites());
                    assert!(flip_identity_holds(&cfg, site));
                }
            }
        }
    }

    #[test]
    fn packing_round_trips_and_counts() {
        let domain = LatticeDomain::plus_boundary(2, 3);
        for index in [0usize, 1, 0b101010101, 511] {
            let cfg = SpinConfig::from_packed(&domain, index);
            assert_eq!(cfg.packed_index(), index);
            let plus = index.count_ones() as i64;
            assert_eq!(cfg.magnetization_sum(), 2 * plus - 9);
        }
        let big = LatticeDomain::plus_boundary(3, 5);
        let m = SpinConfig::all_minus(&big);
        assert_eq!(m.magnetization_sum(), -125);
        let p = SpinConfig::all_plus(&big);
        assert_eq!(p.magnetization_sum(), 125);
    }

    #[test]
    fn domination_order() {
        let domain = LatticeDomain::plus_boundary(2, 4);
        let mut lo = SpinConfig::all_minus(&domain);
        let hi = SpinConfig::all_plus(&domain);
        assert!(lo.dominated_by(&hi));
        assert!(!hi.dominated_by(&lo));
        lo.set(5, 1);
        assert!(lo.dominated_by(&hi));
        assert_eq!(lo.count_disagreements(&hi), 15);
        let mut hi2 = hi.clone();
        hi2.set(5, -1);
        assert!(!lo.dominated_by(&hi2), "+1 over -1 at site 5 must break the order");
    }
}
