//! Eigenvalues of symmetric tridiagonal matrices by Sturm-count bisection.
//!
//! The birth-death generator symmetrizes to a tridiagonal matrix with up to
//! ~2*10^4 rows, and only its two smallest eigenvalues are ever needed, so a
//! bisection solver beats any dense routine by orders of magnitude. The count
//! function is the standard LDL^T negative-pivot count with the LAPACK-style
//! pivot floor.

use super::real::Real;

#[derive(Debug, Clone)]
pub struct SymTridiag<R> {
    diag: Vec<R>,
    off: Vec<R>,
    pivot_floor: R,
}

impl<R: Real> SymTridiag<R> {
    pub fn new(diag: Vec<R>, off: Vec<R>) -> Self {
        assert!(!diag.is_empty(), "empty matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        let max_off_sq = off
            .iter()
            .map(|b| *b * *b)
            .fold(R::one(), |m, v| if v > m { v } else { m });
        let pivot_floor = R::min_positive_value() * max_off_sq;
        Self { diag, off, pivot_floor }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[R] {
        &self.diag
    }

    pub fn off(&self) -> &[R] {
        &self.off
    }

    /// Number of eigenvalues strictly below `x`, up to the usual tie-breaking
    /// at exact eigenvalues (a zero pivot is forced negative, which counts the
    /// eigenvalue as below; bisection is insensitive to that choice).
    pub fn count_below(&self, x: R) -> usize {
        let mut count = 0usize;
        let mut d = self.diag[0] - x;
        if d.abs() < self.pivot_floor {
            d = -self.pivot_floor;
        }
        if d < R::zero() {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let b = self.off[i - 1];
            d = (self.diag[i] - x) - b * b / d;
            if d.abs() < self.pivot_floor {
                d = -self.pivot_floor;
            }
            if d < R::zero() {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (R, R) {
        let n = self.n();
        let mut lo = R::infinity();
        let mut hi = R::neg_infinity();
        for i in 0..n {
            let mut radius = R::zero();
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// k-th smallest eigenvalue (k = 0 is the smallest).
    pub fn eigenvalue(&self, k: usize) -> R {
        assert!(k < self.n(), "eigenvalue index out of range");
        if self.n() == 1 {
            return self.diag[0];
        }
        let (glo, ghi) = self.gershgorin();
        let span = (ghi - glo).abs().max(glo.abs()).max(ghi.abs()).max(R::one());
        let mut lo = glo - span * R::epsilon();
        let mut hi = ghi + span * R::epsilon();
        // 2^-120 interval shrinkage is past f64 resolution; the tolerance
        // check below exits earlier in practice.
        for _ in 0..200 {
            let mid = (lo + hi) * R::half();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= k + 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            let tol = R::epsilon() * (lo.abs() + hi.abs() + R::min_positive_value());
            if hi - lo <= tol {
                break;
            }
        }
        (lo + hi) * R::half()
    }

    /// The `m` smallest eigenvalues in ascending order.
    pub fn smallest(&self, m: usize) -> Vec<R> {
        (0..m.min(self.n())).map(|k| self.eigenvalue(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> SymTridiag<f64> {
        // Free-boundary path graph Laplacian: eigenvalues 2 - 2 cos(pi k / n).
        let mut diag = vec![2.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        SymTridiag::new(diag, vec![-1.0; n - 1])
    }

    #[test]
    fn path_laplacian_spectrum_is_exact() {
        let n = 57;
        let t = path_laplacian(n);
        for k in 0..n {
            let expect = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos();
            assert!(
                (t.eigenvalue(k) - expect).abs() < 1e-11,
                "k={k}: {} vs {expect}",
                t.eigenvalue(k)
            );
        }
    }

    #[test]
    fn count_below_brackets_known_eigenvalues() {
        let t = path_laplacian(12);
        assert_eq!(t.count_below(-1e-9), 0);
        assert_eq!(t.count_below(1e-9), 1);
        assert_eq!(t.count_below(4.1), 12);
    }

    #[test]
    fn agrees_with_dense_oracle_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for trial in 0..20 {
            let n: usize = rng.gen_range(1..40);
            let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let off: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(-2.0..2.0)).collect();

            let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                dense[(i, i)] = diag[i];
                if i + 1 < n {
                    dense[(i, i + 1)] = off[i];
                    dense[(i + 1, i)] = off[i];
                }
            }
            let mut oracle: Vec<f64> =
                dense.symmetric_eigen().eigenvalues.iter().copied().collect();
            oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());

            let t = SymTridiag::new(diag, off);
            for (k, expect) in oracle.iter().enumerate() {
                let got = t.eigenvalue(k);
                assert!(
                    (got - expect).abs() < 1e-9,
                    "trial {trial} n={n} k={k}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn single_entry_matrix() {
        let t = SymTridiag::new(vec![3.25f64], vec![]);
        assert_eq!(t.eigenvalue(0), 3.25);
    }

    #[test]
    fn f32_smoke() {
        let t = SymTridiag::new(vec![2.0f32, 2.0], vec![-1.0]);
        assert!((t.eigenvalue(0) - 1.0).abs() < 1e-5);
        assert!((t.eigenvalue(1) - 3.0).abs() < 1e-5);
    }
}
