//! Dense symmetric matrices and Householder reduction to tridiagonal form.
//!
//! Exact lattice generators live on at most 2^12 states, where a plain
//! O(n^3) reduction followed by bisection on the tridiagonal factor is
//! entirely adequate. Eigenvectors are never needed, so the orthogonal
//! factor is not accumulated.

use super::real::Real;
use super::tridiag::SymTridiag;

#[derive(Debug, Clone)]
pub struct SymMatrix<R> {
    n: usize,
    a: Vec<R>,
}

impl<R: Real> SymMatrix<R> {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "empty matrix");
        Self { n, a: vec![R::zero(); n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> R {
        self.a[i * self.n + j]
    }

    /// Sets both (i, j) and (j, i).
    pub fn set_sym(&mut self, i: usize, j: usize, v: R) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    pub fn add_sym(&mut self, i: usize, j: usize, v: R) {
        self.a[i * self.n + j] += v;
        if i != j {
            self.a[j * self.n + i] += v;
        }
    }

    /// Householder similarity reduction to a symmetric tridiagonal matrix
    /// with the same spectrum.
    pub fn tridiagonalize(mut self) -> SymTridiag<R> {
        let n = self.n;
        for k in 0..n.saturating_sub(2) {
            // Householder vector for column k below the diagonal, v[k+1] = 1.
            let x0 = self.at(k + 1, k);
            let mut sigma = R::zero();
            for i in k + 2..n {
                let xi = self.at(i, k);
                sigma += xi * xi;
            }
            if sigma == R::zero() {
                continue;
            }
            let mu = (x0 * x0 + sigma).sqrt();
            let v0 = if x0 <= R::zero() { x0 - mu } else { -sigma / (x0 + mu) };
            let beta = R::two() * v0 * v0 / (sigma + v0 * v0);
            let mut v = vec![R::zero(); n];
            v[k + 1] = R::one();
            for i in k + 2..n {
                v[i] = self.at(i, k) / v0;
            }

            // New subdiagonal entry: first component of (I - beta v v^T) x.
            let vtx = x0 + sigma / v0;
            let alpha = x0 - beta * vtx;
            self.set_sym(k + 1, k, alpha);
            for i in k + 2..n {
                self.set_sym(i, k, R::zero());
            }

            // Symmetric rank-two update of the trailing block:
            // A <- A - v w^T - w v^T with w = p - (beta/2)(p^T v) v, p = beta A v.
            let mut p = vec![R::zero(); n];
            for i in k + 1..n {
                let mut s = R::zero();
                for j in k + 1..n {
                    s += self.at(i, j) * v[j];
                }
                p[i] = beta * s;
            }
            let mut ptv = R::zero();
            for i in k + 1..n {
                ptv += p[i] * v[i];
            }
            let scale = beta * ptv * R::half();
            for i in k + 1..n {
                let wi = p[i] - scale * v[i];
                for j in k + 1..=i {
                    let wj = p[j] - scale * v[j];
                    let delta = v[i] * wj + wi * v[j];
                    let val = self.at(i, j) - delta;
                    self.set_sym(i, j, val);
                }
            }
        }

        let diag = (0..n).map(|i| self.at(i, i)).collect();
        let off = (0..n - 1).map(|i| self.at(i + 1, i)).collect();
        SymTridiag::new(diag, off)
    }

    /// The `m` smallest eigenvalues in ascending order.
    pub fn smallest_eigenvalues(self, m: usize) -> Vec<R> {
        self.tridiagonalize().smallest(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_sym(n: usize, rng: &mut impl Rng) -> (SymMatrix<f64>, nalgebra::DMatrix<f64>) {
        let mut m = SymMatrix::zeros(n);
        let mut d = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-2.0..2.0);
                m.set_sym(i, j, v);
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        (m, d)
    }

    #[test]
    fn spectrum_matches_dense_oracle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for trial in 0..12 {
            let n = rng.gen_range(1..48);
            let (m, d) = random_sym(n, &mut rng);
            let mut oracle: Vec<f64> = d.symmetric_eigen().eigenvalues.iter().copied().collect();
            oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let tri = m.tridiagonalize();
            for (k, expect) in oracle.iter().enumerate() {
                let got = tri.eigenvalue(k);
                assert!(
                    (got - expect).abs() < 1e-9 * (1.0 + expect.abs()),
                    "trial {trial} n={n} k={k}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn already_tridiagonal_input_is_preserved_spectrally() {
        let mut m = SymMatrix::zeros(4);
        for i in 0..4 {
            m.set_sym(i, i, 2.0);
        }
        for i in 0..3 {
            m.set_sym(i + 1, i, -1.0);
        }
        let eig = m.smallest_eigenvalues(4);
        for (k, got) in eig.iter().enumerate() {
            let expect = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / 5.0).cos();
            assert!((got - expect).abs() < 1e-11);
        }
    }

    #[test]
    fn f32_smoke() {
        let mut m = SymMatrix::<f32>::zeros(3);
        m.set_sym(0, 0, 2.0);
        m.set_sym(1, 1, 2.0);
        m.set_sym(2, 2, 2.0);
        m.set_sym(1, 0, 1.0);
        m.set_sym(2, 1, 1.0);
        m.set_sym(2, 0, 1.0);
        // Circulant 2 + 2 cos: eigenvalues 4, 1, 1.
        let eig = m.smallest_eigenvalues(3);
        assert!((eig[0] - 1.0).abs() < 1e-4);
        assert!((eig[1] - 1.0).abs() < 1e-4);
        assert!((eig[2] - 4.0).abs() < 1e-4);
    }
}
