//! Running moments, batch-means errors, and effective sample size for
//! correlated time series.

use super::real::Real;

/// Point estimate with a standard error. `se = 0` marks exact values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<R> {
    pub value: R,
    pub se: R,
}

impl<R: Real> Estimate<R> {
    pub fn exact(value: R) -> Self {
        Self { value, se: R::zero() }
    }

    /// |value - other.value| measured in combined standard errors.
    pub fn sigmas_from(&self, other: &Estimate<R>) -> R {
        let gap = (self.value - other.value).abs();
        let scale = (self.se * self.se + other.se * other.se).sqrt();
        if scale == R::zero() {
            if gap == R::zero() {
                R::zero()
            } else {
                R::infinity()
            }
        } else {
            gap / scale
        }
    }
}

/// Welford accumulator; `merge` uses the pairwise update so partial streams
/// can be combined without precision loss.
#[derive(Debug, Clone, Copy)]
pub struct RunningMoments<R> {
    n: u64,
    mean: R,
    m2: R,
}

impl<R: Real> Default for RunningMoments<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> RunningMoments<R> {
    pub fn new() -> Self {
        Self { n: 0, mean: R::zero(), m2: R::zero() }
    }

    pub fn push(&mut self, x: R) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / R::of(self.n as f64);
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n1 = R::of(self.n as f64);
        let n2 = R::of(other.n as f64);
        let total = n1 + n2;
        let delta = other.mean - self.mean;
        self.mean += delta * n2 / total;
        self.m2 += other.m2 + delta * delta * n1 * n2 / total;
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> R {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two points.
    pub fn variance(&self) -> R {
        if self.n < 2 {
            R::zero()
        } else {
            self.m2 / R::of((self.n - 1) as f64)
        }
    }

    /// Standard error of the mean under an independence assumption.
    pub fn se_of_mean(&self) -> R {
        if self.n == 0 {
            R::zero()
        } else {
            (self.variance() / R::of(self.n as f64)).sqrt()
        }
    }

    pub fn estimate(&self) -> Estimate<R> {
        Estimate { value: self.mean(), se: self.se_of_mean() }
    }
}

/// Batch-means summary of a correlated series.
#[derive(Debug, Clone, Copy)]
pub struct BatchSummary<R> {
    pub mean: R,
    pub se: R,
    /// Effective sample size: raw sample variance divided by the squared
    /// batch-means standard error. Equals n for white noise, shrinks with
    /// positive autocorrelation. Capped at n.
    pub ess: R,
    pub batches: usize,
    pub samples: usize,
}

impl<R: Real> BatchSummary<R> {
    pub fn estimate(&self) -> Estimate<R> {
        Estimate { value: self.mean, se: self.se }
    }
}

/// Splits `xs` into `batches` equal contiguous batches (a short tail is
/// dropped), and estimates the mean's standard error from the spread of
/// batch means. Falls back to fewer batches when the series is short.
pub fn batch_means<R: Real>(xs: &[R], batches: usize) -> BatchSummary<R> {
    let n = xs.len();
    assert!(n > 0, "empty series");
    if n < 4 {
        let mut all = RunningMoments::new();
        for &x in xs {
            all.push(x);
        }
        return BatchSummary {
            mean: all.mean(),
            se: all.se_of_mean(),
            ess: R::of(n as f64),
            batches: 1,
            samples: n,
        };
    }
    let b = batches.clamp(2, n / 2);
    let len = n / b;
    let mut of_batches = RunningMoments::new();
    let mut raw = RunningMoments::new();
    for k in 0..b {
        let mut m = RunningMoments::new();
        for &x in &xs[k * len..(k + 1) * len] {
            m.push(x);
            raw.push(x);
        }
        of_batches.push(m.mean());
    }
    let se = of_batches.se_of_mean();
    let used = (b * len) as f64;
    let ess = if se == R::zero() {
        R::of(used)
    } else {
        (raw.variance() / (se * se)).min(R::of(used))
    };
    BatchSummary { mean: of_batches.mean(), se, ess, batches: b, samples: b * len }
}
