//! Least-squares lines and log-log exponent fits for scaling experiments.

use super::real::Real;

/// Two-sided 97.5% Student t quantiles for 1..=30 degrees of freedom;
/// the normal value takes over beyond the table.
const T_975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042,
];

fn t_quantile_975(df: usize) -> f64 {
    if df == 0 {
        f64::INFINITY
    } else if df <= 30 {
        T_975[df - 1]
    } else {
        1.96
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LineFit<R> {
    pub slope: R,
    pub intercept: R,
    pub slope_se: R,
    /// 95% half-width for the slope (Student t on n-2 degrees of freedom).
    pub slope_ci95: R,
    pub residual_rms: R,
    pub points: usize,
}

/// Ordinary least squares for y = intercept + slope * x.
pub fn fit_line<R: Real>(xs: &[R], ys: &[R]) -> LineFit<R> {
    assert_eq!(xs.len(), ys.len(), "mismatched fit inputs");
    let n = xs.len();
    assert!(n >= 2, "need at least two points for a line");
    let nf = R::of_usize(n);
    let mean = |v: &[R]| v.iter().copied().sum::<R>() / nf;
    let xbar = mean(xs);
    let ybar = mean(ys);
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for i in 0..n {
        let dx = xs[i] - xbar;
        sxx += dx * dx;
        sxy += dx * (ys[i] - ybar);
    }
    assert!(sxx > R::zero(), "degenerate abscissae");
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;

    let mut ss_res = R::zero();
    for i in 0..n {
        let r = ys[i] - (intercept + slope * xs[i]);
        ss_res += r * r;
    }
    let (slope_se, residual_rms) = if n > 2 {
        let var = ss_res / R::of_usize(n - 2);
        ((var / sxx).sqrt(), (ss_res / nf).sqrt())
    } else {
        (R::zero(), R::zero())
    };
    let slope_ci95 = slope_se * R::of(t_quantile_975(n.saturating_sub(2)));
    LineFit { slope, intercept, slope_se, slope_ci95, residual_rms, points: n }
}

/// Least-squares exponent of y ~ x^slope on log-log axes. All inputs must be
/// strictly positive.
pub fn fit_log_log<R: Real>(xs: &[R], ys: &[R]) -> LineFit<R> {
    let lx: Vec<R> = xs
        .iter()
        .map(|&x| {
            assert!(x > R::zero(), "log-log fit needs positive x");
            x.ln()
        })
        .collect();
    let ly: Vec<R> = ys
        .iter()
        .map(|&y| {
            assert!(y > R::zero(), "log-log fit needs positive y");
            y.ln()
        })
        .collect();
    fit_line(&lx, &ly)
}
