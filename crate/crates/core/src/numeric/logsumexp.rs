//! Log-space accumulation. Stationary weights like exp(-x^alpha) span
//! thousands of orders of magnitude, so every sum over them runs through
//! these kernels rather than through linear arithmetic.

use super::real::Real;

/// log(e^a + e^b) without overflow.
pub fn log_add_exp<R: Real>(a: R, b: R) -> R {
    if a == R::neg_infinity() {
        return b;
    }
    if b == R::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log(e^a - e^b) for a >= b. Returns -inf when the difference underflows.
pub fn log_sub_exp<R: Real>(a: R, b: R) -> R {
    if b == R::neg_infinity() {
        return a;
    }
    debug_assert!(a >= b, "log_sub_exp needs a >= b, got {a} < {b}");
    if a == b {
        return R::neg_infinity();
    }
    // log(e^a (1 - e^{b-a})) = a + ln(1 - e^{b-a})
    a + (-(b - a).exp()).ln_1p()
}

/// Streaming log-sum-exp with a running maximum, so inputs need not be
/// buffered or pre-scanned.
#[derive(Debug, Clone, Copy)]
pub struct LogSumAcc<R> {
    max: R,
    scaled: R,
}

impl<R: Real> Default for LogSumAcc<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> LogSumAcc<R> {
    pub fn new() -> Self {
        Self { max: R::neg_infinity(), scaled: R::zero() }
    }

    pub fn push(&mut self, x: R) {
        if x == R::neg_infinity() {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + R::one();
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        if other.max == R::neg_infinity() {
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
    }

    /// log of the accumulated sum; -inf when nothing was pushed.
    pub fn log_total(&self) -> R {
        if self.max == R::neg_infinity() {
            R::neg_infinity()
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// log Sum_i e^{x_i} over an iterator.
pub fn log_sum_exp<R: Real>(xs: impl IntoIterator<Item = R>) -> R {
    let mut acc = LogSumAcc::new();
    for x in xs {
        acc.push(x);
    }
    acc.log_total()
}

/// Accumulates Sum_i s_i e^{l_i} with mixed signs as two log-space partial
/// sums. `value_log` reports (sign, log|sum|).
#[derive(Debug, Clone, Copy)]
pub struct SignedLogAcc<R> {
    pos: LogSumAcc<R>,
    neg: LogSumAcc<R>,
}

impl<R: Real> Default for SignedLogAcc<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> SignedLogAcc<R> {
    pub fn new() -> Self {
        Self { pos: LogSumAcc::new(), neg: LogSumAcc::new() }
    }

    pub fn push(&mut self, sign_positive: bool, log_abs: R) {
        if sign_positive {
            self.pos.push(log_abs);
        } else {
            self.neg.push(log_abs);
        }
    }

    pub fn value_log(&self) -> (bool, R) {
        let p = self.pos.log_total();
        let n = self.neg.log_total();
        if p >= n {
            (true, log_sub_exp(p, n))
        } else {
            (false, log_sub_exp(n, p))
        }
    }

    pub fn value(&self) -> R {
        let (positive, log_abs) = self.value_log();
        let mag = log_abs.exp();
        if positive {
            mag
        } else {
            -mag
        }
    }
}
