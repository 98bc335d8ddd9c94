//! Special functions and log-space arithmetic.
//!
//! Gamma and digamma come from `statrs`; the higher polygamma functions and
//! the scaled modified Bessel function of order zero are implemented here
//! because no common crate provides them.

pub use statrs::function::gamma::{digamma, ln_gamma};

/// `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `log(sum(exp(v)))`; `-inf` for an empty slice.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    let s: f64 = v.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    sum: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x.is_nan() || x == f64::INFINITY {
            self.max = f64::INFINITY;
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY || self.max == f64::INFINITY {
            self.max
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `log(1 + exp(x))`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of [`softplus`] for `y > 0`.
#[inline]
pub fn softplus_inv(y: f64) -> f64 {
    if y > 35.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// `log(1 - exp(x))` for `x < 0`.
#[inline]
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `log(x!)` for nonnegative integral `x`.
#[inline]
pub fn ln_factorial(x: f64) -> f64 {
    if x < 2.0 {
        0.0
    } else {
        ln_gamma(x + 1.0)
    }
}

/// `log B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Trigamma function for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0
            + r * (0.5
                + r * (1.0 / 6.0
                    + r2 * (-1.0 / 30.0
                        + r2 * (1.0 / 42.0
                            + r2 * (-1.0 / 30.0 + r2 * (5.0 / 66.0 + r2 * (-691.0 / 2730.0))))))));
    acc + series
}

/// Tetragamma function (second derivative of digamma) for `x > 0`.
pub fn tetragamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 2.0 / (x * x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    let series = -r2
        * (1.0
            + r * (1.0
                + r * (0.5
                    + r * (-1.0 / 6.0 * r
                        + r2 * r * (1.0 / 6.0
                            + r2 * (-3.0 / 10.0 + r2 * (5.0 / 6.0 + r2 * (-691.0 / 210.0))))))));
    acc + series
}

/// `exp(-|t|) I0(t)`, the exponentially scaled modified Bessel function of
/// the first kind of order zero.
pub fn bessel_i0e(t: f64) -> f64 {
    let t = t.abs();
    if t > 40.0 {
        // Asymptotic expansion; terms shrink monotonically well past j = 20.
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..40 {
            let c = (2 * j - 1) as f64;
            term *= c * c / (8.0 * t * j as f64);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * std::f64::consts::PI * t).sqrt()
    } else {
        // Periodic trapezoid rule on [0, pi] converges geometrically.
        let n = 24 + (6.0 * t.sqrt()).ceil() as usize;
        let h = std::f64::consts::PI / n as f64;
        let mut s = 0.5 * (1.0 + (-2.0 * t).exp());
        for j in 1..n {
            s += (t * ((j as f64 * h).cos() - 1.0)).exp();
        }
        s / n as f64
    }
}

/// `log I0(t)`.
pub fn ln_bessel_i0(t: f64) -> f64 {
    t.abs() + bessel_i0e(t).ln()
}
