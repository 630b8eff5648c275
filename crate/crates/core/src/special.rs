//! Normal-distribution special functions evaluated in log space.

use crate::scalar::Real;

/// Standard normal distribution function.
#[inline]
pub fn norm_cdf<T: Real>(x: T) -> T {
    T::c(0.5) * (-x * T::FRAC_1_SQRT_2()).erfc()
}

/// Standard normal density.
#[inline]
pub fn norm_pdf<T: Real>(x: T) -> T {
    (-(x * x) * T::c(0.5)).exp() / (T::c(2.0) * T::PI()).sqrt()
}

/// `ln Φ(x)`, accurate in both tails.
pub fn log_ndtr<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x > T::c(5.0) {
        (-norm_cdf(-x)).ln_1p()
    } else if x >= T::c(T::TAIL_CUTOFF) {
        norm_cdf(x).ln()
    } else if x == T::neg_infinity() {
        T::neg_infinity()
    } else {
        -(x * x) * T::c(0.5) + mills_tail(-x)
    }
}

/// `x²/2 + ln Φ(−x)`: the log of `Φ(−x)·exp(x²/2)`, finite for every finite `x`.
pub fn log_mills<T: Real>(x: T) -> T {
    if x <= -T::c(T::TAIL_CUTOFF) {
        x * x * T::c(0.5) + log_ndtr(-x)
    } else {
        mills_tail(x)
    }
}

// Asymptotic expansion of ln(Φ(−x) e^{x²/2}) for large positive x.
fn mills_tail<T: Real>(x: T) -> T {
    let inv2 = (x * x).recip();
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..=12 {
        term = -term * T::c((2 * k - 1) as f64) * inv2;
        sum = sum + term;
    }
    -x.ln() - T::c(0.5) * (T::c(2.0) * T::PI()).ln() + sum.ln()
}

/// `ln(1 − e^a)` for `a ≤ 0`.
#[inline]
pub fn log1mexp<T: Real>(a: T) -> T {
    if a > -T::LN_2() {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// `ln(e^a + e^b)`.
#[inline]
pub fn logaddexp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(Φ(b) − Φ(a))` for `a ≤ b`, choosing the tail that avoids cancellation.
pub fn log_ndtr_diff<T: Real>(a: T, b: T) -> T {
    if a >= b {
        return T::neg_infinity();
    }
    if a >= T::zero() {
        let hi = log_ndtr(-a);
        hi + log1mexp((log_ndtr(-b) - hi).min(T::zero()))
    } else if b <= T::zero() {
        let hi = log_ndtr(b);
        hi + log1mexp((log_ndtr(a) - hi).min(T::zero()))
    } else {
        (-(norm_cdf(a) + norm_cdf(-b))).ln_1p()
    }
}

/// Standard normal quantile function.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}
