use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::open_unit;
use crate::error::{domain, Result};
use crate::special::{log_mills, norm_cdf, norm_quantile};

// Standardized bounds beyond this switch from inversion to tail rejection.
const INVERSION_LIMIT: f64 = 5.0;

/// Draw from `N(mean, variance)` truncated to the open interval `(lo, hi)`.
///
/// Inversion is used while both standardized bounds sit within ±5 of the
/// bulk; otherwise an exponential-proposal rejection sampler handles the tail,
/// which stays efficient however far out the interval lies.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mean: f64,
    variance: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
        return Err(domain(format!(
            "truncated normal needs finite mean and positive variance, got ({mean}, {variance})"
        )));
    }
    if !(lo < hi) {
        return Err(domain(format!("degenerate truncation interval ({lo}, {hi})")));
    }
    let sd = variance.sqrt();
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    if !(a < b) {
        return Err(domain(format!("truncation interval ({lo}, {hi}) vanishes at scale {sd}")));
    }
    for _ in 0..64 {
        let z = standard_draw(a, b, rng);
        let x = mean + sd * z;
        if x > lo && x < hi {
            return Ok(x);
        }
    }
    // interval narrower than the float spacing around the mean
    Ok(0.5 * (lo.max(-f64::MAX) + hi.min(f64::MAX)))
}

fn standard_draw<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a >= INVERSION_LIMIT {
        upper_tail(a, b, rng)
    } else if b <= -INVERSION_LIMIT {
        -upper_tail(-b, -a, rng)
    } else if a > 0.0 {
        // both bounds on the right: invert the survival function
        let (sa, sb) = (norm_cdf(-a), norm_cdf(-b));
        -norm_quantile(sb + open_unit(rng) * (sa - sb))
    } else {
        let (fa, fb) = (norm_cdf(a), norm_cdf(b));
        norm_quantile(fa + open_unit(rng) * (fb - fa))
    }
}

// Rejection from a translated exponential on [a, b) with a ≥ 5.
fn upper_tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    let width = b - a;
    loop {
        let e = if width.is_finite() {
            // inverse cdf of Exp(λ) truncated to [0, width)
            let u = open_unit(rng);
            -(-u * (-(-lambda * width).exp_m1())).ln_1p() / lambda
        } else {
            let e: f64 = Exp1.sample(rng);
            e / lambda
        };
        let z = a + e;
        let d = z - lambda;
        if open_unit(rng).ln() <= -0.5 * d * d {
            return z;
        }
    }
}

/// Mean of `N(mean, variance)` truncated to `(lo, hi)`.
pub fn truncated_normal_mean(mean: f64, variance: f64, lo: f64, hi: f64) -> f64 {
    let sd = variance.sqrt();
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    // work on the side where the probability mass is small
    if a > 0.0 {
        mean + sd * ratio_upper(a, b)
    } else if b < 0.0 {
        mean - sd * ratio_upper(-b, -a)
    } else {
        let pa = crate::special::norm_pdf(a);
        let pb = crate::special::norm_pdf(b);
        mean + sd * (pa - pb) / (norm_cdf(b) - norm_cdf(a))
    }
}

// (φ(a) − φ(b)) / (Φ(−a) − Φ(−b)) for 0 < a < b, via Mills ratios.
fn ratio_upper(a: f64, b: f64) -> f64 {
    // φ(x)/Φ(−x) = 1/(√(2π)·exp(M(x))) with M(x) = x²/2 + lnΦ(−x)
    let ln_sqrt_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let inv_mills = |x: f64| (-(log_mills(x) + ln_sqrt_2pi)).exp();
    if !b.is_finite() {
        return inv_mills(a);
    }
    // multiply numerator and denominator by 1/φ(a)
    let r = (-0.5 * (b - a) * (b + a)).exp();
    let tail_a = (log_mills(a) + ln_sqrt_2pi).exp();
    let tail_b = (log_mills(b) + ln_sqrt_2pi).exp() * r;
    (1.0 - r) / (tail_a - tail_b)
}
