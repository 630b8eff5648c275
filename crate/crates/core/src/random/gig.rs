use rand::Rng;

use super::{open_unit, standard_normal};
use crate::error::{domain, Result};

const A_FLOOR: f64 = 1e-300;

/// Draw from GIG(½, a, b), density `∝ ν^{−1/2} exp{−½(a/ν + bν)}`.
///
/// `1/ν` is inverse Gaussian with mean `√(b/a)` and shape `b`, sampled with the
/// Michael–Schucany–Haas transformation. The root is written in a
/// cancellation-free form so very small `a` stays accurate. `a = 0` is floored
/// at `1e-300`.
pub fn sample_gig_half<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(a >= 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(domain(format!("GIG(1/2, a, b) needs a >= 0 and b > 0, got ({a}, {b})")));
    }
    let a = a.max(A_FLOOR);
    let n = standard_normal(rng);
    let r = n * n / (2.0 * (a * b).sqrt());
    let t = 1.0 + r + (r * (r + 2.0)).sqrt();
    let scale = (a / b).sqrt();
    if open_unit(rng) * (1.0 + t) <= t {
        Ok(scale * t)
    } else {
        Ok(scale / t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::RandomStream;

    fn mean(a: f64, b: f64, n: usize) -> f64 {
        let mut rng = RandomStream::new(17, 0);
        (0..n).map(|_| sample_gig_half(a, b, &mut rng).unwrap()).sum::<f64>() / n as f64
    }

    #[test]
    fn bessel_mean() {
        // E = √(a/b)(1 + 1/√(ab))
        assert!((mean(1.0, 1.0, 200_000) / 2.0 - 1.0).abs() < 0.01);
        assert!((mean(4.0, 1.0, 200_000) / 3.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_a_is_floored() {
        let mut rng = RandomStream::new(1, 0);
        for _ in 0..1000 {
            let v = sample_gig_half(0.0, 2.0, &mut rng).unwrap();
            assert!(v > 0.0 && v.is_finite());
        }
    }

    #[test]
    fn invalid_arguments() {
        let mut rng = RandomStream::new(1, 0);
        assert!(sample_gig_half(-1.0, 1.0, &mut rng).is_err());
        assert!(sample_gig_half(1.0, 0.0, &mut rng).is_err());
    }
}
