//! Random-variate generators used by the samplers.
//!
//! Every generator takes a caller-owned `Rng`; [`RandomStream`] is the
//! reproducible ChaCha20 stream the rest of the crate hands around.

mod bvn;
mod gig;
mod truncnorm;

pub use bvn::{bvn_rectangle_prob, btn_log_density, sample_btn, Bvn, Rectangle2D};
pub use gig::sample_gig_half;
pub use truncnorm::{sample_truncated_normal, truncated_normal_mean};

use std::ops::{Deref, DerefMut};

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{domain, Result};
use crate::special::ln_beta;

/// Stream id reserved for data generation.
pub const DATA_STREAM: u64 = 0;
/// Base stream id for MCMC chains; see [`chain_stream`].
pub const CHAIN_STREAM: u64 = 1;
/// Stream id reserved for diagnostics and optimizer restarts.
pub const DIAGNOSTICS_STREAM: u64 = 1 << 32;

/// Stream for the chain at `quantile`: `CHAIN_STREAM + round(10⁶·quantile)`.
/// Depends only on the quantile, so a chain is reproduced whether it runs
/// alone or alongside other quantiles.
pub fn chain_stream(quantile: f64) -> u64 {
    CHAIN_STREAM + (quantile.clamp(0.0, 1.0) * 1e6).round() as u64
}

/// A seeded ChaCha20 generator on an explicit stream.
///
/// Equal `(seed, stream)` pairs give bit-identical sequences; distinct streams
/// of the same seed are independent.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl Deref for RandomStream {
    type Target = ChaCha20Rng;

    fn deref(&self) -> &ChaCha20Rng {
        &self.rng
    }
}

impl DerefMut for RandomStream {
    fn deref_mut(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::Open01)
}

/// `|N(0, scale_sq)|`.
pub fn sample_half_normal<R: Rng + ?Sized>(scale_sq: f64, rng: &mut R) -> f64 {
    (scale_sq.sqrt() * standard_normal(rng)).abs()
}

/// `L + (U − L)·Beta(a, b)`.
pub fn sample_scaled_beta<R: Rng + ?Sized>(
    lower: f64,
    upper: f64,
    a: f64,
    b: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(lower < upper) {
        return Err(domain(format!("scaled beta needs L < U, got ({lower}, {upper})")));
    }
    let beta = Beta::new(a, b).map_err(|e| domain(format!("beta shape: {e}")))?;
    Ok(lower + (upper - lower) * beta.sample(rng))
}

/// Log density of the scaled Beta law on `(L, U)`; `−∞` outside.
pub fn scaled_beta_ln_pdf(x: f64, lower: f64, upper: f64, a: f64, b: f64) -> f64 {
    if !(x > lower && x < upper) {
        return f64::NEG_INFINITY;
    }
    let width = upper - lower;
    let t = (x - lower) / width;
    (a - 1.0) * t.ln() + (b - 1.0) * (-t).ln_1p() - ln_beta(a, b) - width.ln()
}

/// Inverse-gamma draw with density `∝ x^{−shape−1} e^{−scale/x}`.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, 1.0).map_err(|e| domain(format!("inverse gamma shape: {e}")))?;
    Ok(scale / g.sample(rng))
}

pub fn inverse_gamma_ln_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    shape * scale.ln() - crate::special::ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, stream| {
            let mut r = RandomStream::new(seed, stream);
            (0..4).map(|_| r.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5, CHAIN_STREAM), draw(5, CHAIN_STREAM));
        assert_ne!(draw(5, CHAIN_STREAM), draw(5, DATA_STREAM));
        assert_ne!(draw(5, CHAIN_STREAM), draw(6, CHAIN_STREAM));
    }

    #[test]
    fn scaled_beta_density_at_midpoint() {
        // Beta(4,4) density at 1/2 is 7!/(3!3!)/2^6 = 140/64
        let got = scaled_beta_ln_pdf(0.0, -1.5, 1.5, 4.0, 4.0);
        let want = (140.0_f64 / 64.0).ln() - 3.0_f64.ln();
        assert!((got - want).abs() < 1e-12);
        assert_eq!(scaled_beta_ln_pdf(1.5, -1.5, 1.5, 4.0, 4.0), f64::NEG_INFINITY);
    }

    #[test]
    fn inverse_gamma_density_peaks_at_mode() {
        let (shape, scale) = (2.5, 4.0);
        let mode = scale / (shape + 1.0);
        let h = 1e-5;
        let d = (inverse_gamma_ln_pdf(mode + h, shape, scale)
            - inverse_gamma_ln_pdf(mode - h, shape, scale))
            / (2.0 * h);
        assert!(d.abs() < 1e-6);
    }

    #[test]
    fn half_normal_is_nonnegative_with_scaled_mean() {
        let mut rng = RandomStream::new(3, 0);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_half_normal(4.0, &mut rng)).collect();
        assert!(draws.iter().all(|&d| d >= 0.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let want = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        // sd of |N(0,4)| is 2·√(1 − 2/π)
        assert!((mean - want).abs() < 4.0 * 1.2056 / (n as f64).sqrt());
    }
}
