//! Joint refresh of the latent triple `(z_i, ν_i, h_i)` from its full
//! conditional given the parameters and `y_i`, marginal of the old latents.

use rand::Rng;

use super::steps::Context;
use super::McmcState;
use crate::error::{GalorError, Result};
use crate::gal::{std_ln_interval, std_ln_pdf, MixtureConstants};
use crate::random::{open_unit, sample_gig_half, sample_half_normal, sample_truncated_normal, standard_normal};
use crate::special::{log_ndtr, log_ndtr_diff};

const REJECTION_ATTEMPTS: usize = 8;

fn abort(reason: impl Into<String>) -> GalorError {
    GalorError::ChainAborted {
        iteration: 0,
        block: "latents",
        reason: reason.into(),
    }
}

/// Redraws every `(z_i, ν_i, h_i)` jointly. With `with_h = false` the
/// shift term is absent and `h` stays at zero.
pub fn draw_latents_joint<R: Rng + ?Sized>(
    ctx: &Context,
    state: &mut McmcState,
    with_h: bool,
    rng: &mut R,
) -> Result<()> {
    let m = ctx.constants(state.gamma)?;
    let shift = if with_h { m.c * state.gamma.abs() } else { 0.0 };
    let xb = ctx.data.x() * &state.beta;
    let xi = state.xi();
    let sigma = state.sigma;
    for (i, &j) in ctx.data.y().iter().enumerate() {
        let (lo, hi) = (xi[j - 1], xi[j]);
        let mut accepted = None;
        for _ in 0..REJECTION_ATTEMPTS {
            let nu = -sigma * open_unit(rng).ln();
            let h = if with_h { sample_half_normal(sigma * sigma, rng) } else { 0.0 };
            let z = xb[i] + m.a * nu + shift * h + (sigma * m.b * nu).sqrt() * standard_normal(rng);
            if lo < z && z < hi {
                accepted = Some((z, nu, h));
                break;
            }
        }
        let (z, nu, h) = match accepted {
            Some(t) => t,
            None => {
                let z = sample_truncated_gal(xb[i], sigma, &m, lo, hi, rng)?;
                let eps = z - xb[i];
                let h = if !with_h {
                    0.0
                } else if shift == 0.0 {
                    sample_half_normal(sigma * sigma, rng)
                } else {
                    sample_h_given_residual(eps, sigma, m.p, shift, rng)?
                };
                let r = eps - shift * h;
                let sb = sigma * m.b;
                let nu = sample_gig_half(r * r / sb, m.a * m.a / sb + 2.0 / sigma, rng).map_err(|e| abort(e.to_string()))?;
                (z, nu, h)
            }
        };
        state.z[i] = z;
        state.nu[i] = nu;
        state.h[i] = h;
    }
    Ok(())
}

/// `h | ε` with `ν` integrated out: the half-normal prior times an
/// asymmetric Laplace kernel in `u = ε − αh`, a two-piece truncated normal.
/// The piece with `u ≥ 0` lies below `ε/α` when `α > 0` and above it when
/// `α < 0`.
pub fn sample_h_given_residual<R: Rng + ?Sized>(eps: f64, sigma: f64, p: f64, alpha: f64, rng: &mut R) -> Result<f64> {
    let split = (eps / alpha).max(0.0);
    let (below, above) = ((0.0, split), (split, f64::INFINITY));
    let (pos_range, neg_range) = if alpha > 0.0 { (below, above) } else { (above, below) };
    let pos_mean = p * alpha * sigma;
    let neg_mean = -(1.0 - p) * alpha * sigma;
    let ln_mass = |mean: f64, (lo, hi): (f64, f64)| {
        if hi.is_infinite() {
            log_ndtr(-(lo - mean) / sigma)
        } else {
            log_ndtr_diff((lo - mean) / sigma, (hi - mean) / sigma)
        }
    };
    let ln_pos = 0.5 * (p * alpha).powi(2) - p * eps / sigma + ln_mass(pos_mean, pos_range);
    let ln_neg = 0.5 * ((1.0 - p) * alpha).powi(2) + (1.0 - p) * eps / sigma + ln_mass(neg_mean, neg_range);
    let prob_pos = 1.0 / (1.0 + (ln_neg - ln_pos).exp());
    let (mean, (lo, hi)) = if open_unit(rng) < prob_pos {
        (pos_mean, pos_range)
    } else {
        (neg_mean, neg_range)
    };
    sample_truncated_normal(mean, sigma * sigma, lo, hi, rng).map_err(|e| abort(e.to_string()))
}

/// Inverse-cdf draw from the GAL law with location `mu`, scale `sigma`
/// restricted to `(lo, hi)`.
pub fn sample_truncated_gal<R: Rng + ?Sized>(
    mu: f64,
    sigma: f64,
    m: &MixtureConstants<f64>,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64> {
    let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
    let (p, alpha) = (m.p, m.alpha);
    let total = std_ln_interval(a, b, p, alpha);
    if !total.is_finite() {
        return Err(abort(format!("interval ({lo}, {hi}) has no probability mass")));
    }
    let u = open_unit(rng);
    // Invert from whichever end keeps the target mass at most one half.
    let from_left = u <= 0.5;
    let target = total + if from_left { u.ln() } else { (1.0 - u).ln() };
    // g is increasing in y and crosses zero at the draw.
    let g = |y: f64| {
        if from_left {
            std_ln_interval(a, y, p, alpha) - target
        } else {
            target - std_ln_interval(y, b, p, alpha)
        }
    };
    let (mut left, mut right) = bracket(a, b, &g)?;
    let mut y = if a.is_finite() && b.is_finite() { 0.5 * (a + b) } else { 0.5 * (left + right) };
    for _ in 0..200 {
        let gy = g(y);
        if gy == 0.0 {
            break;
        }
        if gy < 0.0 {
            left = y;
        } else {
            right = y;
        }
        // Newton step on the log scale, falling back to bisection.
        let mass = if from_left {
            std_ln_interval(a, y, p, alpha)
        } else {
            std_ln_interval(y, b, p, alpha)
        };
        let slope = (std_ln_pdf(y, p, alpha) - mass).exp();
        let mut next = y - gy / slope;
        if !(next > left && next < right) || !next.is_finite() {
            next = 0.5 * (left + right);
        }
        if (next - y).abs() <= 1e-12 * (1.0 + y.abs()) || right - left <= 1e-12 * (1.0 + y.abs()) {
            y = next;
            break;
        }
        y = next;
    }
    let z = mu + sigma * y;
    Ok(z.clamp(lo.max(f64::MIN), hi.min(f64::MAX)))
}

fn bracket(a: f64, b: f64, g: &impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let mut left = a;
    let mut right = b;
    if !left.is_finite() {
        let mut step = 1.0;
        left = if b.is_finite() { b - step } else { -step };
        while g(left) > 0.0 {
            step *= 2.0;
            left -= step;
            if step > 1e12 {
                return Err(abort("could not bracket the truncated GAL quantile"));
            }
        }
    }
    if !right.is_finite() {
        let mut step = 1.0;
        right = if a.is_finite() { a + step } else { step };
        while g(right) < 0.0 {
            step *= 2.0;
            right += step;
            if step > 1e12 {
                return Err(abort("could not bracket the truncated GAL quantile"));
            }
        }
    }
    Ok((left, right))
}
