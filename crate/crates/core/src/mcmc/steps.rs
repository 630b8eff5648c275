//! The six conditional updates of the sampler, plus the one-dimensional
//! `σ` update used when `γ` is held at zero.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use super::McmcState;
use crate::error::{GalorError, Result};
use crate::gal::{GammaBounds, MixtureConstants};
use crate::model::{log_likelihood_constants, OrdinalDataset, PreparedPrior};
use crate::random::{
    open_unit, sample_gig_half, sample_half_normal, sample_truncated_normal, standard_normal, Bvn,
    RandomStream, Rectangle2D,
};
use crate::special::log_ndtr;

/// Everything a chain conditions on that does not change between iterations.
#[derive(Debug, Clone)]
pub struct Context<'a> {
    pub data: &'a OrdinalDataset,
    pub prior: PreparedPrior,
    pub bounds: GammaBounds<f64>,
    pub p0: f64,
}

impl<'a> Context<'a> {
    pub fn constants(&self, gamma: f64) -> Result<MixtureConstants<f64>> {
        self.bounds.constants(gamma)
    }

    /// Full (latent-free) log-likelihood at the given parameters.
    pub fn log_likelihood(&self, beta: &DVector<f64>, sigma: f64, gamma: f64, xi: &[f64]) -> f64 {
        if !(sigma > 0.0) {
            return f64::NEG_INFINITY;
        }
        match self.bounds.constants(gamma) {
            Ok(m) => log_likelihood_constants(&(self.data.x() * beta), sigma, &m, xi, self.data.y()),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// Result of a Metropolis–Hastings block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhOutcome {
    pub accepted: bool,
    /// Log-likelihood at the state the block leaves behind.
    pub loglik: f64,
}

fn abort(block: &'static str, reason: impl Into<String>) -> GalorError {
    GalorError::ChainAborted {
        iteration: 0,
        block,
        reason: reason.into(),
    }
}

/// `β | z, ν, h, σ, γ ~ N(β̃, B̃)`.
pub fn draw_beta(ctx: &Context, state: &mut McmcState, rng: &mut RandomStream) -> Result<()> {
    let m = ctx.constants(state.gamma)?;
    let x = ctx.data.x();
    let k = x.ncols();
    let shift = m.c * state.gamma.abs();
    let mut weighted = x.clone();
    let mut resid = DVector::zeros(x.nrows());
    for i in 0..x.nrows() {
        let w = 1.0 / (state.sigma * m.b * state.nu[i]);
        weighted.row_mut(i).scale_mut(w);
        resid[i] = state.z[i] - m.a * state.nu[i] - shift * state.h[i];
    }
    let precision = &ctx.prior.beta.precision + x.transpose() * &weighted;
    let rhs = weighted.transpose() * &resid + &ctx.prior.beta.precision * &ctx.prior.beta.mean;
    let chol = precision
        .cholesky()
        .ok_or_else(|| abort("beta", "posterior precision is not positive definite"))?;
    let mean = chol.solve(&rhs);
    let eps = DVector::from_fn(k, |_, _| standard_normal(&mut **rng));
    // precision = LLᵀ, so Lᵀ⁻¹ε has covariance precision⁻¹
    let offset = chol
        .l()
        .transpose()
        .solve_upper_triangular(&eps)
        .ok_or_else(|| abort("beta", "singular Cholesky factor"))?;
    state.beta = mean + offset;
    Ok(())
}

/// Joint random-walk MH for `(σ, γ)` with a truncated bivariate normal
/// proposal on `(0, ∞) × (L, U)`, marginal of the latent variables.
pub fn draw_sigma_gamma(
    ctx: &Context,
    state: &mut McmcState,
    cov: &Matrix2<f64>,
    rng: &mut RandomStream,
) -> Result<MhOutcome> {
    let xi = state.xi();
    let current_ll = ctx.log_likelihood(&state.beta, state.sigma, state.gamma, &xi);
    let rect = Rectangle2D::new(0.0, f64::INFINITY, ctx.bounds.lower, ctx.bounds.upper)?;
    let here = Vector2::new(state.sigma, state.gamma);
    let forward = Bvn::new(here, *cov).map_err(|e| abort("sigma_gamma", e.to_string()))?;
    let proposal = match forward.sample_truncated(&rect, rng) {
        Ok(p) => p,
        Err(e) => {
            log::warn!("rejecting (sigma, gamma) proposal: {e}");
            return Ok(MhOutcome { accepted: false, loglik: current_ll });
        }
    };
    let backward = Bvn::new(proposal, *cov).map_err(|e| abort("sigma_gamma", e.to_string()))?;
    let mass_here = forward.rectangle_prob(&rect);
    let mass_there = backward.rectangle_prob(&rect);
    if !(mass_there > 1e-300) {
        log::warn!("rejecting (sigma, gamma) proposal: reverse rectangle probability underflows");
        return Ok(MhOutcome { accepted: false, loglik: current_ll });
    }
    let (s_new, g_new) = (proposal[0], proposal[1]);
    let proposed_ll = ctx.log_likelihood(&state.beta, s_new, g_new, &xi);
    let prior = |s: f64, g: f64| ctx.prior.ln_sigma(s) + ctx.prior.ln_gamma(g, &ctx.bounds);
    // the Gaussian kernels are symmetric; only the truncation masses differ
    let log_ratio = proposed_ll + prior(s_new, g_new) - current_ll - prior(state.sigma, state.gamma)
        + mass_here.ln()
        - mass_there.ln();
    if open_unit(&mut **rng).ln() < log_ratio {
        state.sigma = s_new;
        state.gamma = g_new;
        Ok(MhOutcome { accepted: true, loglik: proposed_ll })
    } else {
        Ok(MhOutcome { accepted: false, loglik: current_ll })
    }
}

/// Random-walk MH on `σ` alone (γ held fixed) with a normal proposal
/// truncated to `(0, ∞)`.
pub fn draw_sigma(ctx: &Context, state: &mut McmcState, variance: f64, rng: &mut RandomStream) -> Result<MhOutcome> {
    let xi = state.xi();
    let current_ll = ctx.log_likelihood(&state.beta, state.sigma, state.gamma, &xi);
    let sd = variance.sqrt();
    let s_new = sample_truncated_normal(state.sigma, variance, 0.0, f64::INFINITY, &mut **rng)?;
    let proposed_ll = ctx.log_likelihood(&state.beta, s_new, state.gamma, &xi);
    let log_ratio = proposed_ll + ctx.prior.ln_sigma(s_new) - current_ll - ctx.prior.ln_sigma(state.sigma)
        + log_ndtr(state.sigma / sd)
        - log_ndtr(s_new / sd);
    if open_unit(&mut **rng).ln() < log_ratio {
        state.sigma = s_new;
        Ok(MhOutcome { accepted: true, loglik: proposed_ll })
    } else {
        Ok(MhOutcome { accepted: false, loglik: current_ll })
    }
}

/// `ν_i | z, β, h, σ, γ ~ GIG(½, a_i, b)`.
pub fn draw_nu(ctx: &Context, state: &mut McmcState, rng: &mut RandomStream) -> Result<()> {
    let m = ctx.constants(state.gamma)?;
    let xb = ctx.data.x() * &state.beta;
    let shift = m.c * state.gamma.abs();
    let sb = state.sigma * m.b;
    let b = m.a * m.a / sb + 2.0 / state.sigma;
    for i in 0..state.nu.len() {
        let r = state.z[i] - xb[i] - shift * state.h[i];
        state.nu[i] = sample_gig_half(r * r / sb, b, &mut **rng).map_err(|e| abort("nu", e.to_string()))?;
    }
    Ok(())
}

/// `h_i | z, β, ν, σ, γ ~ N⁺(μ_{h_i}, σ²_{h_i})`.
pub fn draw_h(ctx: &Context, state: &mut McmcState, rng: &mut RandomStream) -> Result<()> {
    let m = ctx.constants(state.gamma)?;
    let shift = m.c * state.gamma.abs();
    if shift == 0.0 {
        let s2 = state.sigma * state.sigma;
        for h in state.h.iter_mut() {
            *h = sample_half_normal(s2, &mut **rng);
        }
        return Ok(());
    }
    let xb = ctx.data.x() * &state.beta;
    for i in 0..state.h.len() {
        let sbn = state.sigma * m.b * state.nu[i];
        let precision = 1.0 / (state.sigma * state.sigma) + shift * shift / sbn;
        let mean = shift * (state.z[i] - xb[i] - m.a * state.nu[i]) / sbn / precision;
        state.h[i] = sample_truncated_normal(mean, 1.0 / precision, 0.0, f64::INFINITY, &mut **rng)
            .map_err(|e| abort("h", e.to_string()))?;
    }
    Ok(())
}

/// Random-walk MH on the cut-point spacings, marginal of the latents.
/// `chol` is a Cholesky factor of the increment covariance `ι²D̂2`.
pub fn draw_delta(
    ctx: &Context,
    state: &mut McmcState,
    chol: &DMatrix<f64>,
    current_ll: f64,
    rng: &mut RandomStream,
) -> Result<MhOutcome> {
    let dim = state.delta.len();
    if dim == 0 {
        return Ok(MhOutcome { accepted: true, loglik: current_ll });
    }
    let eps = DVector::from_fn(dim, |_, _| standard_normal(&mut **rng));
    let proposal = &state.delta + chol * eps;
    let xi = state.xi_with(&proposal);
    let proposed_ll = ctx.log_likelihood(&state.beta, state.sigma, state.gamma, &xi);
    let log_ratio = proposed_ll + ctx.prior.ln_delta(&proposal) - current_ll - ctx.prior.ln_delta(&state.delta);
    if open_unit(&mut **rng).ln() < log_ratio {
        state.delta = proposal;
        Ok(MhOutcome { accepted: true, loglik: proposed_ll })
    } else {
        Ok(MhOutcome { accepted: false, loglik: current_ll })
    }
}

/// `z_i | y, β, ν, h, σ, γ, δ ~ TN_{(ξ_{y_i−1}, ξ_{y_i})}(x'β + Aν + C|γ|h, σBν)`.
pub fn draw_z(ctx: &Context, state: &mut McmcState, rng: &mut RandomStream) -> Result<()> {
    let m = ctx.constants(state.gamma)?;
    let xb = ctx.data.x() * &state.beta;
    let shift = m.c * state.gamma.abs();
    let xi = state.xi();
    for (i, &j) in ctx.data.y().iter().enumerate() {
        let mean = xb[i] + m.a * state.nu[i] + shift * state.h[i];
        let var = state.sigma * m.b * state.nu[i];
        state.z[i] = sample_truncated_normal(mean, var, xi[j - 1], xi[j], &mut **rng)
            .map_err(|e| abort("z", e.to_string()))?;
    }
    Ok(())
}
