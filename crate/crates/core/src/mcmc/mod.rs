//! Gibbs / Metropolis–Hastings samplers for the GAL (FBQROR) and asymmetric
//! Laplace (BQROR) ordinal quantile models.
//!
//! Each iteration runs, in order: `β`; `(σ, γ)` (marginal MH); `ν`; `h`;
//! `δ` (marginal MH); `z`. BQROR fixes `γ = 0`, drops `h` and updates `σ`
//! with a one-dimensional MH step.
//!
//! [`LatentUpdate::Blocked`] instead runs `β`; `(σ, γ)`; `δ`; then redraws
//! `(z, ν, h)` jointly from their full conditional. Because the two MH
//! blocks are marginal of the latents, only this ordering leaves the
//! posterior exactly invariant; the sequential order carries a small bias.

mod diagnostics;
mod latent;
mod proposal;
mod steps;

pub use diagnostics::inefficiency_factor;
pub use latent::{draw_latents_joint, sample_h_given_residual, sample_truncated_gal};
pub use proposal::{estimate_proposal_covariances, ProposalCovariances, ProposalEstimate};
pub use steps::{
    draw_beta, draw_delta, draw_h, draw_nu, draw_sigma, draw_sigma_gamma, draw_z, Context, MhOutcome,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{GalorError, Result};
use crate::gal::GammaBounds;
use crate::model::{CutpointSpec, OrdinalDataset, PriorConfig};
use crate::random::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// GAL errors with free shape `γ`.
    Fbqror,
    /// Asymmetric Laplace errors (`γ ≡ 0`).
    Bqror,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Fbqror => "fbqror",
            ModelKind::Bqror => "bqror",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = GalorError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fbqror" => Ok(ModelKind::Fbqror),
            "bqror" => Ok(ModelKind::Bqror),
            other => Err(GalorError::Config(format!("unknown model `{other}` (expected fbqror or bqror)"))),
        }
    }
}

/// How the latent variables are refreshed each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LatentUpdate {
    /// `β; (σ, γ); ν; h; δ; z`, each latent from its own conditional.
    #[default]
    Sequential,
    /// `β; (σ, γ); δ; (z, ν, h)` with the latents drawn jointly.
    Blocked,
}

impl LatentUpdate {
    pub fn as_str(&self) -> &'static str {
        match self {
            LatentUpdate::Sequential => "sequential",
            LatentUpdate::Blocked => "blocked",
        }
    }
}

impl fmt::Display for LatentUpdate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LatentUpdate {
    type Err = GalorError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sequential" => Ok(LatentUpdate::Sequential),
            "blocked" => Ok(LatentUpdate::Blocked),
            other => Err(GalorError::Config(format!(
                "unknown latent update `{other}` (expected sequential or blocked)"
            ))),
        }
    }
}

/// Published step-scale choices `(ι1², ι2²)` at the quantiles 0.25, 0.5, 0.75.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TuningPreset {
    #[default]
    Study1,
    Study2,
    Application,
}

impl TuningPreset {
    fn squares(&self) -> ([f64; 3], [f64; 3]) {
        match self {
            TuningPreset::Study1 => ([1.7, 2.25, 2.0], [4.0, 3.2, 2.5]),
            TuningPreset::Study2 => ([0.3, 0.7, 1.45], [3.25, 3.1, 2.75]),
            TuningPreset::Application => ([3.0, 2.4, 4.4], [1.0, 1.0, 1.0]),
        }
    }

    /// `(ι1, ι2)` at the listed quantile closest to `p0`.
    pub fn iota(&self, p0: f64) -> (f64, f64) {
        let idx = [0.25, 0.5, 0.75]
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - p0).abs().total_cmp(&(b.1 - p0).abs()))
            .map_or(1, |(i, _)| i);
        let (a, b) = self.squares();
        (a[idx].sqrt(), b[idx].sqrt())
    }
}

impl FromStr for TuningPreset {
    type Err = GalorError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "study1" => Ok(TuningPreset::Study1),
            "study2" => Ok(TuningPreset::Study2),
            "application" => Ok(TuningPreset::Application),
            other => Err(GalorError::Config(format!(
                "unknown tuning preset `{other}` (expected study1, study2 or application)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningConfig {
    /// Step scale for the `(σ, γ)` proposal.
    pub iota1: f64,
    /// Step scale for the `δ` proposal.
    pub iota2: f64,
    pub draws: usize,
    pub burnin: usize,
    pub seed: u64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            iota1: 2.0f64.sqrt(),
            iota2: 2.5f64.sqrt(),
            draws: 15_000,
            burnin: 5_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub quantile: f64,
    pub priors: PriorConfig,
    /// Fixed second cut-point `c`.
    pub cut2: f64,
    pub model: ModelKind,
    /// Hold `γ` at zero while otherwise running the GAL sampler.
    pub lock_gamma: bool,
    pub tuning: TuningConfig,
    /// Skip the curvature estimate and use these proposal shapes.
    pub proposal: Option<ProposalCovariances>,
    pub latent_update: LatentUpdate,
}

impl ModelConfig {
    pub fn new(data: &OrdinalDataset, quantile: f64, cut2: f64, model: ModelKind) -> Self {
        Self {
            quantile,
            priors: PriorConfig::default_for(data.k(), data.categories()),
            cut2,
            model,
            lock_gamma: false,
            tuning: TuningConfig::default(),
            proposal: None,
            latent_update: LatentUpdate::Sequential,
        }
    }

    pub fn free_gamma(&self) -> bool {
        self.model == ModelKind::Fbqror && !self.lock_gamma
    }

    fn validate(&self, data: &OrdinalDataset) -> Result<()> {
        let bad = |m: String| Err(GalorError::Config(m));
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return bad(format!("quantile must lie in (0, 1), got {}", self.quantile));
        }
        if !(self.cut2 > 0.0) || !self.cut2.is_finite() {
            return bad(format!("second cut-point must be positive, got {}", self.cut2));
        }
        let t = &self.tuning;
        if !(t.iota1 > 0.0 && t.iota2 > 0.0) {
            return bad("tuning factors must be positive".into());
        }
        if t.draws == 0 {
            return bad("draws must be positive".into());
        }
        if self.priors.beta0.len() != data.k() || self.priors.delta0.len() != data.categories() - 3 {
            return bad("prior dimensions do not match the data".into());
        }
        if let Some(p) = &self.proposal {
            let d = if self.free_gamma() { 2 } else { 1 };
            let m = data.categories() - 3;
            if p.sigma_gamma.shape() != (d, d) || p.delta.shape() != (m, m) {
                return bad("proposal covariance dimensions do not match the model".into());
            }
        }
        Ok(())
    }
}

/// Current values of every sampled quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcState {
    pub beta: DVector<f64>,
    pub sigma: f64,
    pub gamma: f64,
    pub delta: DVector<f64>,
    pub z: DVector<f64>,
    pub nu: DVector<f64>,
    pub h: DVector<f64>,
    /// Fixed second cut-point.
    pub c: f64,
}

impl McmcState {
    pub fn xi(&self) -> Vec<f64> {
        self.xi_with(&self.delta)
    }

    pub(crate) fn xi_with(&self, delta: &DVector<f64>) -> Vec<f64> {
        CutpointSpec {
            c: self.c,
            delta: delta.clone(),
        }
        .xi()
    }

    /// Starting state: `β` from least squares of `y` on `X`, `σ = 1`, `γ = 0`,
    /// `δ = 0`, `ν = 1`, `h = 0` and `z` drawn inside each category interval.
    pub fn initial(ctx: &Context, c: f64, rng: &mut RandomStream) -> Result<Self> {
        let data = ctx.data;
        let (n, k) = data.x().shape();
        let mut state = Self {
            beta: least_squares(data),
            sigma: 1.0,
            gamma: 0.0,
            delta: DVector::zeros(data.categories() - 3),
            z: DVector::zeros(n),
            nu: DVector::from_element(n, 1.0),
            h: DVector::zeros(n),
            c,
        };
        debug_assert_eq!(state.beta.len(), k);
        draw_z(ctx, &mut state, rng)?;
        Ok(state)
    }

    fn check(&self, ctx: &Context, iteration: usize, block: &'static str) -> Result<()> {
        let finite = self.beta.iter().all(|v| v.is_finite())
            && self.delta.iter().all(|v| v.is_finite())
            && self.z.iter().all(|v| v.is_finite())
            && self.nu.iter().all(|v| *v > 0.0 && v.is_finite())
            && self.h.iter().all(|v| *v >= 0.0 && v.is_finite());
        if !finite || !(self.sigma > 0.0) || !ctx.bounds.contains(self.gamma) && self.gamma != 0.0 {
            return Err(GalorError::ChainAborted {
                iteration,
                block,
                reason: "state left its support or became non-finite".into(),
            });
        }
        Ok(())
    }
}

fn least_squares(data: &OrdinalDataset) -> DVector<f64> {
    let x = data.x();
    let y = DVector::from_iterator(data.n(), data.y().iter().map(|&v| v as f64));
    let xtx = x.transpose() * x;
    match xtx.cholesky() {
        Some(ch) => ch.solve(&(x.transpose() * y)),
        None => DVector::zeros(x.ncols()),
    }
}

/// One retained iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub gamma: f64,
    pub delta: Vec<f64>,
    pub loglik: f64,
}

impl Draw {
    /// Parameters in output order `β, σ, γ, δ`.
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.beta.clone();
        v.push(self.sigma);
        v.push(self.gamma);
        v.extend_from_slice(&self.delta);
        v
    }
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub model: ModelKind,
    pub quantile: f64,
    pub cut2: f64,
    pub lock_gamma: bool,
    pub covariate_names: Vec<String>,
    pub draws: Vec<Draw>,
    /// Acceptance rate of the `(σ, γ)` block (the `σ` block for BQROR).
    pub acceptance_sigma_gamma: f64,
    /// Acceptance rate of the `δ` block; `None` when `J = 3`.
    pub acceptance_delta: Option<f64>,
    /// Batch-means inefficiency factor per free parameter.
    pub inefficiency: Vec<(String, f64)>,
    pub seconds: f64,
    pub proposal: ProposalCovariances,
    pub seed: u64,
}

impl ChainOutput {
    pub fn k(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn delta_len(&self) -> usize {
        self.draws.first().map_or(0, |d| d.delta.len())
    }

    pub fn parameter_names(&self) -> Vec<String> {
        parameter_names(self.k(), self.delta_len())
    }

    /// Draws of parameter `index` in `β, σ, γ, δ` order.
    pub fn series(&self, index: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d.values()[index]).collect()
    }

    pub fn posterior_mean(&self) -> Draw {
        let n = self.draws.len() as f64;
        let mut acc = vec![0.0; self.k() + 2 + self.delta_len()];
        for d in &self.draws {
            for (a, v) in acc.iter_mut().zip(d.values()) {
                *a += v;
            }
        }
        let v: Vec<f64> = acc.iter().map(|a| a / n).collect();
        let k = self.k();
        Draw {
            beta: v[..k].to_vec(),
            sigma: v[k],
            gamma: v[k + 1],
            delta: v[k + 2..].to_vec(),
            loglik: self.draws.iter().map(|d| d.loglik).sum::<f64>() / n,
        }
    }

    pub fn posterior_sd(&self) -> Vec<f64> {
        let mean = self.posterior_mean().values();
        let n = self.draws.len() as f64;
        let mut acc = vec![0.0; mean.len()];
        for d in &self.draws {
            for ((a, v), m) in acc.iter_mut().zip(d.values()).zip(&mean) {
                *a += (v - m).powi(2);
            }
        }
        acc.iter().map(|a| (a / (n - 1.0).max(1.0)).sqrt()).collect()
    }
}

pub fn parameter_names(k: usize, m: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=k).map(|i| format!("beta_{i}")).collect();
    names.push("sigma".into());
    names.push("gamma".into());
    names.extend((1..=m).map(|i| format!("delta_{i}")));
    names
}

/// Runs the sampler selected by `config.model`.
pub fn run_chain(data: &OrdinalDataset, config: &ModelConfig, rng: &mut RandomStream) -> Result<ChainOutput> {
    config.validate(data)?;
    let started = Instant::now();
    let ctx = Context {
        data,
        prior: config.priors.prepare()?,
        bounds: GammaBounds::new(config.quantile)?,
        p0: config.quantile,
    };
    let mut state = McmcState::initial(&ctx, config.cut2, rng)?;
    let free_gamma = config.free_gamma();
    let proposal = match &config.proposal {
        Some(p) => p.clone(),
        None => {
            estimate_proposal_covariances(data, config.quantile, config.cut2, &state.beta, free_gamma, &ctx.prior)?
                .covariances
        }
    };
    let t = &config.tuning;
    let iota1_sq = t.iota1 * t.iota1;
    let sg_cov = if free_gamma {
        Matrix2::from_iterator(proposal.sigma_gamma.iter().map(|v| v * iota1_sq))
    } else {
        Matrix2::zeros()
    };
    let sigma_var = iota1_sq * proposal.sigma_gamma[(0, 0)];
    let delta_chol = delta_factor(&proposal.delta, t.iota2)?;
    let m = state.delta.len();
    let total = t.burnin + t.draws;
    let mut draws = Vec::with_capacity(t.draws);
    let (mut acc_sg, mut acc_delta) = (0usize, 0usize);
    let tag = |e: GalorError, iteration: usize| match e {
        GalorError::ChainAborted { block, reason, .. } => GalorError::ChainAborted { iteration, block, reason },
        other => other,
    };
    for iter in 1..=total {
        draw_beta(&ctx, &mut state, rng).map_err(|e| tag(e, iter))?;
        state.check(&ctx, iter, "beta")?;
        let sg = if free_gamma {
            draw_sigma_gamma(&ctx, &mut state, &sg_cov, rng)
        } else {
            draw_sigma(&ctx, &mut state, sigma_var, rng)
        }
        .map_err(|e| tag(e, iter))?;
        state.check(&ctx, iter, "sigma_gamma")?;
        let with_h = config.model == ModelKind::Fbqror;
        let dl = match config.latent_update {
            LatentUpdate::Sequential => {
                draw_nu(&ctx, &mut state, rng).map_err(|e| tag(e, iter))?;
                state.check(&ctx, iter, "nu")?;
                if with_h {
                    draw_h(&ctx, &mut state, rng).map_err(|e| tag(e, iter))?;
                    state.check(&ctx, iter, "h")?;
                }
                let dl = draw_delta(&ctx, &mut state, &delta_chol, sg.loglik, rng).map_err(|e| tag(e, iter))?;
                state.check(&ctx, iter, "delta")?;
                draw_z(&ctx, &mut state, rng).map_err(|e| tag(e, iter))?;
                state.check(&ctx, iter, "z")?;
                dl
            }
            LatentUpdate::Blocked => {
                let dl = draw_delta(&ctx, &mut state, &delta_chol, sg.loglik, rng).map_err(|e| tag(e, iter))?;
                state.check(&ctx, iter, "delta")?;
                draw_latents_joint(&ctx, &mut state, with_h, &mut **rng).map_err(|e| tag(e, iter))?;
                state.check(&ctx, iter, "latents")?;
                dl
            }
        };
        if iter > t.burnin {
            acc_sg += usize::from(sg.accepted);
            acc_delta += usize::from(dl.accepted);
            draws.push(Draw {
                beta: state.beta.iter().copied().collect(),
                sigma: state.sigma,
                gamma: state.gamma,
                delta: state.delta.iter().copied().collect(),
                loglik: dl.loglik,
            });
        }
        if iter % 5_000 == 0 {
            log::debug!("p0 = {}: iteration {iter}/{total}", config.quantile);
        }
    }
    let kept = t.draws as f64;
    let mut output = ChainOutput {
        model: config.model,
        quantile: config.quantile,
        cut2: config.cut2,
        lock_gamma: config.lock_gamma,
        covariate_names: data.names().to_vec(),
        draws,
        acceptance_sigma_gamma: acc_sg as f64 / kept,
        acceptance_delta: (m > 0).then(|| acc_delta as f64 / kept),
        inefficiency: Vec::new(),
        seconds: 0.0,
        proposal,
        seed: t.seed,
    };
    if output.draws.len() >= 100 {
        let names = output.parameter_names();
        let k = data.k();
        for (idx, name) in names.iter().enumerate() {
            if idx == k + 1 && !free_gamma {
                continue;
            }
            output
                .inefficiency
                .push((name.clone(), inefficiency_factor(&output.series(idx))?));
        }
    }
    output.seconds = started.elapsed().as_secs_f64();
    Ok(output)
}

/// AL-error ordinal quantile regression: the sampler with `γ ≡ 0`.
pub fn run_bqror(data: &OrdinalDataset, config: &ModelConfig, rng: &mut RandomStream) -> Result<ChainOutput> {
    let mut config = config.clone();
    config.model = ModelKind::Bqror;
    run_chain(data, &config, rng)
}

fn delta_factor(cov: &DMatrix<f64>, iota2: f64) -> Result<DMatrix<f64>> {
    if cov.is_empty() {
        return Ok(DMatrix::zeros(0, 0));
    }
    (cov * (iota2 * iota2))
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| GalorError::Config("delta proposal covariance is not positive definite".into()))
}
