use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::gal::GammaBounds;
use crate::model::{log_likelihood_xb, CutpointSpec, OrdinalDataset, PreparedPrior};
use crate::optim::{hessian, minimize, nearest_spd, BfgsOptions};

const EIGEN_FLOOR: f64 = 1e-8;
const FALLBACK_SCALE: f64 = 0.1;

/// Random-walk proposal shapes `D̂1` (for `(σ, γ)`, or `σ` alone when `γ` is
/// fixed) and `D̂2` (for `δ`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalCovariances {
    pub sigma_gamma: DMatrix<f64>,
    pub delta: DMatrix<f64>,
}

impl ProposalCovariances {
    pub fn fallback(free_gamma: bool, categories: usize) -> Self {
        let d = if free_gamma { 2 } else { 1 };
        let m = categories.saturating_sub(3);
        Self {
            sigma_gamma: DMatrix::identity(d, d) * FALLBACK_SCALE,
            delta: DMatrix::identity(m, m) * FALLBACK_SCALE,
        }
    }
}

/// Joint likelihood maximizer together with the curvature-based proposal
/// covariances.
#[derive(Debug, Clone)]
pub struct ProposalEstimate {
    pub covariances: ProposalCovariances,
    pub beta: DVector<f64>,
    pub sigma: f64,
    pub gamma: f64,
    pub delta: DVector<f64>,
    pub converged: bool,
}

/// Maximizes the log-likelihood jointly over `(β, σ, γ, δ)` starting from
/// `beta_init`, then returns the `(σ, γ)` and `δ` blocks of the negative
/// inverse Hessian at the maximum, symmetrized with eigenvalues floored at
/// `1e-8`.
///
/// Ordinal likelihoods can increase without bound towards `σ → 0` with `γ`
/// at a bound. When the maximizer lands there, or the Hessian is not
/// negative definite, the log-posterior under `prior` is maximized instead.
/// Falls back to `0.1·I` if both fail.
pub fn estimate_proposal_covariances(
    data: &OrdinalDataset,
    p0: f64,
    c: f64,
    beta_init: &DVector<f64>,
    free_gamma: bool,
    prior: &PreparedPrior,
) -> Result<ProposalEstimate> {
    let bounds = GammaBounds::new(p0)?;
    let m = CutpointSpec::initial(c, data.categories())?.delta.len();
    let k = beta_init.len();
    let g_off = usize::from(free_gamma);
    let dim = k + 1 + g_off + m;
    let width = bounds.width();
    let to_gamma = |t: f64| bounds.lower + width / (1.0 + (-t).exp());
    let x = data.x();
    // parameters ordered (β, σ, γ?, δ) in the original coordinates
    let split = |q: &DVector<f64>| {
        let gamma = if free_gamma { q[k + 1] } else { 0.0 };
        let delta = DVector::from_column_slice(&q.as_slice()[k + 1 + g_off..]);
        (gamma, delta)
    };
    let loglik = |q: &DVector<f64>| {
        let (gamma, delta) = split(q);
        let xi = CutpointSpec { c, delta }.xi();
        log_likelihood_xb(&(x * q.rows(0, k)), q[k], gamma, &xi, data.y(), &bounds)
    };
    let log_post = |q: &DVector<f64>| {
        let (gamma, delta) = split(q);
        let beta = q.rows(0, k).into_owned();
        let ln_gamma = if free_gamma { prior.ln_gamma(gamma, &bounds) } else { 0.0 };
        loglik(q) + prior.ln_beta(&beta) + prior.ln_sigma(q[k]) + ln_gamma + prior.ln_delta(&delta)
    };
    let from_free = |t: &DVector<f64>| {
        let mut q = t.clone();
        q[k] = t[k].exp();
        if free_gamma {
            q[k + 1] = to_gamma(t[k + 1]);
        }
        q
    };

    // optimize in unconstrained coordinates (β, ln σ, logit-scaled γ, δ)
    let mut start = DVector::zeros(dim);
    start.rows_mut(0, k).copy_from(beta_init);
    if free_gamma {
        let u = -bounds.lower / width;
        start[k + 1] = (u / (1.0 - u)).ln();
    }
    let curvature = |objective: &dyn Fn(&DVector<f64>) -> f64| {
        let fit = minimize(|t: &DVector<f64>| -objective(&from_free(t)), start.clone(), BfgsOptions::default());
        let q = from_free(&fit.x);
        if !fit.converged || !fit.value.is_finite() {
            return (q, None);
        }
        let room = if free_gamma {
            (q[k + 1] - bounds.lower).min(bounds.upper - q[k + 1])
        } else {
            width
        };
        if q[k] < 1e-6 || room < 1e-6 * width {
            return (q, None);
        }
        let mut steps = vec![1e-4; dim];
        steps[k] = 1e-4 * q[k].min(1.0);
        if free_gamma {
            steps[k + 1] = 1e-4_f64.min(0.25 * room);
        }
        let neg_h = -hessian(&mut |v: &DVector<f64>| objective(v), &q, &steps);
        let inverse = neg_h.clone().cholesky().map(|ch| ch.inverse());
        (q, inverse)
    };

    let (mut q, mut inverse) = curvature(&loglik);
    if inverse.is_none() {
        log::info!("likelihood maximum is degenerate or not strictly concave; using the posterior mode");
        (q, inverse) = curvature(&log_post);
    }
    let estimate = |covariances, converged| ProposalEstimate {
        covariances,
        beta: q.rows(0, k).into_owned(),
        sigma: q[k],
        gamma: if free_gamma { q[k + 1] } else { 0.0 },
        delta: q.rows(k + 1 + g_off, m).into_owned(),
        converged,
    };
    let fallback = || ProposalCovariances::fallback(free_gamma, data.categories());
    let Some(inverse) = inverse else {
        log::warn!("no usable curvature at the likelihood or posterior mode; using 0.1*I proposal covariances");
        return Ok(estimate(fallback(), false));
    };
    let block = |start: usize, len: usize| {
        let b = inverse.view((start, start), (len, len)).into_owned();
        if len == 0 {
            Some(b)
        } else {
            b.iter().all(|v| v.is_finite()).then(|| nearest_spd(&b, EIGEN_FLOOR))
        }
    };
    match (block(k, 1 + g_off), block(k + 1 + g_off, m)) {
        (Some(sigma_gamma), Some(delta)) => Ok(estimate(ProposalCovariances { sigma_gamma, delta }, true)),
        _ => {
            log::warn!("non-finite proposal covariance; using 0.1*I proposal covariances");
            Ok(estimate(fallback(), false))
        }
    }
}
