//! Post-chain analysis: plug-in log-likelihood, information criteria,
//! model comparison and covariate effects.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{GalorError, Result};
use crate::gal::{GammaBounds, QuantileGalParams};
use crate::mcmc::{ChainOutput, ModelKind};
use crate::model::{log_likelihood, probabilities_for, CutpointSpec, OrdinalDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub model: ModelKind,
    pub quantile: f64,
    pub lock_gamma: bool,
    pub parameter_names: Vec<String>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    /// Inefficiency factors matched to `parameter_names`; `None` for fixed parameters.
    pub inefficiency: Vec<Option<f64>>,
    /// Log-likelihood at the posterior means.
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub k_params: usize,
    pub n: usize,
}

/// `(AIC, BIC) = (−2 lnL + 2k, −2 lnL + k ln n)`.
pub fn information_criteria(loglik: f64, k_params: usize, n: usize) -> (f64, f64) {
    let k = k_params as f64;
    (-2.0 * loglik + 2.0 * k, -2.0 * loglik + k * (n as f64).ln())
}

/// Free parameters: `β`, `σ`, `γ` (FBQROR with free `γ` only) and `δ`.
pub fn parameter_count(k: usize, categories: usize, free_gamma: bool) -> usize {
    k + 1 + usize::from(free_gamma) + categories - 3
}

pub fn fit_summary(chain: &ChainOutput, data: &OrdinalDataset) -> Result<FitSummary> {
    if chain.draws.is_empty() {
        return Err(GalorError::Data("chain has no draws".into()));
    }
    if chain.k() != data.k() || chain.delta_len() + 3 != data.categories() {
        return Err(GalorError::Dimension("chain and data dimensions differ".into()));
    }
    let pm = chain.posterior_mean();
    let spec = CutpointSpec::new(chain.cut2, DVector::from_column_slice(&pm.delta))?;
    let loglik = log_likelihood(
        &DVector::from_column_slice(&pm.beta),
        pm.sigma,
        pm.gamma,
        &spec,
        data,
        chain.quantile,
    )?;
    let free_gamma = chain.model == ModelKind::Fbqror && !chain.lock_gamma;
    let k_params = parameter_count(data.k(), data.categories(), free_gamma);
    let (aic, bic) = information_criteria(loglik, k_params, data.n());
    let names = chain.parameter_names();
    let inefficiency = names
        .iter()
        .map(|n| {
            chain
                .inefficiency
                .iter()
                .find(|(m, _)| m == n)
                .map(|(_, v)| *v)
        })
        .collect();
    Ok(FitSummary {
        model: chain.model,
        quantile: chain.quantile,
        lock_gamma: chain.lock_gamma,
        parameter_names: names,
        mean: pm.values(),
        sd: chain.posterior_sd(),
        inefficiency,
        loglik,
        aic,
        bic,
        k_params,
        n: data.n(),
    })
}

/// Change in predicted category probabilities when one covariate moves
/// from `low` to `high`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateEffect {
    pub covariate: String,
    pub low: f64,
    pub high: f64,
    pub delta_p: Vec<f64>,
}

/// Averages `P(y = j | x, covariate = high) − P(y = j | x, covariate = low)`
/// over all retained draws and all rows of `data`. Without an explicit
/// `change` the covariate must be a 0/1 indicator.
pub fn covariate_effect(
    chain: &ChainOutput,
    data: &OrdinalDataset,
    covariate: &str,
    change: Option<(f64, f64)>,
) -> Result<CovariateEffect> {
    let col = data
        .column(covariate)
        .ok_or_else(|| GalorError::Data(format!("unknown covariate `{covariate}`")))?;
    let (low, high) = match change {
        Some(c) => c,
        None => {
            if data.x().column(col).iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(GalorError::Data(format!(
                    "covariate `{covariate}` is not a 0/1 indicator; give an explicit change"
                )));
            }
            (0.0, 1.0)
        }
    };
    if chain.draws.is_empty() {
        return Err(GalorError::Data("chain has no draws".into()));
    }
    if chain.k() != data.k() {
        return Err(GalorError::Dimension("chain and data dimensions differ".into()));
    }
    let bounds = GammaBounds::new(chain.quantile)?;
    let j = data.categories();
    let mut acc = vec![0.0; j];
    let x = data.x();
    for draw in &chain.draws {
        let beta = DVector::from_column_slice(&draw.beta);
        let xi = CutpointSpec::new(chain.cut2, DVector::from_column_slice(&draw.delta))?.xi();
        let xb = x * &beta;
        let shift_low = beta[col] * low;
        let shift_high = beta[col] * high;
        for i in 0..data.n() {
            let base = xb[i] - beta[col] * x[(i, col)];
            let hi_law = QuantileGalParams::with_bounds(base + shift_high, draw.sigma, draw.gamma, &bounds)?;
            let lo_law = QuantileGalParams::with_bounds(base + shift_low, draw.sigma, draw.gamma, &bounds)?;
            let (ph, pl) = (probabilities_for(&hi_law, &xi), probabilities_for(&lo_law, &xi));
            for c in 0..j {
                acc[c] += ph[c] - pl[c];
            }
        }
    }
    let scale = (chain.draws.len() * data.n()) as f64;
    Ok(CovariateEffect {
        covariate: covariate.to_string(),
        low,
        high,
        delta_p: acc.into_iter().map(|v| v / scale).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub k_params: usize,
}

/// Side-by-side information criteria for fits on the same data and quantile.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub quantile: f64,
    pub n: usize,
    pub rows: Vec<ComparisonRow>,
    /// Row indices ordered by increasing AIC.
    pub aic_order: Vec<usize>,
    /// Row indices ordered by increasing BIC.
    pub bic_order: Vec<usize>,
    /// Strictly best row by AIC; `None` on a tie.
    pub preferred_aic: Option<usize>,
    /// Strictly best row by BIC; `None` on a tie.
    pub preferred_bic: Option<usize>,
}

pub fn compare_models(fits: &[(String, FitSummary)]) -> Result<ComparisonReport> {
    if fits.len() < 2 {
        return Err(GalorError::Data("comparison needs at least two fits".into()));
    }
    let (n, quantile) = (fits[0].1.n, fits[0].1.quantile);
    for (label, f) in fits {
        if f.n != n {
            return Err(GalorError::Data(format!("fit `{label}` uses n = {} but expected n = {n}", f.n)));
        }
        if f.quantile != quantile {
            return Err(GalorError::Data(format!(
                "fit `{label}` is at quantile {} but expected {quantile}",
                f.quantile
            )));
        }
    }
    let rows: Vec<ComparisonRow> = fits
        .iter()
        .map(|(label, f)| ComparisonRow {
            label: label.clone(),
            loglik: f.loglik,
            aic: f.aic,
            bic: f.bic,
            k_params: f.k_params,
        })
        .collect();
    let order = |key: fn(&ComparisonRow) -> f64| {
        let mut idx: Vec<usize> = (0..rows.len()).collect();
        idx.sort_by(|&a, &b| key(&rows[a]).total_cmp(&key(&rows[b])));
        let best = (key(&rows[idx[0]]) < key(&rows[idx[1]])).then_some(idx[0]);
        (idx, best)
    };
    let (aic_order, preferred_aic) = order(|r| r.aic);
    let (bic_order, preferred_bic) = order(|r| r.bic);
    Ok(ComparisonReport {
        quantile,
        n,
        rows,
        aic_order,
        bic_order,
        preferred_aic,
        preferred_bic,
    })
}

impl ComparisonReport {
    /// Aligned table at two decimals.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(5).max(5);
        let mut out = format!("quantile {}  n {}\n", self.quantile, self.n);
        let _ = writeln!(out, "{:<width$}  {:>4}  {:>10}  {:>10}  {:>10}", "model", "k", "lnL", "AIC", "BIC");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>4}  {:>10.2}  {:>10.2}  {:>10.2}",
                r.label, r.k_params, r.loglik, r.aic, r.bic
            );
        }
        let verdict = |best: Option<usize>| best.map_or("tie (no preference)".to_string(), |i| self.rows[i].label.clone());
        let _ = writeln!(out, "preferred by AIC: {}", verdict(self.preferred_aic));
        let _ = writeln!(out, "preferred by BIC: {}", verdict(self.preferred_bic));
        out
    }

    /// Full-precision CSV, one row per fit.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,quantile,n,k_params,loglik,aic,bic,aic_rank,bic_rank\n");
        for (i, r) in self.rows.iter().enumerate() {
            let rank = |order: &[usize]| order.iter().position(|&j| j == i).unwrap_or(0) + 1;
            let _ = writeln!(
                out,
                "{},{},{},{},{:.17e},{:.17e},{:.17e},{},{}",
                r.label,
                self.quantile,
                self.n,
                r.k_params,
                r.loglik,
                r.aic,
                r.bic,
                rank(&self.aic_order),
                rank(&self.bic_order)
            );
        }
        out
    }
}
