//! The ordinal quantile model: data, cut-points, likelihood and priors.

use nalgebra::{DMatrix, DVector};

use crate::error::{GalorError, Result};
use crate::gal::{std_ln_interval, GammaBounds, MixtureConstants, QuantileGalParams};
use crate::random::{inverse_gamma_ln_pdf, scaled_beta_ln_pdf};

/// Covariates `X` (n × k) and ordinal outcomes `y ∈ {1, …, J}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalDataset {
    x: DMatrix<f64>,
    y: Vec<usize>,
    categories: usize,
    names: Vec<String>,
}

impl OrdinalDataset {
    /// Validates and builds a dataset; `J` is the largest observed category.
    pub fn new(x: DMatrix<f64>, y: Vec<usize>, names: Vec<String>) -> Result<Self> {
        let j = y.iter().copied().max().unwrap_or(0);
        Self::with_categories(x, y, j, names)
    }

    pub fn with_categories(x: DMatrix<f64>, y: Vec<usize>, categories: usize, names: Vec<String>) -> Result<Self> {
        let (n, k) = x.shape();
        if y.len() != n {
            return Err(GalorError::Dimension(format!("X has {n} rows but y has {} entries", y.len())));
        }
        if names.len() != k {
            return Err(GalorError::Dimension(format!("X has {k} columns but {} names", names.len())));
        }
        if categories < 3 {
            return Err(GalorError::Data(format!("need at least 3 categories, found {categories}")));
        }
        if n < k {
            return Err(GalorError::Data(format!("need n >= k, got n = {n}, k = {k}")));
        }
        if let Some(i) = y.iter().position(|&v| v == 0 || v > categories) {
            return Err(GalorError::Data(format!(
                "row {}: category {} outside 1..={categories}",
                i + 1,
                y[i]
            )));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(GalorError::Data(format!(
                "row {}, column {}: non-finite covariate",
                pos % n + 1,
                names[pos / n]
            )));
        }
        let dataset = Self { x, y, categories, names };
        let counts = dataset.category_counts();
        if let Some(j) = counts.iter().position(|&c| c == 0) {
            return Err(GalorError::Data(format!("category {} never observed", j + 1)));
        }
        Ok(dataset)
    }

    /// Dataset without observations, used to run prior-only chains.
    #[cfg(test)]
    pub(crate) fn empty(k: usize, categories: usize) -> Self {
        Self {
            x: DMatrix::zeros(0, k),
            y: Vec::new(),
            categories,
            names: (1..=k).map(|i| format!("x{i}")).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn category_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.categories];
        for &v in &self.y {
            counts[v - 1] += 1;
        }
        counts
    }
}

/// Cut-points `ξ = (−∞, 0, c, c + e^{δ1}, …, +∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutpointSpec {
    pub c: f64,
    pub delta: DVector<f64>,
}

impl CutpointSpec {
    pub fn new(c: f64, delta: DVector<f64>) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(GalorError::Config(format!("second cut-point must be positive, got {c}")));
        }
        Ok(Self { c, delta })
    }

    /// All free spacings at `δ = 0`.
    pub fn initial(c: f64, categories: usize) -> Result<Self> {
        Self::new(c, DVector::zeros(categories.saturating_sub(3)))
    }

    pub fn categories(&self) -> usize {
        self.delta.len() + 3
    }

    pub fn xi(&self) -> Vec<f64> {
        let mut xi = Vec::with_capacity(self.delta.len() + 4);
        xi.extend_from_slice(&[f64::NEG_INFINITY, 0.0, self.c]);
        let mut last = self.c;
        for d in self.delta.iter() {
            last += d.exp();
            xi.push(last);
        }
        xi.push(f64::INFINITY);
        xi
    }
}

/// `ξ_0..ξ_J` from the transformed spacings.
pub fn delta_to_xi(spec: &CutpointSpec, categories: usize) -> Result<Vec<f64>> {
    if spec.categories() != categories {
        return Err(GalorError::Dimension(format!(
            "{} free cut-points do not match J = {categories}",
            spec.delta.len()
        )));
    }
    Ok(spec.xi())
}

/// Inverse of [`delta_to_xi`]: expects `(−∞, 0, c, …, +∞)`.
pub fn xi_to_delta(xi: &[f64]) -> Result<CutpointSpec> {
    let bad = |msg: &str| GalorError::Domain(format!("invalid cut-point vector {xi:?}: {msg}"));
    if xi.len() < 4 {
        return Err(bad("need at least J + 1 = 4 entries"));
    }
    if xi[0] != f64::NEG_INFINITY || xi[xi.len() - 1] != f64::INFINITY || xi[1] != 0.0 {
        return Err(bad("must start (-inf, 0, ...) and end with +inf"));
    }
    if xi.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(bad("must be strictly increasing"));
    }
    let inner = &xi[2..xi.len() - 1];
    let delta = inner.windows(2).map(|w| (w[1] - w[0]).ln()).collect::<Vec<_>>();
    CutpointSpec::new(inner[0], DVector::from_vec(delta))
}

/// Prior hyperparameters: `β ~ N(β0, B0)`, `σ ~ IG(n0/2, d0/2)`,
/// `γ ~ SB(L, U; a, b)`, `δ ~ N(δ0, D0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    pub beta0: DVector<f64>,
    pub beta_cov: DMatrix<f64>,
    pub n0: f64,
    pub d0: f64,
    pub sb_a: f64,
    pub sb_b: f64,
    pub delta0: DVector<f64>,
    pub delta_cov: DMatrix<f64>,
}

impl PriorConfig {
    /// Moderately diffuse defaults: `β0 = 0, B0 = 10I, (n0, d0) = (5, 8)`,
    /// `SB(4, 4)`, `δ0 = 0, D0 = I`.
    pub fn default_for(k: usize, categories: usize) -> Self {
        let m = categories.saturating_sub(3);
        Self {
            beta0: DVector::zeros(k),
            beta_cov: DMatrix::identity(k, k) * 10.0,
            n0: 5.0,
            d0: 8.0,
            sb_a: 4.0,
            sb_b: 4.0,
            delta0: DVector::zeros(m),
            delta_cov: DMatrix::identity(m, m),
        }
    }

    pub fn prepare(&self) -> Result<PreparedPrior> {
        if !(self.n0 > 0.0 && self.d0 > 0.0 && self.sb_a > 0.0 && self.sb_b > 0.0) {
            return Err(GalorError::Config("prior shape parameters must be positive".into()));
        }
        let beta = Gaussian::new(&self.beta0, &self.beta_cov, "B0")?;
        let delta = Gaussian::new(&self.delta0, &self.delta_cov, "D0")?;
        Ok(PreparedPrior {
            config: self.clone(),
            beta,
            delta,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Gaussian {
    pub mean: DVector<f64>,
    pub precision: DMatrix<f64>,
    ln_norm: f64,
}

impl Gaussian {
    fn new(mean: &DVector<f64>, cov: &DMatrix<f64>, label: &str) -> Result<Self> {
        let d = mean.len();
        if cov.shape() != (d, d) {
            return Err(GalorError::Dimension(format!(
                "{label} is {:?} but the mean has length {d}",
                cov.shape()
            )));
        }
        let chol = cov
            .clone()
            .cholesky()
            .ok_or_else(|| GalorError::Config(format!("{label} is not symmetric positive definite")))?;
        let ln_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(Self {
            mean: mean.clone(),
            precision: chol.inverse(),
            ln_norm: -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + ln_det),
        })
    }

    pub fn ln_pdf(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.mean;
        self.ln_norm - 0.5 * d.dot(&(&self.precision * &d))
    }
}

/// [`PriorConfig`] with inverses and normalizing constants cached.
#[derive(Debug, Clone)]
pub struct PreparedPrior {
    config: PriorConfig,
    pub(crate) beta: Gaussian,
    pub(crate) delta: Gaussian,
}

impl PreparedPrior {
    pub fn config(&self) -> &PriorConfig {
        &self.config
    }

    pub fn ln_beta(&self, beta: &DVector<f64>) -> f64 {
        self.beta.ln_pdf(beta)
    }

    pub fn ln_sigma(&self, sigma: f64) -> f64 {
        inverse_gamma_ln_pdf(sigma, 0.5 * self.config.n0, 0.5 * self.config.d0)
    }

    pub fn ln_gamma(&self, gamma: f64, bounds: &GammaBounds<f64>) -> f64 {
        scaled_beta_ln_pdf(gamma, bounds.lower, bounds.upper, self.config.sb_a, self.config.sb_b)
    }

    pub fn ln_delta(&self, delta: &DVector<f64>) -> f64 {
        if delta.is_empty() {
            0.0
        } else {
            self.delta.ln_pdf(delta)
        }
    }
}

/// Sum of the four log prior densities; `−∞` outside the support.
pub fn log_prior(
    beta: &DVector<f64>,
    sigma: f64,
    gamma: f64,
    spec: &CutpointSpec,
    priors: &PriorConfig,
    p0: f64,
) -> Result<f64> {
    let prepared = priors.prepare()?;
    if beta.len() != priors.beta0.len() || spec.delta.len() != priors.delta0.len() {
        return Err(GalorError::Dimension("parameter and prior dimensions differ".into()));
    }
    let bounds = GammaBounds::new(p0)?;
    Ok(prepared.ln_beta(beta)
        + prepared.ln_sigma(sigma)
        + prepared.ln_gamma(gamma, &bounds)
        + prepared.ln_delta(&spec.delta))
}

fn check_dims(beta: &DVector<f64>, spec: &CutpointSpec, data: &OrdinalDataset) -> Result<()> {
    if beta.len() != data.k() {
        return Err(GalorError::Dimension(format!(
            "beta has length {} but X has {} columns",
            beta.len(),
            data.k()
        )));
    }
    if spec.categories() != data.categories() {
        return Err(GalorError::Dimension(format!(
            "cut-points describe {} categories but the data have {}",
            spec.categories(),
            data.categories()
        )));
    }
    Ok(())
}

/// Ordinal log-likelihood `Σ ln[F((ξ_{y_i} − x'β)/σ) − F((ξ_{y_i−1} − x'β)/σ)]`.
///
/// Returns `−∞` (not an error) when the parameters leave the support or an
/// observation has zero probability.
pub fn log_likelihood(
    beta: &DVector<f64>,
    sigma: f64,
    gamma: f64,
    spec: &CutpointSpec,
    data: &OrdinalDataset,
    p0: f64,
) -> Result<f64> {
    check_dims(beta, spec, data)?;
    let bounds = GammaBounds::new(p0)?;
    let xb = data.x() * beta;
    Ok(log_likelihood_xb(&xb, sigma, gamma, &spec.xi(), data.y(), &bounds))
}

/// Likelihood kernel taking the linear predictor and cut-points directly.
pub(crate) fn log_likelihood_xb(
    xb: &DVector<f64>,
    sigma: f64,
    gamma: f64,
    xi: &[f64],
    y: &[usize],
    bounds: &GammaBounds<f64>,
) -> f64 {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return f64::NEG_INFINITY;
    }
    let m = match bounds.constants(gamma) {
        Ok(m) => m,
        Err(_) => return f64::NEG_INFINITY,
    };
    log_likelihood_constants(xb, sigma, &m, xi, y)
}

pub(crate) fn log_likelihood_constants(
    xb: &DVector<f64>,
    sigma: f64,
    m: &MixtureConstants<f64>,
    xi: &[f64],
    y: &[usize],
) -> f64 {
    let inv = 1.0 / sigma;
    let mut total = 0.0;
    for (mu, &j) in xb.iter().zip(y) {
        let lo = (xi[j - 1] - mu) * inv;
        let hi = (xi[j] - mu) * inv;
        total += std_ln_interval(lo, hi, m.p, m.alpha);
        if total == f64::NEG_INFINITY {
            break;
        }
    }
    if total.is_nan() {
        f64::NEG_INFINITY
    } else {
        total
    }
}

/// `P(y = j | x)` for `j = 1..J`.
pub fn category_probabilities(
    x: &DVector<f64>,
    beta: &DVector<f64>,
    sigma: f64,
    gamma: f64,
    spec: &CutpointSpec,
    p0: f64,
) -> Result<Vec<f64>> {
    if x.len() != beta.len() {
        return Err(GalorError::Dimension(format!(
            "x has length {} but beta has length {}",
            x.len(),
            beta.len()
        )));
    }
    let dist = QuantileGalParams::new(x.dot(beta), sigma, gamma, p0)?;
    Ok(probabilities_for(&dist, &spec.xi()))
}

pub(crate) fn probabilities_for(dist: &QuantileGalParams<f64>, xi: &[f64]) -> Vec<f64> {
    xi.windows(2)
        .map(|w| dist.ln_interval_probability(w[0], w[1]).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(y: usize) -> OrdinalDataset {
        // one observation; J = 3 is declared explicitly
        OrdinalDataset {
            x: DMatrix::from_element(1, 1, 1.0),
            y: vec![y],
            categories: 3,
            names: vec!["x1".into()],
        }
    }

    #[test]
    fn cutpoints_from_spacings() {
        let s = CutpointSpec::new(2.0, DVector::from_vec(vec![2f64.ln()])).unwrap();
        let xi = delta_to_xi(&s, 4).unwrap();
        assert_eq!(xi[..4], [f64::NEG_INFINITY, 0.0, 2.0, 4.0]);
        assert_eq!(xi[4], f64::INFINITY);
        let s = CutpointSpec::initial(3.0, 3).unwrap();
        assert_eq!(s.xi(), vec![f64::NEG_INFINITY, 0.0, 3.0, f64::INFINITY]);
        let s = CutpointSpec::new(2.0, DVector::from_vec(vec![0.0])).unwrap();
        assert_eq!(s.xi()[3], 3.0);
        assert!(delta_to_xi(&s, 5).is_err());
    }

    #[test]
    fn spacings_round_trip() {
        let s = CutpointSpec::new(1.5, DVector::from_vec(vec![-0.3, 0.8, 0.1])).unwrap();
        let back = xi_to_delta(&s.xi()).unwrap();
        assert!((back.c - 1.5).abs() < 1e-15);
        assert!((back.delta - s.delta).amax() < 1e-14);
        assert!(xi_to_delta(&[f64::NEG_INFINITY, 0.0, 2.0, 1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn likelihood_special_values() {
        let beta = DVector::from_vec(vec![0.0]);
        let spec = CutpointSpec::initial(3.0, 3).unwrap();
        let l1 = log_likelihood(&beta, 1.0, 0.0, &spec, &toy(1), 0.5).unwrap();
        assert!((l1 - 0.5f64.ln()).abs() < 1e-14);
        let l3 = log_likelihood(&beta, 1.0, 0.0, &spec, &toy(3), 0.5).unwrap();
        assert!((l3 - (0.5f64.ln() - 1.5)).abs() < 1e-14);
    }

    #[test]
    fn likelihood_sentinels_and_dimension_errors() {
        let beta = DVector::from_vec(vec![0.0]);
        let spec = CutpointSpec::initial(3.0, 3).unwrap();
        assert_eq!(log_likelihood(&beta, -1.0, 0.0, &spec, &toy(1), 0.5).unwrap(), f64::NEG_INFINITY);
        assert_eq!(log_likelihood(&beta, 1.0, 5.0, &spec, &toy(1), 0.5).unwrap(), f64::NEG_INFINITY);
        let wrong = DVector::from_vec(vec![0.0, 1.0]);
        assert!(log_likelihood(&wrong, 1.0, 0.0, &spec, &toy(1), 0.5).is_err());
    }

    #[test]
    fn category_probabilities_al_case() {
        let spec = CutpointSpec::initial(3.0, 3).unwrap();
        let x = DVector::from_vec(vec![1.0]);
        let p = category_probabilities(&x, &DVector::from_vec(vec![0.0]), 1.0, 0.0, &spec, 0.5).unwrap();
        let tail = 0.5 * (-1.5f64).exp();
        assert!((p[0] - 0.5).abs() < 1e-14);
        assert!((p[1] - (0.5 - tail)).abs() < 1e-14);
        assert!((p[2] - tail).abs() < 1e-14);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let far = category_probabilities(&x, &DVector::from_vec(vec![1e6]), 1.0, 0.3, &spec, 0.5).unwrap();
        assert!((far[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prior_terms() {
        let priors = PriorConfig::default_for(2, 4);
        let spec = CutpointSpec::initial(2.0, 4).unwrap();
        let bounds = GammaBounds::new(0.25).unwrap();
        let mid = 0.5 * (bounds.lower + bounds.upper);
        let at = |b: DVector<f64>| log_prior(&b, 1.0, mid, &spec, &priors, 0.25).unwrap();
        assert!(at(DVector::zeros(2)) > at(DVector::from_vec(vec![0.1, 0.0])));
        let prepared = priors.prepare().unwrap();
        let want = (140.0f64 / 64.0).ln() - bounds.width().ln();
        assert!((prepared.ln_gamma(mid, &bounds) - want).abs() < 1e-12);
        let mode = priors.d0 / (priors.n0 + 2.0);
        let h = 1e-5;
        let slope = (prepared.ln_sigma(mode + h) - prepared.ln_sigma(mode - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-6);
        assert_eq!(prepared.ln_delta(&DVector::zeros(0)), 0.0);
        assert_eq!(log_prior(&DVector::zeros(2), 0.0, mid, &spec, &priors, 0.25).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn dataset_validation() {
        let x = DMatrix::from_element(4, 1, 1.0);
        let names = vec!["a".to_string()];
        assert!(OrdinalDataset::new(x.clone(), vec![1, 2, 3, 3], names.clone()).is_ok());
        assert!(OrdinalDataset::new(x.clone(), vec![1, 3, 3, 3], names.clone()).is_err());
        assert!(OrdinalDataset::new(x.clone(), vec![1, 2, 3], names.clone()).is_err());
        let d = OrdinalDataset::new(x, vec![1, 2, 3, 3], names).unwrap();
        assert_eq!(d.category_counts(), vec![1, 1, 2]);
    }
}
