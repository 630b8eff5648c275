//! Generalized asymmetric Laplace (GAL) distributions.
//!
//! Two parameterizations live here:
//!
//! * [`GalParams`]: the general law `GAL(μ, σ, p, α)` defined through the
//!   mixture `Y = μ + σ A W + σ α S + σ √(B W) U` with `W ~ Exp(1)`,
//!   `S ~ N⁺(0, 1)` and `U ~ N(0, 1)`.
//! * [`QuantileGalParams`]: the quantile-fixed law indexed by `(μ, σ, γ)` at a
//!   fixed probability `p0`. Its `p0`-quantile is `μ` for every admissible `γ`,
//!   which is what makes it usable as a quantile-regression error.
//!
//! The quantile-fixed law maps one way onto the general law through
//! [`MixtureConstants`]; nothing maps back.
//!
//! All densities and distribution functions are evaluated in log space. The
//! `α < 0` branch is obtained by reflection: if `Y ~ GAL(μ, σ, p, α)` then
//! `−Y ~ GAL(−μ, σ, 1 − p, −α)`.

use rand::{Rng, RngExt};
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::special::{log1mexp, log_mills, log_ndtr, log_ndtr_diff, logaddexp};

/// Parameters of the general GAL law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GalParams<T> {
    pub mu: T,
    pub sigma: T,
    pub p: T,
    pub alpha: T,
}

impl<T: Real> GalParams<T> {
    pub fn new(mu: T, sigma: T, p: T, alpha: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(domain(format!("sigma must be positive, got {sigma}")));
        }
        if !(p > T::zero() && p < T::one()) {
            return Err(domain(format!("p must lie in (0, 1), got {p}")));
        }
        if !mu.is_finite() || !alpha.is_finite() {
            return Err(domain("mu and alpha must be finite"));
        }
        Ok(Self { mu, sigma, p, alpha })
    }

    /// Asymmetric Laplace law, i.e. `α = 0`.
    pub fn asymmetric_laplace(mu: T, sigma: T, p: T) -> Result<Self> {
        Self::new(mu, sigma, p, T::zero())
    }

    pub fn ln_pdf(&self, y: T) -> T {
        std_ln_pdf((y - self.mu) / self.sigma, self.p, self.alpha) - self.sigma.ln()
    }

    pub fn pdf(&self, y: T) -> T {
        self.ln_pdf(y).exp()
    }

    /// `(ln F(y), ln(1 − F(y)))`, each accurate in its own tail.
    pub fn ln_cdf_sf(&self, y: T) -> (T, T) {
        std_ln_cdf_sf((y - self.mu) / self.sigma, self.p, self.alpha)
    }

    pub fn cdf(&self, y: T) -> T {
        self.ln_cdf_sf(y).0.exp()
    }

    /// Moment generating function `E[e^{tY}]`.
    ///
    /// Defined on the open window `((p − 1)/σ, p/σ)`; points within a
    /// relative margin of `1e-9` of either endpoint are rejected.
    pub fn mgf(&self, t: T) -> Result<T> {
        let (lo, hi) = self.mgf_window();
        let margin = T::c(1.0 - 1e-9);
        if !(t > lo * margin && t < hi * margin) {
            return Err(domain(format!(
                "mgf argument {t} outside the existence window ({lo}, {hi})"
            )));
        }
        let (mu, sigma, p, alpha) = (self.mu, self.sigma, self.p, self.alpha);
        let st = sigma * t;
        let two = T::c(2.0);
        let half = T::c(0.5);
        let ln_m = (two * p * (T::one() - p)).ln() + log_ndtr(alpha * st)
            + mu * t
            + half * alpha * alpha * st * st
            - (p - st).ln()
            - (T::one() - p + st).ln();
        Ok(ln_m.exp())
    }

    pub fn mgf_window(&self) -> (T, T) {
        ((self.p - T::one()) / self.sigma, self.p / self.sigma)
    }

    pub fn moments(&self) -> Moments<T> {
        let (sigma, p, alpha) = (self.sigma, self.p, self.alpha);
        let one = T::one();
        let two_over_pi = T::c(2.0) / T::PI();
        let q = one - p;
        let mean = self.mu + sigma * (two_over_pi.sqrt() * alpha + (one - T::c(2.0) * p) / (p * q));
        // cumulants of the standardized law
        let k2 = alpha * alpha * (one - two_over_pi) + (p * p + q * q) / (p * p * q * q);
        let k3 = alpha.powi(3) * two_over_pi.sqrt() * (T::c(4.0) / T::PI() - one)
            + T::c(2.0) * (q.powi(3) - p.powi(3)) / (p.powi(3) * q.powi(3));
        Moments {
            mean,
            variance: sigma * sigma * k2,
            skewness: k3 / k2.powf(T::c(1.5)),
        }
    }

    /// Draws via the normal–exponential–half-normal mixture.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<T> {
        let a = (T::one() - T::c(2.0) * self.p) / (self.p * (T::one() - self.p));
        let b = T::c(2.0) / (self.p * (T::one() - self.p));
        (0..count)
            .map(|_| {
                let w = T::c(Exp1.sample(rng));
                let s = T::c(rng.sample::<f64, _>(StandardNormal).abs());
                let u = T::c(rng.sample::<f64, _>(StandardNormal));
                self.mu + self.sigma * (a * w + self.alpha * s + (b * w).sqrt() * u)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub mean: T,
    pub variance: T,
    pub skewness: T,
}

/// Quantities shared by every quantile-fixed density and sampler formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureConstants<T> {
    /// Mixture probability `p(γ, p0)`.
    pub p: T,
    /// `(1 − 2p) / (p(1 − p))`.
    pub a: T,
    /// `2 / (p(1 − p))`.
    pub b: T,
    /// `1 / (I(γ > 0) − p)`.
    pub c: T,
    /// General-law shape `C·|γ|`.
    pub alpha: T,
}

impl<T: Real> MixtureConstants<T> {
    /// `p − I(γ > 0)`.
    pub fn p_plus(&self) -> T {
        if self.alpha > T::zero() {
            self.p - T::one()
        } else {
            self.p
        }
    }

    /// `p − I(γ < 0)`.
    pub fn p_minus(&self) -> T {
        if self.alpha < T::zero() {
            self.p - T::one()
        } else {
            self.p
        }
    }
}

/// `g(γ) = 2Φ(−|γ|)·exp(γ²/2)`, strictly decreasing in `|γ|` with `g(0) = 1`.
pub fn bound_function<T: Real>(gamma: T) -> T {
    ln_bound_function(gamma).exp()
}

pub fn ln_bound_function<T: Real>(gamma: T) -> T {
    T::LN_2() + log_mills(gamma.abs())
}

/// Admissible open interval `(L, U)` for `γ` at a fixed quantile `p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBounds<T> {
    pub p0: T,
    pub lower: T,
    pub upper: T,
}

impl<T: Real> GammaBounds<T> {
    pub fn new(p0: T) -> Result<Self> {
        check_quantile(p0)?;
        let upper = solve_bound(p0.ln());
        let lower = -solve_bound((T::one() - p0).ln());
        Ok(Self { p0, lower, upper })
    }

    pub fn contains(&self, gamma: T) -> bool {
        gamma > self.lower && gamma < self.upper
    }

    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    /// Mixture constants for `γ`, rejecting values outside `(L, U)`.
    pub fn constants(&self, gamma: T) -> Result<MixtureConstants<T>> {
        if !gamma.is_finite() {
            return Err(domain(format!("gamma must be finite, got {gamma}")));
        }
        if !(gamma > self.lower) {
            return Err(domain(format!(
                "gamma = {gamma} violates the lower bound L = {} at p0 = {}",
                self.lower, self.p0
            )));
        }
        if !(gamma < self.upper) {
            return Err(domain(format!(
                "gamma = {gamma} violates the upper bound U = {} at p0 = {}",
                self.upper, self.p0
            )));
        }
        let one = T::one();
        let p0 = self.p0;
        let p = if gamma > T::zero() {
            p0 * (-ln_bound_function(gamma)).exp()
        } else if gamma < T::zero() {
            one - (one - p0) * (-ln_bound_function(gamma)).exp()
        } else {
            p0
        };
        if !(p > T::zero() && p < one) {
            return Err(domain(format!(
                "gamma = {gamma} is numerically indistinguishable from a bound of ({}, {})",
                self.lower, self.upper
            )));
        }
        let q = one - p;
        let c = if gamma > T::zero() { one / (one - p) } else { -one / p };
        Ok(MixtureConstants {
            p,
            a: (one - T::c(2.0) * p) / (p * q),
            b: T::c(2.0) / (p * q),
            c,
            alpha: c * gamma.abs(),
        })
    }
}

/// Bounds `(L, U)` with `g(|L|) = 1 − p0` and `g(U) = p0`.
pub fn gamma_bounds<T: Real>(p0: T) -> Result<(T, T)> {
    let b = GammaBounds::new(p0)?;
    Ok((b.lower, b.upper))
}

pub fn mixture_constants<T: Real>(p0: T, gamma: T) -> Result<MixtureConstants<T>> {
    GammaBounds::new(p0)?.constants(gamma)
}

fn check_quantile<T: Real>(p0: T) -> Result<()> {
    if p0 > T::zero() && p0 < T::one() {
        Ok(())
    } else {
        Err(domain(format!("quantile p0 must lie in (0, 1), got {p0}")))
    }
}

// Bisection for ln g(t) = target on t ≥ 0. The bracket starts at [0, 40] and
// doubles until it contains the root (needed only for extreme quantiles).
fn solve_bound<T: Real>(ln_target: T) -> T {
    let mut lo = T::zero();
    let mut hi = T::c(40.0);
    while ln_bound_function(hi) > ln_target {
        lo = hi;
        hi = hi * T::c(2.0);
    }
    for _ in 0..400 {
        let mid = T::c(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ln_bound_function(mid) > ln_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    T::c(0.5) * (lo + hi)
}

/// Parameters of the quantile-fixed GAL law at quantile `p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileGalParams<T> {
    mu: T,
    sigma: T,
    gamma: T,
    p0: T,
    constants: MixtureConstants<T>,
}

impl<T: Real> QuantileGalParams<T> {
    pub fn new(mu: T, sigma: T, gamma: T, p0: T) -> Result<Self> {
        Self::with_bounds(mu, sigma, gamma, &GammaBounds::new(p0)?)
    }

    /// Same as [`QuantileGalParams::new`] but reuses precomputed bounds.
    pub fn with_bounds(mu: T, sigma: T, gamma: T, bounds: &GammaBounds<T>) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(domain(format!("sigma must be positive, got {sigma}")));
        }
        if !mu.is_finite() {
            return Err(domain("mu must be finite"));
        }
        let constants = bounds.constants(gamma)?;
        Ok(Self {
            mu,
            sigma,
            gamma,
            p0: bounds.p0,
            constants,
        })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn p0(&self) -> T {
        self.p0
    }

    pub fn constants(&self) -> &MixtureConstants<T> {
        &self.constants
    }

    pub fn to_general(&self) -> GalParams<T> {
        GalParams {
            mu: self.mu,
            sigma: self.sigma,
            p: self.constants.p,
            alpha: self.constants.alpha,
        }
    }

    pub fn ln_pdf(&self, y: T) -> T {
        self.to_general().ln_pdf(y)
    }

    pub fn ln_cdf_sf(&self, y: T) -> (T, T) {
        self.to_general().ln_cdf_sf(y)
    }

    /// `ln P(lo < Y ≤ hi)`; infinite endpoints are allowed.
    pub fn ln_interval_probability(&self, lo: T, hi: T) -> T {
        std_ln_interval(
            (lo - self.mu) / self.sigma,
            (hi - self.mu) / self.sigma,
            self.constants.p,
            self.constants.alpha,
        )
    }

    pub fn moments(&self) -> Moments<T> {
        self.to_general().moments()
    }

    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<T> {
        self.to_general().sample(count, rng)
    }
}

pub fn pdf<T: Real>(y: T, params: &QuantileGalParams<T>) -> T {
    params.ln_pdf(y).exp()
}

pub fn cdf<T: Real>(y: T, params: &QuantileGalParams<T>) -> T {
    params.ln_cdf_sf(y).0.exp()
}

pub fn mgf<T: Real>(t: T, params: &GalParams<T>) -> Result<T> {
    params.mgf(t)
}

pub fn moments<T: Real>(params: &GalParams<T>) -> Moments<T> {
    params.moments()
}

pub fn sample<T: Real, R: Rng + ?Sized>(
    params: &QuantileGalParams<T>,
    count: usize,
    rng: &mut R,
) -> Vec<T> {
    params.sample(count, rng)
}

// ---------------------------------------------------------------------------
// Standardized kernels (μ = 0, σ = 1).

/// Log density of the standardized general law.
pub(crate) fn std_ln_pdf<T: Real>(y: T, p: T, alpha: T) -> T {
    let one = T::one();
    if alpha == T::zero() {
        let rho = if y < T::zero() { y * (p - one) } else { y * p };
        return (p * (one - p)).ln() - rho;
    }
    if alpha < T::zero() {
        return std_ln_pdf(-y, one - p, -alpha);
    }
    let q = one - p;
    let head = (T::c(2.0) * p * q).ln();
    if y <= T::zero() {
        return head + q * y + log_mills(alpha * q);
    }
    let u = y / alpha;
    let lead = upper_leading_term(y, u, p, alpha);
    let tail = log_mills(u + alpha * q) - T::c(0.5) * u * u;
    head + logaddexp(lead, tail)
}

// ln{[Φ(u − αp) − Φ(−αp)]·exp(−py + α²p²/2)} for y > 0, α > 0.
fn upper_leading_term<T: Real>(y: T, u: T, p: T, alpha: T) -> T {
    let half = T::c(0.5);
    let ap = alpha * p;
    let b = u - ap;
    if b <= T::zero() {
        let d = log_mills(ap) - log_mills(ap - u) - (p * y - half * u * u);
        -half * u * u + log_mills(ap - u) + log1mexp(d.min(T::zero()))
    } else {
        -p * y + half * ap * ap + log_ndtr_diff(-ap, b)
    }
}

/// `(ln F(y), ln S(y))` for the standardized general law.
pub(crate) fn std_ln_cdf_sf<T: Real>(y: T, p: T, alpha: T) -> (T, T) {
    let one = T::one();
    if y == T::neg_infinity() {
        return (T::neg_infinity(), T::zero());
    }
    if y == T::infinity() {
        return (T::zero(), T::neg_infinity());
    }
    if alpha < T::zero() {
        let (lf, ls) = std_ln_cdf_sf(-y, one - p, -alpha);
        return (ls, lf);
    }
    let q = one - p;
    if alpha == T::zero() {
        return if y <= T::zero() {
            let lf = p.ln() + q * y;
            (lf, log1mexp(lf))
        } else {
            let ls = q.ln() - p * y;
            (log1mexp(ls), ls)
        };
    }
    if y <= T::zero() {
        let lf = (T::c(2.0) * p).ln() + q * y + log_mills(alpha * q);
        return (lf, log1mexp(lf.min(T::zero())));
    }
    let u = y / alpha;
    let lead = (T::c(2.0) * q).ln() + upper_leading_term(y, u, p, alpha);
    // 2Φ(−u) − 2p·e^{qy + α²q²/2}·Φ(−u − αq), written as a positive difference.
    let ln_phi_tail = log_ndtr(-u);
    let ls = if T::LN_2() + ln_phi_tail < lead - T::c(40.0) {
        lead
    } else {
        let ratio = p.ln() + log_mills(u + alpha * q) - log_mills(u);
        let gauss = T::LN_2() + ln_phi_tail + log1mexp(ratio.min(T::zero()));
        logaddexp(lead, gauss)
    };
    let ls = ls.min(T::zero());
    (log1mexp(ls), ls)
}

/// `ln P(lo < Y ≤ hi)` for the standardized general law.
pub(crate) fn std_ln_interval<T: Real>(lo: T, hi: T, p: T, alpha: T) -> T {
    if !(lo < hi) {
        return T::neg_infinity();
    }
    let (lf_lo, ls_lo) = std_ln_cdf_sf(lo, p, alpha);
    let (lf_hi, ls_hi) = std_ln_cdf_sf(hi, p, alpha);
    let ln_half = -T::LN_2();
    if lf_hi <= ln_half {
        lf_hi + log1mexp((lf_lo - lf_hi).min(T::zero()))
    } else if ls_lo <= ln_half {
        ls_lo + log1mexp((ls_hi - ls_lo).min(T::zero()))
    } else {
        (-(lf_lo.exp() + ls_hi.exp())).ln_1p()
    }
}

/// Closed-form asymmetric Laplace distribution function, used as a reference
/// for the `γ = 0` reduction.
pub fn asymmetric_laplace_cdf<T: Real>(y: T, mu: T, sigma: T, p: T) -> T {
    let z = (y - mu) / sigma;
    if z <= T::zero() {
        p * ((T::one() - p) * z).exp()
    } else {
        T::one() - (T::one() - p) * (-p * z).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constants_reduce_to_asymmetric_laplace_at_zero() {
        let m = mixture_constants(0.5, 0.0).unwrap();
        assert_eq!((m.p, m.a, m.b, m.alpha), (0.5, 0.0, 8.0, 0.0));
        let m = mixture_constants(0.25, 0.0).unwrap();
        assert!(close(m.p, 0.25, 1e-15));
        assert!(close(m.a, 8.0 / 3.0, 1e-14));
        assert!(close(m.b, 32.0 / 3.0, 1e-14));
    }

    #[test]
    fn constants_for_positive_gamma() {
        // g(1.14) = 2Φ(−1.14)e^{0.6498}; evaluated independently with mpmath
        let g = 0.486_998_382_647_855_8_f64;
        let m = mixture_constants(0.25, 1.14).unwrap();
        assert!(close(m.p, 0.25 / g, 1e-12), "p = {}", m.p);
        assert!(close(m.alpha, 1.14 / (1.0 - 0.25 / g), 1e-10));
        assert!(close(m.alpha, 2.343, 1e-3));
        assert!(close(m.c * 1.14, m.alpha, 1e-15));
        assert!(close(m.p_plus(), m.p - 1.0, 0.0));
        assert!(close(m.p_minus(), m.p, 0.0));
    }

    #[test]
    fn constants_reject_out_of_bounds_gamma() {
        let (lo, hi) = gamma_bounds(0.25).unwrap();
        let err = mixture_constants(0.25, hi + 1e-6).unwrap_err().to_string();
        assert!(err.contains("upper bound"), "{err}");
        let err = mixture_constants(0.25, lo - 1e-6).unwrap_err().to_string();
        assert!(err.contains("lower bound"), "{err}");
        assert!(mixture_constants(0.25, hi).is_err());
    }

    #[test]
    fn bounds_at_the_median_are_symmetric() {
        let (lo, hi) = gamma_bounds(0.5).unwrap();
        assert!(close(lo, -hi, 1e-14));
        // root of 2Φ(−t)e^{t²/2} = 0.5 from mpmath at 30 digits
        assert!(close(hi, 1.087_643_042_781_705_5, 1e-10), "U = {hi}");
        assert_eq!(bound_function(0.0_f64), 1.0);
    }

    #[test]
    fn bounds_at_lower_quartile() {
        let (lo, hi) = gamma_bounds(0.25).unwrap();
        assert!(close(lo, -0.393_124_483_315_242, 1e-10));
        assert!(close(hi, 2.901_320_534_194_68, 1e-10));
    }

    #[test]
    fn bounds_solve_their_defining_equations() {
        for &p0 in &[0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
            let (lo, hi) = gamma_bounds(p0).unwrap();
            assert!(lo < 0.0 && 0.0 < hi);
            assert!(close(bound_function(lo), 1.0 - p0, 1e-10), "p0={p0}");
            assert!(close(bound_function(hi), p0, 1e-10), "p0={p0}");
        }
    }

    #[test]
    fn bound_function_is_strictly_decreasing() {
        let mut prev = bound_function(0.0_f64);
        for i in 1..=400 {
            let g = bound_function(i as f64 * 0.1);
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn al_density_at_mode() {
        let d = QuantileGalParams::new(0.0, 1.0, 0.0, 0.5).unwrap();
        assert!(close(pdf(0.0, &d), 0.25, 1e-15));
    }

    #[test]
    fn al_cdf_closed_form() {
        let d = QuantileGalParams::new(0.0, 1.0, 0.0, 0.5).unwrap();
        assert!(close(cdf(3.0, &d), 1.0 - 0.5 * (-1.5_f64).exp(), 1e-15));
        for &p0 in &[0.25, 0.5, 0.75] {
            let d = QuantileGalParams::new(0.3, 1.7, 0.0, p0).unwrap();
            for i in -40..=40 {
                let y = i as f64 * 0.37;
                let want = asymmetric_laplace_cdf(y, 0.3, 1.7, p0);
                assert!(close(cdf(y, &d), want, 1e-12));
            }
        }
    }

    #[test]
    fn cdf_at_location_equals_quantile() {
        for &p0 in &[0.05, 0.25, 0.5, 0.75, 0.95] {
            let (lo, hi) = gamma_bounds(p0).unwrap();
            for k in 1..20 {
                let gamma = lo + (hi - lo) * k as f64 / 20.0;
                let d = QuantileGalParams::new(1.5, 0.7, gamma, p0).unwrap();
                assert!(close(cdf(1.5, &d), p0, 1e-10), "p0={p0} gamma={gamma}");
            }
        }
    }

    #[test]
    fn cdf_limits_and_extremes() {
        let d = QuantileGalParams::new(0.0, 1.0, 0.8, 0.25).unwrap();
        assert_eq!(cdf(f64::NEG_INFINITY, &d), 0.0);
        assert_eq!(cdf(f64::INFINITY, &d), 1.0);
        assert!(cdf(-1e6, &d) < 1e-300);
        assert!(cdf(1e6, &d) == 1.0);
        assert_eq!(pdf(1e6, &d), 0.0);
        assert_eq!(pdf(-1e6, &d), 0.0);
        let (lf, ls) = d.ln_cdf_sf(800.0);
        assert!(ls.is_finite() && ls < -100.0 && lf > -1e-100, "{lf} {ls}");
    }

    #[test]
    fn survival_tail_matches_log_space_pdf_integral_sign() {
        // far upper tail of a positively shaped law stays finite in log space
        let d = QuantileGalParams::<f64>::new(0.0, 1.0, -0.9, 0.75).unwrap();
        let (_, ls) = d.ln_cdf_sf(1.0e4);
        assert!(ls.is_finite());
        assert!(d.ln_pdf(1.0e4).is_finite());
    }

    #[test]
    fn moments_of_symmetric_al() {
        let g = GalParams::new(0.0, 1.0, 0.5, 0.0).unwrap();
        let m = g.moments();
        assert!(close(m.mean, 0.0, 1e-15));
        assert!(close(m.variance, 8.0, 1e-14));
        assert!(close(m.skewness, 0.0, 1e-15));
    }

    #[test]
    fn al_skewness_at_lower_quartile() {
        let m = GalParams::new(0.0, 1.0, 0.25, 0.0).unwrap().moments();
        assert!(close(m.skewness, 1.644, 1e-3), "{}", m.skewness);
    }

    #[test]
    fn quantile_fixed_skewness_is_nearly_zero() {
        let m = QuantileGalParams::<f64>::new(0.0, 1.0, 1.14, 0.25).unwrap().moments();
        assert!(m.skewness.abs() < 0.02, "{}", m.skewness);
    }

    #[test]
    fn mgf_is_one_at_zero_and_rejects_outside_window() {
        for &alpha in &[-2.0, -0.3, 0.0, 0.4, 3.0] {
            let g = GalParams::new(0.5, 1.2, 0.3, alpha).unwrap();
            assert!(close(g.mgf(0.0).unwrap(), 1.0, 1e-15));
            let (lo, hi) = g.mgf_window();
            assert!(g.mgf(hi).is_err());
            assert!(g.mgf(lo).is_err());
            assert!(g.mgf(hi * 1.5).is_err());
            assert!(g.mgf(hi * 0.5).unwrap() > 0.0);
        }
    }

    #[test]
    fn sample_mean_of_symmetric_al() {
        let d = QuantileGalParams::new(0.0, 1.0, 0.0, 0.5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let draws = d.sample(100_000, &mut rng);
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 3.0 * (8.0_f64 / 1e5).sqrt(), "mean {mean}");
    }

    #[test]
    fn single_precision_instantiation() {
        let d = QuantileGalParams::<f32>::new(0.0, 1.0, 0.5, 0.25).unwrap();
        assert!((cdf(0.0_f32, &d) - 0.25).abs() < 1e-5);
        assert!(pdf(0.3_f32, &d) > 0.0);
    }
}
