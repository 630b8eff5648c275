//! Bivariate normal rectangle probabilities and the truncated bivariate
//! normal used as the `(σ, γ)` proposal.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rand::Rng;

use super::{open_unit, sample_truncated_normal, standard_normal};
use crate::error::{domain, GalorError, Result};
use crate::special::norm_cdf;

/// Axis-aligned rectangle `(lo1, hi1] × (lo2, hi2]`; infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle2D {
    pub lo1: f64,
    pub hi1: f64,
    pub lo2: f64,
    pub hi2: f64,
}

impl Rectangle2D {
    pub fn new(lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> Result<Self> {
        if !(lo1 < hi1) || !(lo2 < hi2) {
            return Err(domain(format!(
                "rectangle needs lo < hi on both axes, got ({lo1}, {hi1}) x ({lo2}, {hi2})"
            )));
        }
        Ok(Self { lo1, hi1, lo2, hi2 })
    }

    pub fn contains(&self, x: &Vector2<f64>) -> bool {
        x[0] > self.lo1 && x[0] < self.hi1 && x[1] > self.lo2 && x[1] < self.hi2
    }
}

/// Bivariate normal law with a validated covariance.
#[derive(Debug, Clone, Copy)]
pub struct Bvn {
    mean: Vector2<f64>,
    sd: [f64; 2],
    rho: f64,
    ln_det: f64,
    precision: Matrix2<f64>,
}

impl Bvn {
    pub fn new(mean: Vector2<f64>, cov: Matrix2<f64>) -> Result<Self> {
        let (c11, c22) = (cov[(0, 0)], cov[(1, 1)]);
        let c12 = 0.5 * (cov[(0, 1)] + cov[(1, 0)]);
        let det = c11 * c22 - c12 * c12;
        if !(c11 > 0.0 && c22 > 0.0 && det > 0.0) || !det.is_finite() || !mean.iter().all(|m| m.is_finite()) {
            return Err(domain(format!(
                "bivariate normal covariance must be symmetric positive definite, got {cov:?}"
            )));
        }
        let sd = [c11.sqrt(), c22.sqrt()];
        let precision = Matrix2::new(c22, -c12, -c12, c11) / det;
        Ok(Self {
            mean,
            sd,
            rho: (c12 / (sd[0] * sd[1])).clamp(-1.0, 1.0),
            ln_det: det.ln(),
            precision,
        })
    }

    pub fn mean(&self) -> &Vector2<f64> {
        &self.mean
    }

    pub fn ln_pdf(&self, x: &Vector2<f64>) -> f64 {
        let d = x - self.mean;
        -(2.0 * PI).ln() - 0.5 * self.ln_det - 0.5 * d.dot(&(self.precision * d))
    }

    pub fn rectangle_prob(&self, rect: &Rectangle2D) -> f64 {
        let z = |v: f64, i: usize| (v - self.mean[i]) / self.sd[i];
        let (a1, b1) = (z(rect.lo1, 0), z(rect.hi1, 0));
        let (a2, b2) = (z(rect.lo2, 1), z(rect.hi2, 1));
        let r = self.rho;
        let p = upper_orthant(a1, a2, r) - upper_orthant(b1, a2, r) - upper_orthant(a1, b2, r)
            + upper_orthant(b1, b2, r);
        p.clamp(0.0, 1.0)
    }

    fn conditional_second(&self, x1: f64) -> (f64, f64) {
        let shift = self.rho * self.sd[1] * (x1 - self.mean[0]) / self.sd[0];
        (self.mean[1] + shift, self.sd[1] * self.sd[1] * (1.0 - self.rho * self.rho))
    }

    /// Draw from the law truncated to `rect`.
    pub fn sample_truncated<R: Rng + ?Sized>(&self, rect: &Rectangle2D, rng: &mut R) -> Result<Vector2<f64>> {
        let mass = self.rectangle_prob(rect);
        if !(mass > 1e-300) {
            return Err(vanishing(mass));
        }
        if mass > 0.02 {
            for _ in 0..32 {
                let u1 = standard_normal(rng);
                let u2 = standard_normal(rng);
                let x1 = self.mean[0] + self.sd[0] * u1;
                let x2 = self.mean[1]
                    + self.sd[1] * (self.rho * u1 + (1.0 - self.rho * self.rho).sqrt() * u2);
                let x = Vector2::new(x1, x2);
                if rect.contains(&x) {
                    return Ok(x);
                }
            }
        }
        // invert the first marginal, then draw the second conditionally
        let target = open_unit(rng) * mass;
        let mut lo = rect.lo1.max(self.mean[0] - 40.0 * self.sd[0]);
        let mut hi = rect.hi1.min(self.mean[0] + 40.0 * self.sd[0]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let strip = Rectangle2D { hi1: mid, ..*rect };
            if self.rectangle_prob(&strip) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x1 = 0.5 * (lo + hi);
        let (m2, v2) = self.conditional_second(x1);
        let x2 = sample_truncated_normal(m2, v2, rect.lo2, rect.hi2, rng)?;
        Ok(Vector2::new(x1, x2))
    }

    /// Log density of the law truncated to `rect`, including the
    /// `− ln P(rect)` normalization; `−∞` outside the rectangle.
    pub fn truncated_ln_pdf(&self, x: &Vector2<f64>, rect: &Rectangle2D) -> Result<f64> {
        if !rect.contains(x) {
            return Ok(f64::NEG_INFINITY);
        }
        let mass = self.rectangle_prob(rect);
        if !(mass > 1e-300) {
            return Err(vanishing(mass));
        }
        Ok(self.ln_pdf(x) - mass.ln())
    }
}

fn vanishing(mass: f64) -> GalorError {
    GalorError::Numerical(format!(
        "truncation rectangle has probability {mass:e} under the proposal; shrink the tuning factor"
    ))
}

/// `P(lo < X ≤ hi)` for `X ~ N(mean, cov)` and `lo, hi` the rectangle corners.
pub fn bvn_rectangle_prob(mean: &Vector2<f64>, cov: &Matrix2<f64>, rect: &Rectangle2D) -> Result<f64> {
    Ok(Bvn::new(*mean, *cov)?.rectangle_prob(rect))
}

pub fn sample_btn<R: Rng + ?Sized>(
    mean: &Vector2<f64>,
    cov: &Matrix2<f64>,
    rect: &Rectangle2D,
    rng: &mut R,
) -> Result<Vector2<f64>> {
    Bvn::new(*mean, *cov)?.sample_truncated(rect, rng)
}

pub fn btn_log_density(
    x: &Vector2<f64>,
    mean: &Vector2<f64>,
    cov: &Matrix2<f64>,
    rect: &Rectangle2D,
) -> Result<f64> {
    Bvn::new(*mean, *cov)?.truncated_ln_pdf(x, rect)
}

// Beyond this standardized distance the orthant terms are below 1e-300.
const Z_CLAMP: f64 = 38.0;

// P(X > h, Y > k) for standard margins with correlation r; infinite limits allowed.
fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { norm_cdf(-k) };
    }
    if k == f64::NEG_INFINITY {
        return norm_cdf(-h);
    }
    bvnd(h.clamp(-Z_CLAMP, Z_CLAMP), k.clamp(-Z_CLAMP, Z_CLAMP), r)
}

// Gauss–Legendre half-rules (weight, abscissa) with 6, 12 and 20 points.
#[allow(clippy::excessive_precision)]
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];
#[allow(clippy::excessive_precision)]
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
#[allow(clippy::excessive_precision)]
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

// Drezner–Wesolowsky integration as refined by Genz: P(X > h, Y > k).
fn bvnd(h: f64, k: f64, r: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let mut hk = h * k;
    if r.abs() < 0.925 {
        let mut bvn = 0.0;
        if r != 0.0 {
            let hs = 0.5 * (h * h + k * k);
            let asr = r.asin();
            for &(w, x) in rule {
                for s in [-1.0, 1.0] {
                    let sn = (0.5 * asr * (s * x + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (2.0 * two_pi);
        }
        return bvn + norm_cdf(-h) * norm_cdf(-k);
    }
    let mut k = k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    let mut bvn = 0.0;
    if r.abs() < 1.0 {
        let a_sq = (1.0 - r) * (1.0 + r);
        let mut a = a_sq.sqrt();
        let b_sq = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_sq / a_sq + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_sq - a_sq) * (1.0 - d * b_sq / 5.0) / 3.0 + c * d * a_sq * a_sq / 5.0);
        }
        if -hk < 100.0 {
            let b = b_sq.sqrt();
            bvn -= (-0.5 * hk).exp()
                * two_pi.sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * b_sq * (1.0 - d * b_sq / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in rule {
            for s in [-1.0, 1.0] {
                let xs = (a * (s * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (b_sq / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / two_pi;
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        let mut out = -bvn;
        if k > h {
            out += if h < 0.0 {
                norm_cdf(k) - norm_cdf(h)
            } else {
                norm_cdf(-h) - norm_cdf(-k)
            };
        }
        out.max(0.0)
    }
}
