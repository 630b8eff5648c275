mod common;

use common::{integrate, naive_cdf, naive_pdf};
use galor_core::gal::{self, gamma_bounds};
use galor_core::{Gal64, QuantileGal64};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const QUANTILES: [f64; 3] = [0.25, 0.5, 0.75];

fn gamma_grid(p0: f64) -> [f64; 3] {
    let (lo, hi) = gamma_bounds(p0).unwrap();
    [lo / 2.0, 0.0, hi / 2.0]
}

fn dense_gammas(p0: f64) -> Vec<f64> {
    let (lo, hi) = gamma_bounds(p0).unwrap();
    (1..40)
        .map(|k| lo + (hi - lo) * k as f64 / 40.0)
        .filter(|g| g.abs() > 1e-9)
        .collect()
}

#[test]
fn density_matches_direct_closed_form() {
    for &p0 in &QUANTILES {
        for gamma in dense_gammas(p0) {
            let d = QuantileGal64::new(0.4, 1.3, gamma, p0).unwrap();
            let p = d.constants().p;
            for i in -60..=60 {
                let y = 0.4 + i as f64 * 0.2;
                let want = naive_pdf(y, 0.4, 1.3, gamma, p);
                if !want.is_finite() {
                    // direct form overflows near the bounds
                    continue;
                }
                let got = gal::pdf(y, &d);
                assert!(
                    (got - want).abs() <= 1e-11 + 1e-9 * want,
                    "p0={p0} gamma={gamma} y={y}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn distribution_function_matches_direct_closed_form() {
    for &p0 in &QUANTILES {
        for gamma in dense_gammas(p0) {
            let d = QuantileGal64::new(-0.2, 0.8, gamma, p0).unwrap();
            let p = d.constants().p;
            for i in -60..=60 {
                let y = -0.2 + i as f64 * 0.15;
                let want = naive_cdf(y, -0.2, 0.8, gamma, p);
                if !want.is_finite() {
                    continue;
                }
                let got = gal::cdf(y, &d);
                assert!(
                    (got - want).abs() <= 1e-10,
                    "p0={p0} gamma={gamma} y={y}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn density_integrates_to_one() {
    for &p0 in &QUANTILES {
        for gamma in gamma_grid(p0) {
            let d = QuantileGal64::new(0.0, 1.0, gamma, p0).unwrap();
            let f = |y: f64| gal::pdf(y, &d);
            let total = integrate(&f, -400.0, 0.0, 1e-11) + integrate(&f, 0.0, 400.0, 1e-11);
            assert!((total - 1.0).abs() < 1e-6, "p0={p0} gamma={gamma}: {total}");
        }
    }
}

#[test]
fn distribution_function_agrees_with_integrated_density() {
    for &p0 in &QUANTILES {
        for gamma in gamma_grid(p0) {
            let d = QuantileGal64::new(0.5, 2.0, gamma, p0).unwrap();
            let f = |y: f64| gal::pdf(y, &d);
            for &y in &[-6.0, -1.0, 0.5, 2.0, 9.0] {
                let mass = integrate(&f, -800.0, 0.5_f64.min(y), 1e-12)
                    + if y > 0.5 { integrate(&f, 0.5, y, 1e-12) } else { 0.0 };
                assert!((mass - gal::cdf(y, &d)).abs() < 1e-7, "p0={p0} gamma={gamma} y={y}");
            }
        }
    }
}

#[test]
fn derivative_of_distribution_function_is_density() {
    let h = 1e-5;
    for &p0 in &QUANTILES {
        for gamma in gamma_grid(p0) {
            let d = QuantileGal64::new(0.0, 1.0, gamma, p0).unwrap();
            for i in -30..=30 {
                let y = i as f64 * 0.1 + 0.013;
                let fd = (gal::cdf(y + h, &d) - gal::cdf(y - h, &d)) / (2.0 * h);
                assert!((fd - gal::pdf(y, &d)).abs() < 1e-5, "p0={p0} gamma={gamma} y={y}");
            }
        }
    }
}

#[test]
fn gamma_zero_is_asymmetric_laplace_exactly() {
    let d = QuantileGal64::new(0.0, 1.0, 0.0, 0.5).unwrap();
    assert!((gal::cdf(3.0, &d) - 0.888_434_919_925_785).abs() < 1e-14);
    assert_eq!(gal::pdf(0.0, &d), 0.25);
}

#[test]
fn cumulants_from_mgf_match_moments() {
    let cases = [
        (0.0, 1.0, 0.5, 0.0),
        (0.3, 1.5, 0.25, 1.2),
        (-1.0, 0.7, 0.6, -2.5),
        (0.0, 1.0, 0.513_37, 2.342_7),
        (2.0, 0.4, 0.1, -0.3),
    ];
    for &(mu, sigma, p, alpha) in &cases {
        let g = Gal64::new(mu, sigma, p, alpha).unwrap();
        let m = g.moments();
        let k = |t: f64| g.mgf(t).unwrap().ln();
        let h = 1e-4;
        let d1 = (k(h) - k(-h)) / (2.0 * h);
        let h2 = 1e-3;
        let d2 = (k(h2) - 2.0 * k(0.0) + k(-h2)) / (h2 * h2);
        assert!((d1 - m.mean).abs() < 1e-5, "{cases:?}: {d1} vs {}", m.mean);
        assert!(
            (d2 - m.variance).abs() < 1e-4 * m.variance.max(1.0),
            "{d2} vs {}",
            m.variance
        );
    }
}

#[test]
fn moments_agree_with_quadrature() {
    for &p0 in &QUANTILES {
        for gamma in gamma_grid(p0) {
            let d = QuantileGal64::new(0.0, 1.0, gamma, p0).unwrap();
            let m = d.moments();
            let raw = |k: i32| {
                let f = |y: f64| y.powi(k) * gal::pdf(y, &d);
                integrate(&f, -600.0, 0.0, 1e-11) + integrate(&f, 0.0, 600.0, 1e-11)
            };
            let (m1, m2, m3) = (raw(1), raw(2), raw(3));
            let var = m2 - m1 * m1;
            let skew = (m3 - 3.0 * m1 * var - m1.powi(3)) / var.powf(1.5);
            assert!((m1 - m.mean).abs() < 1e-6, "p0={p0} gamma={gamma}: {m1} vs {}", m.mean);
            assert!((var - m.variance).abs() < 1e-5 * var);
            assert!((skew - m.skewness).abs() < 1e-5, "p0={p0} gamma={gamma}");
        }
    }
}

#[test]
fn quantile_fixed_skewness_examples() {
    let m = QuantileGal64::new(0.0, 1.0, 1.14, 0.25).unwrap().moments();
    assert!(m.skewness.abs() < 0.02);
    let m = QuantileGal64::new(0.0, 1.0, -0.06, 0.5).unwrap().moments();
    assert!((m.skewness - 0.204).abs() < 0.01, "{}", m.skewness);
}

#[test]
fn sampler_matches_distribution_function() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for &p0 in &QUANTILES {
        for gamma in gamma_grid(p0) {
            let d = QuantileGal64::new(1.0, 0.5, gamma, p0).unwrap();
            let mut draws = d.sample(20_000, &mut rng);
            draws.sort_by(f64::total_cmp);
            let n = draws.len() as f64;
            let ks = draws
                .iter()
                .enumerate()
                .map(|(i, &y)| {
                    let f = gal::cdf(y, &d);
                    (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
                })
                .fold(0.0, f64::max);
            // 1.63/√n is the 1% critical value
            assert!(ks < 1.63 / n.sqrt(), "p0={p0} gamma={gamma}: D = {ks}");
            let below = draws.iter().filter(|&&y| y <= 1.0).count() as f64 / n;
            assert!((below - p0).abs() < 0.015);
        }
    }
}
