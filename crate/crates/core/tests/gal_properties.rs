use galor_core::gal::{self, GammaBounds};
use galor_core::QuantileGal64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = QuantileGal64> {
    (0.02..0.98_f64, 0.01..0.99_f64, -5.0..5.0_f64, 0.05..20.0_f64).prop_map(
        |(p0, frac, mu, sigma)| {
            let b = GammaBounds::new(p0).unwrap();
            let gamma = b.lower + frac * b.width();
            QuantileGal64::with_bounds(mu, sigma, gamma, &b).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn cdf_at_location_is_the_fixed_quantile(d in params()) {
        prop_assert!((gal::cdf(d.mu(), &d) - d.p0()).abs() < 1e-9);
    }

    #[test]
    fn cdf_is_nondecreasing_and_bounded(d in params(), a in -50.0..50.0_f64, step in 0.0..10.0_f64) {
        let lo = gal::cdf(a, &d);
        let hi = gal::cdf(a + step, &d);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(hi >= lo - 1e-15);
    }

    #[test]
    fn log_cdf_and_log_sf_are_complementary(d in params(), y in -100.0..100.0_f64) {
        let (lf, ls) = d.ln_cdf_sf(y);
        prop_assert!(lf <= 0.0 && ls <= 0.0);
        prop_assert!((lf.exp() + ls.exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_is_finite_and_nonnegative(d in params(), y in -1e4..1e4_f64) {
        let f = gal::pdf(y, &d);
        prop_assert!(f.is_finite() && f >= 0.0);
    }

    #[test]
    fn interval_probability_is_additive(d in params(), a in -20.0..20.0_f64, w1 in 0.0..5.0_f64, w2 in 0.0..5.0_f64) {
        let (b, c) = (a + w1, a + w1 + w2);
        let whole = d.ln_interval_probability(a, c).exp();
        let parts = d.ln_interval_probability(a, b).exp() + d.ln_interval_probability(b, c).exp();
        prop_assert!((whole - parts).abs() < 1e-12);
        let total = d.ln_interval_probability(f64::NEG_INFINITY, f64::INFINITY);
        prop_assert!(total.abs() < 1e-14);
    }

    #[test]
    fn mixture_constant_invariants(p0 in 0.01..0.99_f64, frac in 0.001..0.999_f64) {
        let b = GammaBounds::new(p0).unwrap();
        let gamma = b.lower + frac * b.width();
        let m = b.constants(gamma).unwrap();
        prop_assert!(m.p > 0.0 && m.p < 1.0 && m.b > 0.0);
        prop_assert!((m.a - (1.0 - 2.0 * m.p) / (m.p * (1.0 - m.p))).abs() < 1e-9 * m.a.abs().max(1.0));
        prop_assert_eq!(m.alpha.signum() == gamma.signum() || gamma == 0.0, true);
    }

    #[test]
    fn variance_is_positive(d in params()) {
        let m = d.moments();
        prop_assert!(m.variance > 0.0 && m.skewness.is_finite());
    }
}
