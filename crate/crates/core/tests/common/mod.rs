#![allow(dead_code)]

/// Adaptive Simpson quadrature on `[a, b]`, started from panels of width at
/// most 0.5 so narrow features are not stepped over.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let panels = (((b - a) / 0.5).ceil() as usize).max(1);
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * w;
            let hi = if i + 1 == panels { b } else { lo + w };
            integrate_panel(f, lo, hi, tol / panels as f64)
        })
        .sum()
}

fn integrate_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Φ evaluated directly from `erfc`.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Quantile-fixed density transcribed term by term from its closed form,
/// in plain (non-log) arithmetic. Only reliable for moderate `y`.
pub fn naive_pdf(y: f64, mu: f64, sigma: f64, gamma: f64, p: f64) -> f64 {
    let ys = (y - mu) / sigma;
    let pp = p - ind(gamma > 0.0);
    let pm = p - ind(gamma < 0.0);
    let g = gamma.abs();
    let pos = gamma != 0.0 && ys / gamma > 0.0;
    let mut out = 0.0;
    if pos {
        out += (phi(-ys * pp / g + pm / pp * g) - phi(pm / pp * g))
            * (-ys * pm + 0.5 * gamma * gamma * (pm / pp).powi(2)).exp();
    }
    let shift = if pos { ys * pp / g } else { 0.0 };
    out += phi(-g + shift) * (-ys * pp + 0.5 * gamma * gamma).exp();
    2.0 * p * (1.0 - p) / sigma * out
}

/// Quantile-fixed distribution function transcribed from its closed form.
pub fn naive_cdf(y: f64, mu: f64, sigma: f64, gamma: f64, p: f64) -> f64 {
    let ys = (y - mu) / sigma;
    let pp = p - ind(gamma > 0.0);
    let pm = p - ind(gamma < 0.0);
    let g = gamma.abs();
    let pos = ys / gamma > 0.0;
    let mut out = ind(gamma < 0.0);
    if pos {
        out += 1.0 - 2.0 * phi(ys * pp / gamma)
            + 2.0
                * pp
                * (-ys * pm + 0.5 * gamma * gamma * (pm / pp).powi(2)).exp()
                * (phi(-ys * pp / g + pm / pp * g) - phi(pm / pp * g));
    }
    let shift = if pos { ys * pp / g } else { 0.0 };
    out + 2.0 * pm * (-ys * pp + 0.5 * gamma * gamma).exp() * phi(-g + shift)
}
