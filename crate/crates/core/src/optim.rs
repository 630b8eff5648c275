//! Small unconstrained quasi-Newton optimizer and finite-difference
//! derivatives, sized for the handful of parameters in the proposal tuning.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    pub max_evaluations: usize,
    pub gradient_tolerance: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            max_evaluations: 20_000,
            gradient_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Central-difference gradient with relative steps.
pub fn gradient<F: FnMut(&DVector<f64>) -> f64>(f: &mut F, x: &DVector<f64>) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let h = 1e-5 * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian with per-coordinate steps `h`.
pub fn hessian<F: FnMut(&DVector<f64>) -> f64>(f: &mut F, x: &DVector<f64>, h: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let mut out = DMatrix::zeros(d, d);
    let f0 = f(x);
    let mut p = x.clone();
    for i in 0..d {
        p[i] = x[i] + h[i];
        let up = f(&p);
        p[i] = x[i] - h[i];
        let down = f(&p);
        p[i] = x[i];
        out[(i, i)] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                p[i] = x[i] + si * h[i];
                p[j] = x[j] + sj * h[j];
                let v = f(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Symmetrize and replace each eigenvalue `λ` by `max(|λ|, floor)`.
pub fn nearest_spd(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let vals = eig.eigenvalues.map(|v| v.abs().max(floor));
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// BFGS with finite-difference gradients and a backtracking Armijo search.
/// Non-finite objective values are treated as `+∞`.
pub fn minimize<F: FnMut(&DVector<f64>) -> f64>(mut f: F, x0: DVector<f64>, opts: BfgsOptions) -> Minimum {
    let d = x0.len();
    let evaluations = std::cell::Cell::new(0usize);
    let mut eval = |x: &DVector<f64>| {
        evaluations.set(evaluations.get() + 1);
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut x = x0;
    let mut fx = eval(&x);
    let mut g = gradient(&mut eval, &x);
    let mut inv_h = DMatrix::identity(d, d);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        if g.amax() < opts.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir = -(&inv_h * &g);
        if dir.dot(&g) >= 0.0 {
            inv_h = DMatrix::identity(d, d);
            dir = -g.clone();
        }
        let slope = dir.dot(&g);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = &x + &dir * step;
            let fc = eval(&cand);
            if fc <= fx + 1e-4 * step * slope {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no descent possible at this resolution
            converged = g.amax() < opts.gradient_tolerance.sqrt();
            break;
        };
        let g_new = gradient(&mut eval, &x_new);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let id = DMatrix::<f64>::identity(d, d);
            let left = &id - &s * y.transpose() * rho;
            let right = &id - &y * s.transpose() * rho;
            inv_h = &left * &inv_h * &right + &s * s.transpose() * rho;
        }
        let small_change = (fx - f_new).abs() <= 1e-12 * fx.abs().max(1.0);
        x = x_new;
        fx = f_new;
        g = g_new;
        if small_change && g.amax() < opts.gradient_tolerance.sqrt() {
            converged = true;
            break;
        }
        if evaluations.get() > opts.max_evaluations {
            break;
        }
    }
    Minimum {
        x,
        value: fx,
        iterations,
        evaluations: evaluations.get(),
        converged,
    }
}
