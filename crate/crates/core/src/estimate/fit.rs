//! Bounded Levenberg-Marquardt least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar model `y = f(x; p)`.
pub trait CurveModel {
    fn n_params(&self) -> usize;

    fn value(&self, x: f64, params: &[f64]) -> f64;

    /// Writes `df/dp` into `out` and returns `true`, or returns `false` to
    /// fall back to forward differences.
    fn gradient(&self, _x: f64, _params: &[f64], _out: &mut [f64]) -> bool {
        false
    }
}

/// Adapter for closures.
pub struct FnModel<F> {
    n: usize,
    f: F,
}

impl<F: Fn(f64, &[f64]) -> f64> FnModel<F> {
    pub fn new(n_params: usize, f: F) -> Self {
        Self { n: n_params, f }
    }
}

impl<F: Fn(f64, &[f64]) -> f64> CurveModel for FnModel<F> {
    fn n_params(&self) -> usize {
        self.n
    }

    fn value(&self, x: f64, params: &[f64]) -> f64 {
        (self.f)(x, params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(n: usize) -> Self {
        Self { lower: vec![f64::NEG_INFINITY; n], upper: vec![f64::INFINITY; n] }
    }

    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::invalid("bounds must pair up with lower <= upper"));
        }
        Ok(Self { lower, upper })
    }

    fn project(&self, p: &mut [f64]) {
        for ((v, l), u) in p.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*l, *u);
        }
    }

    fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| *l <= *v && *v <= *u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative cost decrease that counts as converged.
    pub ftol: f64,
    pub gtol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 200, ftol: 1e-10, gtol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<f64>,
    /// `s^2 (J^T J)^-1` with `s^2 = ||r||^2 / (m - n)`.
    pub covariance: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn std_error(&self, i: usize) -> f64 {
        self.covariance[i][i].max(0.0).sqrt()
    }
}

pub fn fit_least_squares<M: CurveModel + ?Sized>(
    model: &M,
    x: &[f64],
    y: &[f64],
    init: &[f64],
    bounds: &Bounds,
) -> Result<FitResult> {
    fit_least_squares_with(model, x, y, init, bounds, &FitOptions::default())
}

pub fn fit_least_squares_with<M: CurveModel + ?Sized>(
    model: &M,
    x: &[f64],
    y: &[f64],
    init: &[f64],
    bounds: &Bounds,
    opts: &FitOptions,
) -> Result<FitResult> {
    let n = model.n_params();
    let m = x.len();
    if init.len() != n || bounds.lower.len() != n {
        return Err(Error::invalid(format!("model has {n} parameters, got {} initial values", init.len())));
    }
    if y.len() != m {
        return Err(Error::invalid("x and y lengths differ"));
    }
    if m < n + 1 {
        return Err(Error::InsufficientData(format!("{m} points for {n} parameters")));
    }
    if x.iter().chain(y).chain(init).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite data or initial values"));
    }
    if !bounds.contains(init) {
        return Err(Error::invalid("initial parameters outside bounds"));
    }

    let mut p = init.to_vec();
    let mut r = residuals(model, x, y, &p);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::Initialization("model is not finite at the initial parameters".into()));
    }
    let mut jac = jacobian(model, x, &p, bounds);
    check_rank(&jac)?;

    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if grad.amax() < opts.gtol || cost == 0.0 {
            converged = true;
            break;
        }
        let mut damped = jtj.clone();
        for i in 0..n {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
        }
        let Some(step) = damped.cholesky().map(|c| c.solve(&grad)) else {
            lambda *= 10.0;
            continue;
        };
        let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        bounds.project(&mut trial);
        let r_trial = residuals(model, x, y, &trial);
        let cost_trial = r_trial.norm_squared();
        if cost_trial.is_finite() && cost_trial < cost {
            let rel = (cost - cost_trial) / cost;
            p = trial;
            r = r_trial;
            cost = cost_trial;
            jac = jacobian(model, x, &p, bounds);
            lambda = (lambda / 3.0).max(1e-15);
            if rel < opts.ftol {
                converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e16 {
                // no downhill step exists at working precision
                converged = true;
                break;
            }
        }
    }

    let dof = (m - n) as f64;
    let s2 = cost / dof;
    let jtj = jac.transpose() * &jac;
    let inv =
        jtj.clone().try_inverse().unwrap_or_else(|| jtj.pseudo_inverse(1e-14).unwrap_or_else(|_| DMatrix::zeros(n, n)));
    let covariance = (0..n).map(|i| (0..n).map(|j| 0.5 * s2 * (inv[(i, j)] + inv[(j, i)])).collect()).collect();
    Ok(FitResult { parameters: p, covariance, residual_norm: cost.sqrt(), converged, iterations })
}

fn residuals<M: CurveModel + ?Sized>(model: &M, x: &[f64], y: &[f64], p: &[f64]) -> DVector<f64> {
    DVector::from_iterator(x.len(), x.iter().zip(y).map(|(&xi, &yi)| yi - model.value(xi, p)))
}

fn jacobian<M: CurveModel + ?Sized>(model: &M, x: &[f64], p: &[f64], bounds: &Bounds) -> DMatrix<f64> {
    let n = p.len();
    let mut jac = DMatrix::zeros(x.len(), n);
    let mut row = vec![0.0; n];
    let mut shifted = p.to_vec();
    for (i, &xi) in x.iter().enumerate() {
        if model.gradient(xi, p, &mut row) {
            for k in 0..n {
                jac[(i, k)] = row[k];
            }
            continue;
        }
        let base = model.value(xi, p);
        for k in 0..n {
            let mut h = (1e-6 * p[k].abs()).max(1e-12);
            if p[k] + h > bounds.upper[k] {
                h = -h;
            }
            shifted[k] = p[k] + h;
            jac[(i, k)] = (model.value(xi, &shifted) - base) / h;
            shifted[k] = p[k];
        }
    }
    jac
}

fn check_rank(jac: &DMatrix<f64>) -> Result<()> {
    let n = jac.ncols();
    let norms: Vec<f64> = (0..n).map(|k| jac.column(k).norm()).collect();
    if let Some(k) = norms.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Initialization(format!("parameter {k} has no effect on the model at init")));
    }
    let mut scaled = jac.clone();
    for (k, norm) in norms.iter().enumerate() {
        scaled.column_mut(k).scale_mut(1.0 / norm);
    }
    let eig = (scaled.transpose() * &scaled).symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(lo > 1e-13 * hi) {
        return Err(Error::Initialization("normal equations are singular at init".into()));
    }
    Ok(())
}
