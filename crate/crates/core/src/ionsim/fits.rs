use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::estimate::fit::{fit_least_squares, Bounds, CurveModel, FitResult, FnModel};
use crate::ionsim::ExcitationCurve;
use crate::lineshape::{measure_width, HALF_POWER_DB};

struct LorentzianPeak;

impl CurveModel for LorentzianPeak {
    fn n_params(&self) -> usize {
        4
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        let h = 0.5 * p[1];
        p[2] * h * h / ((x - p[0]).powi(2) + h * h) + p[3]
    }

    fn gradient(&self, x: f64, p: &[f64], out: &mut [f64]) -> bool {
        let h = 0.5 * p[1];
        let u = x - p[0];
        let d = u * u + h * h;
        let shape = h * h / d;
        out[0] = p[2] * 2.0 * u * h * h / (d * d);
        out[1] = p[2] * h * u * u / (d * d);
        out[2] = shape;
        out[3] = 1.0;
        true
    }
}

fn check_curve(curve: &ExcitationCurve) -> Result<()> {
    if curve.abscissa.len() != curve.probability.len() {
        return Err(Error::invalid("curve abscissa and probability lengths differ"));
    }
    Ok(())
}

/// Fits `amplitude (w/2)^2 / ((x - x0)^2 + (w/2)^2) + offset`.
/// Parameters come back as `[center, fwhm, amplitude, offset]`.
pub fn fit_lorentzian_peak(curve: &ExcitationCurve) -> Result<FitResult> {
    check_curve(curve)?;
    let (x, y) = (&curve.abscissa, &curve.probability);
    if x.len() < 5 {
        return Err(Error::InsufficientData(format!("{} points for a 4-parameter fit", x.len())));
    }
    let (peak, top) =
        y.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    let floor = y.iter().copied().fold(f64::INFINITY, f64::min);
    let amplitude = top - floor;
    if !(amplitude > 1e-12 * top.abs().max(1e-300)) {
        return Err(Error::Initialization("curve has no peak above its baseline".into()));
    }
    let span = x[x.len() - 1] - x[0];
    let step = span / (x.len() - 1) as f64;
    let lifted: Vec<f64> = y.iter().map(|v| v - floor).collect();
    let fwhm = measure_width(&lifted, step, HALF_POWER_DB).map(|m| m.width).unwrap_or(span / 4.0).max(step);
    let init = [x[peak], fwhm, amplitude, floor];
    let bounds = Bounds::new(
        vec![f64::NEG_INFINITY, 1e-9 * step, f64::NEG_INFINITY, f64::NEG_INFINITY],
        vec![f64::INFINITY; 4],
    )?;
    let mut fit = fit_least_squares(&LorentzianPeak, x, y, &init, &bounds)?;
    fit.parameters[1] = fit.parameters[1].abs();
    Ok(fit)
}

fn damped_sine(t: f64, p: &[f64]) -> f64 {
    p[4] - 0.5 * p[2] * (-t / p[1]).exp() * (2.0 * PI * p[0] * t + p[3]).cos()
}

/// Fits `offset - contrast e^{-t/tau} cos(2 pi Omega t + phase) / 2`.
/// Parameters come back as `[omega_hz, tau_s, contrast, phase, offset]`.
pub fn fit_damped_sine(curve: &ExcitationCurve) -> Result<FitResult> {
    check_curve(curve)?;
    let (t, y) = (&curve.abscissa, &curve.probability);
    let n = t.len();
    if n < 12 {
        return Err(Error::InsufficientData(format!("{n} samples are too few for a damped sine")));
    }
    let t0 = t[0];
    let span = t[n - 1] - t0;
    let dt = span / (n - 1) as f64;
    let mean = y.iter().sum::<f64>() / n as f64;

    let padded = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = y.iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
    buf.resize(padded, Complex64::new(0.0, 0.0));
    FftPlanner::<f64>::new().plan_fft_forward(padded).process(&mut buf);
    let mags: Vec<f64> = buf[..padded / 2].iter().map(|c| c.norm()).collect();
    let k = (1..mags.len() - 1)
        .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
        .ok_or_else(|| Error::InsufficientData("no spectral content".into()))?;
    let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let omega = (k as f64 + shift) / (padded as f64 * dt);
    if !(omega * span >= 3.0) {
        return Err(Error::InsufficientData(format!(
            "only {:.2} oscillation periods in the record, need 3",
            omega * span
        )));
    }
    let phase = ((-buf[k]).arg() - 2.0 * PI * omega * t0).rem_euclid(2.0 * PI);

    let third = n / 3;
    let spread = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        (s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / s.len() as f64).sqrt()
    };
    let (early, late) = (spread(&y[..third]), spread(&y[n - third..]));
    let gap = t[n - third] - t[0];
    let tau = if early > 1.05 * late && late > 0.0 { gap / (early / late).ln() } else { 10.0 * span };
    let contrast = 2.0 * std::f64::consts::SQRT_2 * early * (t0 / tau).exp();

    let init = [omega, tau, contrast, phase, mean];
    let bounds = Bounds::new(
        vec![0.0, 1e-6 * dt, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
        vec![f64::INFINITY; 5],
    )?;
    fit_least_squares(&FnModel::new(5, damped_sine), t, y, &init, &bounds)
}

/// Fits `y = A / x^p` in log-log space, with `p` free or fixed.
/// Parameters come back as `[A, p]`.
pub fn fit_inverse_power(points: &[(f64, f64)], fixed_exponent: Option<f64>) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!("{} points, need >= 3", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Domain("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mean_x = lx.iter().sum::<f64>() / lx.len() as f64;
    match fixed_exponent {
        Some(p) => {
            let init = ly.iter().zip(&lx).map(|(y, x)| y + p * x).sum::<f64>() / lx.len() as f64;
            let model = FnModel::new(1, move |x, q: &[f64]| q[0] - p * x);
            let fit = fit_least_squares(&model, &lx, &ly, &[init], &Bounds::unbounded(1))?;
            let a = fit.parameters[0].exp();
            let var = fit.covariance[0][0];
            Ok(FitResult { parameters: vec![a, p], covariance: vec![vec![a * a * var, 0.0], vec![0.0, 0.0]], ..fit })
        }
        None => {
            let mean_y = ly.iter().sum::<f64>() / ly.len() as f64;
            let sxx: f64 = lx.iter().map(|x| (x - mean_x).powi(2)).sum();
            if !(sxx > 0.0) {
                return Err(Error::Initialization("all abscissae coincide".into()));
            }
            let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
            let p0 = -sxy / sxx;
            let init = [mean_y + p0 * mean_x, p0];
            let model = FnModel::new(2, |x, q: &[f64]| q[0] - q[1] * x);
            let fit = fit_least_squares(&model, &lx, &ly, &init, &Bounds::unbounded(2))?;
            let a = fit.parameters[0].exp();
            let c = &fit.covariance;
            Ok(FitResult {
                parameters: vec![a, fit.parameters[1]],
                covariance: vec![vec![a * a * c[0][0], a * c[0][1]], vec![a * c[1][0], c[1][1]]],
                ..fit
            })
        }
    }
}
