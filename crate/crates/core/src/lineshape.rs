//! Gaussian, Lorentzian and Voigt lineshapes, level widths, and the
//! closed-form Voigt width approximation.
//!
//! All densities are normalized to unit area over the real line. Widths are
//! always full widths; "dB below peak" is `10 log10` of a power ratio.

use std::borrow::Cow;
use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

/// Exact half-power level, `10 log10(2)` dB.
pub const HALF_POWER_DB: f64 = 3.010_299_956_639_812;

/// Default Gaussian resolution of the numeric Voigt convolution.
pub const VOIGT_SAMPLES_PER_FWHM: usize = 40;

/// Gaussian support kept by the convolution, in units of its FWHM on each side.
const GAUSSIAN_SUPPORT_FWHM: f64 = 3.0;

/// Anything sampled on a uniform frequency grid that can be viewed as power.
pub trait SampledSpectrum {
    fn grid(&self) -> &FrequencyGrid;

    /// Values proportional to linear power.
    fn linear_values(&self) -> Cow<'_, [f64]>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineshapeParams {
    pub center: f64,
    pub fwhm_gaussian: f64,
    pub fwhm_lorentzian: f64,
}

/// Spectral density (1/Hz) sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTrace {
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
}

impl DensityTrace {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.step())
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl SampledSpectrum for DensityTrace {
    fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    fn linear_values(&self) -> Cow<'_, [f64]> {
        Cow::Borrowed(&self.values)
    }
}

pub(crate) fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => step * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

pub fn gaussian_density(f: f64, f0: f64, fwhm: f64) -> f64 {
    let d = f - f0;
    2.0 * LN_2.sqrt() / (PI.sqrt() * fwhm) * (-4.0 * LN_2 * d * d / (fwhm * fwhm)).exp()
}

pub fn lorentzian_density(f: f64, f0: f64, fwhm: f64) -> f64 {
    let d = f - f0;
    fwhm / (2.0 * PI) / (d * d + 0.25 * fwhm * fwhm)
}

fn check_width(name: &str, fwhm: f64) -> Result<()> {
    if fwhm > 0.0 && fwhm.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} FWHM must be > 0, got {fwhm}")))
    }
}

pub fn eval_gaussian(grid: &FrequencyGrid, f0: f64, fwhm: f64) -> Result<DensityTrace> {
    check_width("Gaussian", fwhm)?;
    Ok(DensityTrace { grid: *grid, values: grid.points().map(|f| gaussian_density(f, f0, fwhm)).collect() })
}

pub fn eval_lorentzian(grid: &FrequencyGrid, f0: f64, fwhm: f64) -> Result<DensityTrace> {
    check_width("Lorentzian", fwhm)?;
    Ok(DensityTrace { grid: *grid, values: grid.points().map(|f| lorentzian_density(f, f0, fwhm)).collect() })
}

/// Numeric Gaussian-Lorentzian convolution evaluated pointwise.
///
/// The Gaussian is sampled on a uniform sub-grid and interpolated linearly
/// between samples (renormalized so its trapezoidal area is one); each linear
/// segment is then integrated against the Lorentzian in closed form. The
/// Lorentzian is never truncated, so the profile keeps unit area on the real
/// line whatever the width ratio.
#[derive(Debug, Clone)]
pub struct VoigtProfile {
    center: f64,
    gamma: f64,
    lorentz_fwhm: f64,
    step: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl VoigtProfile {
    pub fn new(params: &LineshapeParams, samples_per_fwhm: usize) -> Result<Self> {
        check_width("Gaussian", params.fwhm_gaussian)?;
        check_width("Lorentzian", params.fwhm_lorentzian)?;
        if samples_per_fwhm < 2 {
            return Err(Error::invalid("Voigt convolution needs >= 2 samples per FWHM"));
        }
        let g = params.fwhm_gaussian;
        let step = g / samples_per_fwhm as f64;
        let half = (GAUSSIAN_SUPPORT_FWHM * samples_per_fwhm as f64).ceil() as i64;
        let nodes: Vec<f64> = (-half..=half).map(|k| k as f64 * step).collect();
        let mut weights: Vec<f64> = nodes.iter().map(|&u| gaussian_density(u, 0.0, g)).collect();
        let area = trapezoid(&weights, step);
        weights.iter_mut().for_each(|w| *w /= area);
        Ok(Self {
            center: params.center,
            gamma: 0.5 * params.fwhm_lorentzian,
            lorentz_fwhm: params.fwhm_lorentzian,
            step,
            nodes,
            weights,
        })
    }

    pub fn density(&self, f: f64) -> f64 {
        let d = f - self.center;
        let gamma = self.gamma;
        let h = self.step;
        let log_coeff = self.lorentz_fwhm / (4.0 * PI);
        let mut acc = 0.0;
        for (k, pair) in self.weights.windows(2).enumerate() {
            let (w0, w1) = (pair[0], pair[1]);
            if w0 == 0.0 && w1 == 0.0 {
                continue;
            }
            // Lorentzian argument runs from s0 down to s1 across the segment.
            let s0 = d - self.nodes[k];
            let s1 = s0 - h;
            let mass = atan_diff(s0 / gamma, s1 / gamma) / PI;
            // integral of s L(s) over [s1, s0]
            let first = log_coeff * (h * (s0 + s1) / (s1 * s1 + gamma * gamma)).ln_1p();
            let ramp = s0 * mass - first;
            acc += w0 * mass + (w1 - w0) / h * ramp;
        }
        acc.max(0.0)
    }
}

/// `atan(a) - atan(b)` without cancellation when `a` and `b` are large and
/// of equal sign.
fn atan_diff(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        ((a - b) / (1.0 + a * b)).atan()
    } else {
        a.atan() - b.atan()
    }
}

/// Voigt profile on `grid` by numeric convolution of the two normalized
/// shapes.
///
/// A component narrower than `grid.step / 100` is treated as a delta
/// function, returning the other shape unchanged.
pub fn eval_voigt_numeric(grid: &FrequencyGrid, params: &LineshapeParams) -> Result<DensityTrace> {
    let (g, l) = (params.fwhm_gaussian, params.fwhm_lorentzian);
    if !(g >= 0.0 && l >= 0.0) || !(g.is_finite() && l.is_finite()) {
        return Err(Error::invalid(format!("Voigt widths must be >= 0, got G={g}, L={l}")));
    }
    let negligible = grid.step() / 100.0;
    match (g < negligible, l < negligible) {
        (true, true) => Err(Error::invalid("Voigt needs at least one positive width")),
        (true, false) => eval_lorentzian(grid, params.center, l),
        (false, true) => eval_gaussian(grid, params.center, g),
        (false, false) => {
            let widest = g.max(l);
            if grid.step() > widest / 20.0 {
                return Err(Error::Resolution(format!(
                    "grid step {} Hz gives fewer than 20 samples across a {widest} Hz profile",
                    grid.step()
                )));
            }
            let profile = VoigtProfile::new(params, VOIGT_SAMPLES_PER_FWHM)?;
            Ok(DensityTrace { grid: *grid, values: grid.points().map(|f| profile.density(f)).collect() })
        }
    }
}

/// Closed-form Voigt FWHM from its Lorentzian and Gaussian FWHMs.
pub fn voigt_fwhm_approx(fwhm_lorentzian: f64, fwhm_gaussian: f64) -> Result<f64> {
    let (l, g) = (fwhm_lorentzian, fwhm_gaussian);
    if !(l >= 0.0 && g >= 0.0) {
        return Err(Error::invalid(format!("widths must be >= 0, got L={l}, G={g}")));
    }
    Ok(0.5 * (1.0692 * l + (0.866639 * l * l + 4.0 * g * g).sqrt()))
}

/// Inverts [`voigt_fwhm_approx`] for the Gaussian width. `None` when no
/// non-negative Gaussian width reproduces `fwhm_voigt` (the Lorentzian alone
/// is already wider).
pub fn gaussian_from_voigt(fwhm_voigt: f64, fwhm_lorentzian: f64) -> Option<f64> {
    let lhs = 2.0 * fwhm_voigt - 1.0692 * fwhm_lorentzian;
    if lhs < 0.0 {
        return None;
    }
    let disc = lhs * lhs - 0.866639 * fwhm_lorentzian * fwhm_lorentzian;
    (disc >= 0.0).then(|| 0.5 * disc.sqrt())
}

/// Result of a level-width measurement that tolerates tied maxima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthMeasurement {
    pub width: f64,
    pub peak_index: usize,
    pub peak_value: f64,
    /// More than one sample shares the maximum; the lowest-frequency one was used.
    pub tied: bool,
}

/// Full width at `level_db` below the global maximum of a linear-power slice.
pub fn measure_width(values: &[f64], step: f64, level_db: f64) -> Result<WidthMeasurement> {
    if !(level_db > 0.0) {
        return Err(Error::invalid(format!("level must be > 0 dB, got {level_db}")));
    }
    if values.len() < 3 {
        return Err(Error::WidthUndefined("trace shorter than 3 samples".into()));
    }
    let (peak_index, peak_value) =
        values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    if !(peak_value > 0.0) {
        return Err(Error::WidthUndefined("trace has no positive maximum".into()));
    }
    let tied = values.iter().filter(|&&v| v == peak_value).count() > 1;
    if peak_index == 0 || peak_index == values.len() - 1 {
        return Err(Error::WidthUndefined("maximum lies on the grid edge".into()));
    }
    let threshold = peak_value * 10f64.powf(-level_db / 10.0);

    let left = (0..peak_index)
        .rev()
        .find(|&i| values[i] <= threshold)
        .map(|i| i as f64 + (threshold - values[i]) / (values[i + 1] - values[i]));
    let right = (peak_index + 1..values.len())
        .find(|&i| values[i] <= threshold)
        .map(|i| i as f64 - (threshold - values[i]) / (values[i - 1] - values[i]));

    match (left, right) {
        (Some(lo), Some(hi)) => Ok(WidthMeasurement { width: (hi - lo) * step, peak_index, peak_value, tied }),
        _ => Err(Error::WidthUndefined(format!("{level_db} dB level not crossed on both sides of the peak"))),
    }
}

/// Distance between the two `level_db` crossings nearest the global peak,
/// each located by linear interpolation.
pub fn width_at_level<S: SampledSpectrum + ?Sized>(trace: &S, level_db: f64) -> Result<f64> {
    let values = trace.linear_values();
    let m = measure_width(&values, trace.grid().step(), level_db)?;
    if m.tied {
        let n = values.iter().filter(|&&v| v == m.peak_value).count();
        return Err(Error::AmbiguousPeak(n));
    }
    Ok(m.width)
}
