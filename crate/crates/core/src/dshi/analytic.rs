use std::f64::consts::PI;

use crate::dshi::DshiParams;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::trace::SpectrumTrace;

/// `2 pi t_d delta`, with delta the single-laser width.
fn decoherence(params: &DshiParams) -> f64 {
    2.0 * PI * params.delay_s() * params.single_laser_fwhm_hz()
}

/// `1 - e^{-x}(1 + x)`, accurate for small `x`.
fn carrier_limit(x: f64) -> f64 {
    if x < 1e-3 {
        x * x * (0.5 - x * (1.0 / 3.0 - x / 8.0))
    } else {
        -(-x).exp_m1() - x * (-x).exp()
    }
}

/// `1 - sin(t)/t`.
fn one_minus_sinc(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        let t2 = t * t;
        t2 / 6.0 - t2 * t2 / 120.0
    } else {
        1.0 - t.sin() / t
    }
}

/// Coherence factor S2 at offset `nu = f - f_EOM`.
///
/// Written as the exact carrier value plus non-negative increments so the
/// removable singularity at `nu = 0` costs no precision.
pub fn coherence_factor(params: &DshiParams, offset_hz: f64) -> f64 {
    let x = decoherence(params);
    let theta = 2.0 * PI * params.delay_s() * offset_hz;
    let half = 0.5 * theta;
    let ripple = 2.0 * half.sin().powi(2) + x * one_minus_sinc(theta);
    carrier_limit(x) + (-x).exp() * ripple
}

/// Lorentzian factor S1 at offset `nu`; its FWHM is the combined width.
pub fn lorentzian_factor(params: &DshiParams, offset_hz: f64) -> f64 {
    let a = params.single_laser_fwhm_hz();
    let p0 = params.optical_power();
    if a == 0.0 {
        return 0.0;
    }
    p0 * p0 / (4.0 * PI) * a / (a * a + offset_hz * offset_hz)
}

/// Integrated power of the coherent delta term S3.
pub fn coherent_power(params: &DshiParams) -> f64 {
    let p0 = params.optical_power();
    0.5 * PI * p0 * p0 * (-decoherence(params)).exp()
}

/// Analytic beat-note PSD `S1 S2 + S3` on `grid`, in linear units.
///
/// The delta term is deposited into the single bin nearest `f_EOM` as
/// integrated power divided by the bin width.
pub fn analytic_psd(params: &DshiParams, grid: &FrequencyGrid) -> Result<SpectrumTrace> {
    let f_eom = params.eom_frequency_hz();
    let carrier_bin = grid.nearest_index(f_eom).ok_or_else(|| {
        Error::Domain(format!("grid [{}, {}] Hz does not cover f_EOM = {f_eom} Hz", grid.start(), grid.end()))
    })?;
    let mut values: Vec<f64> = grid
        .points()
        .map(|f| {
            let nu = f - f_eom;
            lorentzian_factor(params, nu) * coherence_factor(params, nu)
        })
        .collect();
    values[carrier_bin] += coherent_power(params) / grid.step();
    SpectrumTrace::linear(*grid, values)
}
