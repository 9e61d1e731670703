//! Linewidth from the contrast of two adjacent coherence-envelope extrema.

use std::collections::BTreeSet;

use crate::dshi::{contrast_db, DshiParams, ExtremumKind};
use crate::error::{Error, Result};
use crate::estimate::{EstimateFlag, EstimationMethod, LinewidthEstimate};
use crate::lineshape::SampledSpectrum;

const SEARCH_LO_HZ: f64 = 0.1;
const SEARCH_HI_HZ: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    /// Extrema closer than this to the carrier may sit on servo bumps.
    pub servo_band_hz: f64,
    /// Half-width of the extremum search window, in extremum spacings.
    pub search_fraction: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { servo_band_hz: 100e3, search_fraction: 0.25 }
    }
}

/// Confirms an envelope extremum of the right kind inside `window`.
///
/// Near the carrier the Lorentzian wing slope can swamp the envelope ripple,
/// so a sign change of the discrete derivative counts in either the raw trace
/// or the trace multiplied by `nu^2`.
fn confirm_extremum(
    values: &[f64],
    freqs: impl Fn(usize) -> f64,
    carrier: f64,
    window: (usize, usize),
    kind: ExtremumKind,
) -> bool {
    let turns = |y: &dyn Fn(usize) -> f64| {
        (window.0 + 1..window.1).any(|i| {
            let (a, b, c) = (y(i - 1), y(i), y(i + 1));
            match kind {
                ExtremumKind::Peak => b >= a && b > c,
                ExtremumKind::Trough => b <= a && b < c,
            }
        })
    };
    turns(&|i| values[i]) || turns(&|i| values[i] * (freqs(i) - carrier).powi(2))
}

/// Three-point quadratic interpolation of `values` at fractional index `x`.
fn quadratic_at(values: &[f64], x: f64) -> f64 {
    let i = (x.round() as usize).clamp(1, values.len() - 2);
    let u = x - i as f64;
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    b + 0.5 * u * (c - a) + 0.5 * u * u * (a - 2.0 * b + c)
}

/// Measures the peak/trough contrast at the predicted extremum positions and
/// solves the envelope model for the combined linewidth.
///
/// `params` supplies the interferometer geometry and carrier; its linewidth
/// is ignored.
pub fn estimate_envelope_contrast<S: SampledSpectrum + ?Sized>(
    trace: &S,
    params: &DshiParams,
    peak_order: u32,
    trough_order: u32,
    opts: &EnvelopeOptions,
) -> Result<LinewidthEstimate> {
    if peak_order.abs_diff(trough_order) != 1 || peak_order == 0 || trough_order == 0 {
        return Err(Error::invalid(format!(
            "orders must be adjacent and >= 1, got peak {peak_order}, trough {trough_order}"
        )));
    }
    if ExtremumKind::of_order(peak_order) != ExtremumKind::Peak {
        return Err(Error::invalid(format!("order {peak_order} is a trough; peaks have odd order")));
    }
    let grid = *trace.grid();
    let values = trace.linear_values();
    let carrier = params.eom_frequency_hz();
    let spacing = params.extremum_spacing_hz();

    let measure = |order: u32, kind: ExtremumKind| -> Result<(f64, f64)> {
        let f = carrier + order as f64 * spacing;
        let not_found = Error::ExtremaNotFound { order, frequency_hz: f };
        let half = opts.search_fraction * spacing;
        if !grid.contains(f - half) || !grid.contains(f + half) {
            return Err(not_found);
        }
        let window = (
            grid.nearest_index(f - half).ok_or(Error::ExtremaNotFound { order, frequency_hz: f })?,
            grid.nearest_index(f + half).ok_or(Error::ExtremaNotFound { order, frequency_hz: f })?,
        );
        if window.1 < window.0 + 2 || !confirm_extremum(&values, |i| grid.point(i), carrier, window, kind) {
            return Err(not_found);
        }
        let x = (f - grid.start()) / grid.step();
        Ok((f, quadratic_at(&values, x)))
    };
    let (f_peak, s_peak) = measure(peak_order, ExtremumKind::Peak)?;
    let (f_trough, s_trough) = measure(trough_order, ExtremumKind::Trough)?;
    if !(s_peak > 0.0 && s_trough > 0.0) {
        return Err(Error::NoSolution("non-positive power at an extremum".into()));
    }
    let measured = 10.0 * (s_peak / s_trough).log10();

    let model = |df: f64| -> Result<f64> { Ok(contrast_db(&params.with_laser_fwhm(df)?, peak_order, trough_order)) };
    let (top, bottom) = (model(SEARCH_LO_HZ)?, model(SEARCH_HI_HZ)?);
    if !(measured <= top && measured >= bottom) {
        return Err(Error::NoSolution(format!(
            "contrast {measured:.4} dB outside the model range [{bottom:.4}, {top:.4}] dB"
        )));
    }
    let (mut lo, mut hi) = (SEARCH_LO_HZ.ln(), SEARCH_HI_HZ.ln());
    let mut iterations = 0;
    while hi - lo > 1e-13 && iterations < 200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if model(mid.exp())? > measured {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let df = (0.5 * (lo + hi)).exp();
    let residual = ((model(df)? - measured) / measured).abs();

    let mut flags = BTreeSet::new();
    if (f_peak - carrier).abs() < opts.servo_band_hz || (f_trough - carrier).abs() < opts.servo_band_hz {
        flags.insert(EstimateFlag::ServoContaminated);
    }
    Ok(LinewidthEstimate::from_widths(EstimationMethod::EnvelopeContrast, df, 0.0, iterations, residual, flags))
}
