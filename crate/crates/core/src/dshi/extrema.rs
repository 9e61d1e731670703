use serde::{Deserialize, Serialize};

use crate::dshi::DshiParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Peak,
    Trough,
}

impl ExtremumKind {
    /// `cos(j pi) = -1` makes the envelope bulge (peak); `+1` a trough.
    pub fn of_order(order: u32) -> Self {
        if order % 2 == 1 {
            ExtremumKind::Peak
        } else {
            ExtremumKind::Trough
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub frequency_hz: f64,
    pub kind: ExtremumKind,
    pub order: u32,
}

/// Upper-sideband envelope extrema at `f_EOM + j c / (2 n L)`, `j = 1..=max_order`.
pub fn predict_extrema(params: &DshiParams, max_order: u32) -> Result<Vec<Extremum>> {
    if max_order == 0 {
        return Err(Error::invalid("max_order must be >= 1"));
    }
    if !(params.laser_fwhm_hz() > 0.0) {
        return Err(Error::invalid("extrema prediction needs a positive linewidth"));
    }
    let spacing = params.extremum_spacing_hz();
    Ok((1..=max_order)
        .map(|j| Extremum {
            frequency_hz: params.eom_frequency_hz() + j as f64 * spacing,
            kind: ExtremumKind::of_order(j),
            order: j,
        })
        .collect())
}

/// Model peak-to-trough contrast in dB between envelope orders `peak_order`
/// and `trough_order`, evaluated at the params' linewidth.
///
/// At the extrema the sine term of the coherence factor vanishes, leaving
/// `S ~ a/(a^2 + nu^2) * (1 - e^{-x} cos(j pi))`.
pub fn contrast_db(params: &DshiParams, peak_order: u32, trough_order: u32) -> f64 {
    let spacing = params.extremum_spacing_hz();
    let a = params.single_laser_fwhm_hz();
    let x = 2.0 * std::f64::consts::PI * params.delay_s() * a;
    let decay = (-x).exp();
    let arm = |j: u32| {
        let nu = j as f64 * spacing;
        let cos = if j % 2 == 1 { -1.0 } else { 1.0 };
        (1.0 - decay * cos) / (a * a + nu * nu)
    };
    10.0 * (arm(peak_order) / arm(trough_order)).log10()
}
