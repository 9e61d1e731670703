//! Delayed self-heterodyne beat-note models.
//!
//! `laser_fwhm_hz` everywhere in this module is the *combined* two-arm
//! Lorentzian width of the beat; the laser under test is half of it.

mod analytic;
mod bumps;
mod extrema;
pub mod flicker;
mod montecarlo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{analytic_psd, coherence_factor, coherent_power, lorentzian_factor};
pub use bumps::{extract_servo_bumps, inject_servo_bumps, ServoBumpModel};
pub use extrema::{contrast_db, predict_extrema, Extremum, ExtremumKind};
pub use montecarlo::{simulate_time_domain, SimConfig};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Group index assumed for standard single-mode fiber near 1762 nm.
pub const DEFAULT_FIBER_INDEX: f64 = 1.468;

/// Interferometer configuration. The delay is derived, `t_d = n L / c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DshiParamsRaw", into = "DshiParamsRaw")]
pub struct DshiParams {
    optical_power: f64,
    eom_frequency_hz: f64,
    laser_fwhm_hz: f64,
    fiber_length_m: f64,
    fiber_index: f64,
    delay_s: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct DshiParamsRaw {
    optical_power: f64,
    eom_frequency_hz: f64,
    laser_fwhm_hz: f64,
    fiber_length_m: f64,
    fiber_index: f64,
}

impl TryFrom<DshiParamsRaw> for DshiParams {
    type Error = Error;

    fn try_from(r: DshiParamsRaw) -> Result<Self> {
        DshiParams::new(r.optical_power, r.eom_frequency_hz, r.laser_fwhm_hz, r.fiber_length_m, r.fiber_index)
    }
}

impl From<DshiParams> for DshiParamsRaw {
    fn from(p: DshiParams) -> Self {
        DshiParamsRaw {
            optical_power: p.optical_power,
            eom_frequency_hz: p.eom_frequency_hz,
            laser_fwhm_hz: p.laser_fwhm_hz,
            fiber_length_m: p.fiber_length_m,
            fiber_index: p.fiber_index,
        }
    }
}

impl DshiParams {
    pub fn new(
        optical_power: f64,
        eom_frequency_hz: f64,
        laser_fwhm_hz: f64,
        fiber_length_m: f64,
        fiber_index: f64,
    ) -> Result<Self> {
        if !(optical_power > 0.0 && optical_power.is_finite()) {
            return Err(Error::invalid("optical power must be > 0"));
        }
        if !(eom_frequency_hz > 0.0 && eom_frequency_hz.is_finite()) {
            return Err(Error::invalid("EOM frequency must be > 0"));
        }
        if !(laser_fwhm_hz >= 0.0 && laser_fwhm_hz.is_finite()) {
            return Err(Error::invalid("laser linewidth must be >= 0"));
        }
        if !(fiber_length_m > 0.0 && fiber_length_m.is_finite()) {
            return Err(Error::invalid("fiber length must be > 0"));
        }
        if !(fiber_index > 1.0 && fiber_index < 2.0) {
            return Err(Error::invalid(format!("fiber index must lie in (1, 2), got {fiber_index}")));
        }
        Ok(Self {
            optical_power,
            eom_frequency_hz,
            laser_fwhm_hz,
            fiber_length_m,
            fiber_index,
            delay_s: fiber_index * fiber_length_m / SPEED_OF_LIGHT,
        })
    }

    /// 5 km of fiber, 7 MHz EOM shift, unit power, 100 Hz combined width.
    pub fn reference() -> Self {
        Self::new(1.0, 7.0e6, 100.0, 5_000.0, DEFAULT_FIBER_INDEX).expect("valid reference")
    }

    pub fn optical_power(&self) -> f64 {
        self.optical_power
    }

    pub fn eom_frequency_hz(&self) -> f64 {
        self.eom_frequency_hz
    }

    pub fn laser_fwhm_hz(&self) -> f64 {
        self.laser_fwhm_hz
    }

    /// Single-laser linewidth, half the combined beat width.
    pub fn single_laser_fwhm_hz(&self) -> f64 {
        0.5 * self.laser_fwhm_hz
    }

    pub fn fiber_length_m(&self) -> f64 {
        self.fiber_length_m
    }

    pub fn fiber_index(&self) -> f64 {
        self.fiber_index
    }

    pub fn delay_s(&self) -> f64 {
        self.delay_s
    }

    /// Distance between adjacent coherence-envelope extrema, `c / (2 n L)`.
    pub fn extremum_spacing_hz(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.fiber_index * self.fiber_length_m)
    }

    pub fn with_optical_power(self, p: f64) -> Result<Self> {
        Self::new(p, self.eom_frequency_hz, self.laser_fwhm_hz, self.fiber_length_m, self.fiber_index)
    }

    pub fn with_eom_frequency(self, f: f64) -> Result<Self> {
        Self::new(self.optical_power, f, self.laser_fwhm_hz, self.fiber_length_m, self.fiber_index)
    }

    pub fn with_laser_fwhm(self, w: f64) -> Result<Self> {
        Self::new(self.optical_power, self.eom_frequency_hz, w, self.fiber_length_m, self.fiber_index)
    }

    pub fn with_fiber_length(self, l: f64) -> Result<Self> {
        Self::new(self.optical_power, self.eom_frequency_hz, self.laser_fwhm_hz, l, self.fiber_index)
    }

    pub fn with_fiber_index(self, n: f64) -> Result<Self> {
        Self::new(self.optical_power, self.eom_frequency_hz, self.laser_fwhm_hz, self.fiber_length_m, n)
    }
}

/// Laser noise description for the time-domain simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Combined Lorentzian beat width produced by white frequency noise.
    pub white_fm_fwhm_hz: f64,
    /// One-sided 1/f frequency-noise coefficient: `S_nu(f) = flicker_level / f`, Hz^2/Hz.
    pub flicker_level: f64,
    /// Fractional RMS intensity noise per sample.
    pub rin_sigma: f64,
}

impl NoiseModel {
    pub fn new(white_fm_fwhm_hz: f64, flicker_level: f64, rin_sigma: f64) -> Result<Self> {
        for (name, v) in [("white FM width", white_fm_fwhm_hz), ("flicker level", flicker_level), ("RIN", rin_sigma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(Self { white_fm_fwhm_hz, flicker_level, rin_sigma })
    }

    /// White frequency noise only.
    pub fn white(combined_fwhm_hz: f64) -> Result<Self> {
        Self::new(combined_fwhm_hz, 0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_is_derived_exactly() {
        let p = DshiParams::reference();
        assert_eq!(p.delay_s(), 1.468 * 5000.0 / SPEED_OF_LIGHT);
        assert!((p.delay_s() - 24.48e-6).abs() < 0.01e-6);
        assert!((p.extremum_spacing_hz() - 20.42e3).abs() < 5.0);
        assert!((p.extremum_spacing_hz() * 2.0 * p.delay_s() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(DshiParams::new(0.0, 7e6, 1.0, 5e3, 1.468).is_err());
        assert!(DshiParams::new(1.0, 0.0, 1.0, 5e3, 1.468).is_err());
        assert!(DshiParams::new(1.0, 7e6, -1.0, 5e3, 1.468).is_err());
        assert!(DshiParams::new(1.0, 7e6, 1.0, 0.0, 1.468).is_err());
        assert!(DshiParams::new(1.0, 7e6, 1.0, 5e3, 1.0).is_err());
        assert!(DshiParams::new(1.0, 7e6, 1.0, 5e3, 2.0).is_err());
        assert!(NoiseModel::new(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn serde_recomputes_delay() {
        let p = DshiParams::reference().with_fiber_length(2_500.0).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(!json.contains("delay"));
        let back: DshiParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        let bad = json.replace("1.468", "2.5");
        assert!(serde_json::from_str::<DshiParams>(&bad).is_err());
    }
}
