//! Single two-level ion probed by a noisy laser, and the fits used on its
//! spectra and Rabi curves.
//!
//! Rabi frequencies are in Hz with a resonant pi-pulse lasting `1 / (2 Omega)`,
//! so noiseless flopping is `P(t) = sin^2(pi Omega t)`.

mod fits;
mod sim;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

pub use fits::{fit_damped_sine, fit_inverse_power, fit_lorentzian_peak};
pub use sim::{rabi_probability, simulate_carrier_spectrum, simulate_rabi};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detection {
    /// Average the excited-state probability of each trajectory.
    Expectation,
    /// Draw a quantum-jump outcome per shot.
    Projective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonProbeParams {
    pub rabi_frequency_hz: f64,
    pub pulse_duration_s: f64,
    /// Laser detuning from resonance.
    pub detuning_grid: FrequencyGrid,
    pub shots_per_point: usize,
    pub rng_seed: u64,
    /// Integrator step; the largest stable step is used when `None`.
    #[serde(default)]
    pub time_step_s: Option<f64>,
    #[serde(default = "default_detection")]
    pub detection: Detection,
}

fn default_detection() -> Detection {
    Detection::Expectation
}

impl IonProbeParams {
    pub fn new(
        rabi_frequency_hz: f64,
        pulse_duration_s: f64,
        detuning_grid: FrequencyGrid,
        shots_per_point: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        let p = Self {
            rabi_frequency_hz,
            pulse_duration_s,
            detuning_grid,
            shots_per_point,
            rng_seed,
            time_step_s: None,
            detection: Detection::Expectation,
        };
        p.validate()?;
        Ok(p)
    }

    /// Detuning grid of `2 half_points + 1` points spanning `+-span_over_t / T`.
    pub fn symmetric_grid(pulse_duration_s: f64, span_over_t: f64, half_points: usize) -> Result<FrequencyGrid> {
        if !(pulse_duration_s > 0.0) || half_points == 0 {
            return Err(Error::invalid("pulse duration and grid size must be positive"));
        }
        FrequencyGrid::centered(0.0, span_over_t / pulse_duration_s / half_points as f64, half_points)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.rabi_frequency_hz > 0.0 && self.rabi_frequency_hz.is_finite()) {
            return Err(Error::invalid("Rabi frequency must be > 0"));
        }
        if !(self.pulse_duration_s > 0.0 && self.pulse_duration_s.is_finite()) {
            return Err(Error::invalid("pulse duration must be > 0"));
        }
        if self.shots_per_point == 0 {
            return Err(Error::invalid("need at least one shot per point"));
        }
        if let Some(dt) = self.time_step_s {
            if !(dt > 0.0) {
                return Err(Error::invalid("time step must be > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserNoise {
    /// Lorentzian laser linewidth from Wiener phase noise.
    pub fwhm_hz: f64,
    /// Per-shot fractional spread of the Rabi frequency.
    pub rin_sigma: f64,
}

impl LaserNoise {
    pub fn new(fwhm_hz: f64, rin_sigma: f64) -> Result<Self> {
        if !(fwhm_hz >= 0.0 && fwhm_hz.is_finite()) || !(rin_sigma >= 0.0 && rin_sigma.is_finite()) {
            return Err(Error::invalid("laser noise parameters must be >= 0"));
        }
        Ok(Self { fwhm_hz, rin_sigma })
    }

    pub fn none() -> Self {
        Self { fwhm_hz: 0.0, rin_sigma: 0.0 }
    }

    pub fn is_noiseless(&self) -> bool {
        self.fwhm_hz == 0.0 && self.rin_sigma == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    DetuningHz,
    TimeS,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationCurve {
    pub abscissa_kind: Abscissa,
    pub abscissa: Vec<f64>,
    pub probability: Vec<f64>,
    /// Standard error of each mean.
    pub std_error: Vec<f64>,
    pub shot_count: usize,
}
