//! 1/f frequency noise as a bank of octave-spaced Ornstein-Uhlenbeck processes.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FlickerBank {
    rates: Vec<f64>,
    sigma: f64,
    decay: Vec<f64>,
    kick: Vec<f64>,
    state: Vec<f64>,
}

impl FlickerBank {
    /// Bank approximating `S_nu(f) = level / f` (one-sided) between
    /// `f_min` and `f_max`, one process per octave, sampled every `dt`.
    pub fn new(level: f64, f_min: f64, f_max: f64, dt: f64) -> Result<Self> {
        if !(level >= 0.0) || !(f_min > 0.0) || !(f_max > 2.0 * f_min) || !(dt > 0.0) {
            return Err(Error::invalid(format!(
                "flicker bank needs level >= 0 and f_max > 2 f_min (got {level}, {f_min}, {f_max})"
            )));
        }
        let octaves = (f_max / f_min).log2().floor() as usize;
        let rates: Vec<f64> = (0..=octaves).map(|k| 2.0 * PI * f_min * 2f64.powi(k as i32)).collect();
        let sigma = (level * LN_2).sqrt();
        let decay: Vec<f64> = rates.iter().map(|l| (-l * dt).exp()).collect();
        let kick = decay.iter().map(|d| sigma * (1.0 - d * d).sqrt()).collect();
        let n = rates.len();
        Ok(Self { rates, sigma, decay, kick, state: vec![0.0; n] })
    }

    /// Draws the stationary initial state.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for s in &mut self.state {
            *s = self.sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }

    /// Current instantaneous frequency deviation, Hz.
    pub fn frequency(&self) -> f64 {
        self.state.iter().sum()
    }

    /// Advances every process by one step with the exact discrete update.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for ((s, d), k) in self.state.iter_mut().zip(&self.decay).zip(&self.kick) {
            *s = *s * d + k * rng.sample::<f64, _>(StandardNormal);
        }
    }

    /// Exact one-sided frequency-noise PSD of the bank.
    pub fn psd(&self, f: f64) -> f64 {
        let w = 2.0 * PI * f;
        self.rates.iter().map(|&l| 4.0 * self.sigma * self.sigma * l / (l * l + w * w)).sum()
    }
}
