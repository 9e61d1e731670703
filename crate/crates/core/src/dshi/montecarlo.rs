//! Time-domain Monte-Carlo oracle for the analytic beat-note model.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dshi::flicker::FlickerBank;
use crate::dshi::{DshiParams, NoiseModel};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::trace::{PowerUnit, SpectrumTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub sample_rate_hz: f64,
    /// Length of each Welch segment; sets the bin width `1 / duration`.
    pub segment_duration_s: f64,
    pub segments: usize,
    pub seed: u64,
    /// Half-width of the returned band around `f_EOM`.
    pub span_hz: f64,
}

impl SimConfig {
    /// 8x oversampling, 5 ms segments, 64 segments, +-200 kHz band.
    pub fn for_params(params: &DshiParams) -> Self {
        Self {
            sample_rate_hz: 8.0 * params.eom_frequency_hz(),
            segment_duration_s: 5e-3,
            segments: 64,
            seed: 0,
            span_hz: 200e3,
        }
    }

    fn validate(&self, params: &DshiParams) -> Result<()> {
        let f_eom = params.eom_frequency_hz();
        if !(self.sample_rate_hz >= 8.0 * f_eom) {
            return Err(Error::invalid(format!(
                "sample rate {} Hz is below 8 f_EOM = {} Hz",
                self.sample_rate_hz,
                8.0 * f_eom
            )));
        }
        if self.segments < 16 {
            return Err(Error::invalid(format!("need >= 16 segments, got {}", self.segments)));
        }
        if !(self.segment_duration_s >= 50.0 * params.delay_s()) {
            return Err(Error::Resolution(format!(
                "segment of {} s is shorter than 50 t_d = {} s",
                self.segment_duration_s,
                50.0 * params.delay_s()
            )));
        }
        if !(self.span_hz > 0.0) || f_eom + self.span_hz >= 0.5 * self.sample_rate_hz || self.span_hz >= f_eom {
            return Err(Error::invalid(format!(
                "span {} Hz must be positive and keep the band inside (0, Nyquist)",
                self.span_hz
            )));
        }
        Ok(())
    }
}

struct Plan {
    samples: usize,
    lead: usize,
    delay_samples: f64,
    band_lo: usize,
    band_hi: usize,
    bin_hz: f64,
}

impl Plan {
    fn new(params: &DshiParams, cfg: &SimConfig) -> Result<Self> {
        let samples = (cfg.segment_duration_s * cfg.sample_rate_hz).round() as usize;
        let bin_hz = cfg.sample_rate_hz / samples as f64;
        let delay_samples = params.delay_s() * cfg.sample_rate_hz;
        let f_eom = params.eom_frequency_hz();
        let band_lo = ((f_eom - cfg.span_hz) / bin_hz).ceil() as usize;
        let band_hi = ((f_eom + cfg.span_hz) / bin_hz).floor() as usize;
        if band_hi <= band_lo + 1 {
            return Err(Error::Resolution("band holds fewer than three bins".into()));
        }
        Ok(Self { samples, lead: delay_samples.ceil() as usize + 1, delay_samples, band_lo, band_hi, bin_hz })
    }
}

/// Welch-averaged PSD of the simulated photocurrent around `f_EOM`.
///
/// A single laser field is drawn with Wiener phase noise (single-arm field
/// autocorrelation `exp(-pi (Df/2) |tau|)`), optional octave-bank flicker
/// and white intensity noise. One copy is delayed by `t_d` (fractional
/// delay by linear interpolation of the phase) and shifted by `f_EOM`.
/// Segment `k` uses ChaCha stream `k` of the master seed (intensity noise
/// on stream `k | 2^32`), and segments are summed in index order, so the
/// result is independent of the thread count.
pub fn simulate_time_domain(params: &DshiParams, noise: &NoiseModel, cfg: &SimConfig) -> Result<SpectrumTrace> {
    cfg.validate(params)?;
    if (noise.white_fm_fwhm_hz - params.laser_fwhm_hz()).abs() > 1e-9 * params.laser_fwhm_hz().max(1.0) {
        return Err(Error::invalid(format!(
            "noise model white-FM width {} Hz disagrees with the interferometer linewidth {} Hz",
            noise.white_fm_fwhm_hz,
            params.laser_fwhm_hz()
        )));
    }
    let plan = Plan::new(params, cfg)?;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(plan.samples);
    let window: Vec<f64> =
        (0..plan.samples).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / plan.samples as f64).cos()).collect();
    let norm = 2.0 / (cfg.sample_rate_hz * window.iter().map(|w| w * w).sum::<f64>());

    let spectra: Vec<Vec<f64>> = (0..cfg.segments)
        .into_par_iter()
        .map(|seg| {
            let signal = photocurrent(params, noise, cfg, &plan, seg as u64);
            let mut buf: Vec<Complex64> = signal.iter().zip(&window).map(|(s, w)| Complex64::new(s * w, 0.0)).collect();
            fft.process(&mut buf);
            buf[plan.band_lo..=plan.band_hi].iter().map(|x| norm * x.norm_sqr()).collect()
        })
        .collect();

    let bins = plan.band_hi - plan.band_lo + 1;
    let mut mean = vec![0.0; bins];
    for s in &spectra {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    let inv = 1.0 / cfg.segments as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    let grid = FrequencyGrid::new(plan.band_lo as f64 * plan.bin_hz, plan.bin_hz, bins)?;
    SpectrumTrace::new(grid, mean, PowerUnit::LinearPerHz, 1.5 * plan.bin_hz)
}

fn photocurrent(params: &DshiParams, noise: &NoiseModel, cfg: &SimConfig, plan: &Plan, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    // Intensity noise draws from its own stream so the phase realization
    // does not depend on rin_sigma.
    let mut rin_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rin_rng.set_stream(stream | 1 << 32);
    let dt = 1.0 / cfg.sample_rate_hz;
    let total = plan.lead + plan.samples;
    let white_sigma = (PI * noise.white_fm_fwhm_hz * dt).sqrt();
    let mut flicker = if noise.flicker_level > 0.0 {
        let f_min = 0.25 / (total as f64 * dt);
        let mut bank = FlickerBank::new(noise.flicker_level, f_min, cfg.sample_rate_hz / 20.0, dt)
            .expect("band validated by the sample-rate and duration checks");
        bank.reset(&mut rng);
        Some(bank)
    } else {
        None
    };

    let mut phase = Vec::with_capacity(total);
    let mut amp = Vec::with_capacity(total);
    let mut phi = 2.0 * PI * rng.random::<f64>();
    for _ in 0..total {
        phase.push(phi);
        let eps: f64 =
            if noise.rin_sigma > 0.0 { noise.rin_sigma * rin_rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
        amp.push((1.0 + eps).max(0.0).sqrt());
        if white_sigma > 0.0 {
            phi += white_sigma * rng.sample::<f64, _>(StandardNormal);
        }
        if let Some(bank) = flicker.as_mut() {
            phi += 2.0 * PI * bank.frequency() * dt;
            bank.advance(&mut rng);
        }
    }

    let field = (params.optical_power() / (2.0 * std::f64::consts::SQRT_2)).sqrt();
    let shift = params.eom_frequency_hz() / cfg.sample_rate_hz;
    let mut out: Vec<f64> = (0..plan.samples)
        .map(|k| {
            let j = k + plan.lead;
            let pos = j as f64 - plan.delay_samples;
            let i0 = pos.floor() as usize;
            let t = pos - i0 as f64;
            let phi_d = phase[i0] * (1.0 - t) + phase[i0 + 1] * t;
            let amp_d = amp[pos.round() as usize];
            let carrier = 2.0 * PI * (shift * k as f64).fract();
            let e1 = Complex64::from_polar(field * amp[j], phase[j]);
            let e2 = Complex64::from_polar(field * amp_d, phi_d + carrier);
            (e1 + e2).norm_sqr()
        })
        .collect();
    let dc = out.iter().sum::<f64>() / out.len() as f64;
    out.iter_mut().for_each(|x| *x -= dc);
    out
}
