use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ionsim::{Abscissa, Detection, ExcitationCurve, IonProbeParams, LaserNoise};

/// Closed-form noiseless excitation probability.
pub fn rabi_probability(rabi_hz: f64, detuning_hz: f64, t: f64) -> f64 {
    let w2 = rabi_hz * rabi_hz + detuning_hz * detuning_hz;
    if w2 == 0.0 {
        return 0.0;
    }
    rabi_hz * rabi_hz / w2 * (PI * w2.sqrt() * t).sin().powi(2)
}

fn largest_step(rabi_hz: f64, max_detuning_hz: f64) -> f64 {
    1.0 / (50.0 * rabi_hz.hypot(max_detuning_hz))
}

fn checked_step(requested: Option<f64>, limit: f64) -> Result<f64> {
    match requested {
        Some(dt) if dt > limit * (1.0 + 1e-12) => {
            Err(Error::Resolution(format!("time step {dt} s exceeds the stable limit {limit} s")))
        }
        Some(dt) => Ok(dt),
        None => Ok(limit),
    }
}

/// Excited-state probability after one noisy pulse of length `duration`.
fn trajectory(
    rng: &mut ChaCha8Rng,
    rabi_hz: f64,
    detuning_hz: f64,
    duration: f64,
    max_dt: f64,
    noise: &LaserNoise,
) -> f64 {
    if duration <= 0.0 {
        return 0.0;
    }
    let steps = (duration / max_dt).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let scale = if noise.rin_sigma > 0.0 { 1.0 + noise.rin_sigma * rng.sample::<f64, _>(StandardNormal) } else { 1.0 };
    let omega = rabi_hz * scale;
    let kick = (2.0 * PI * noise.fwhm_hz * dt).sqrt();
    let hz = -detuning_hz;
    let norm = omega.hypot(hz);
    if norm == 0.0 {
        return 0.0;
    }
    let (sin, cos) = (PI * norm * dt).sin_cos();
    let s = sin / norm;
    let i = Complex64::i();
    let (mut g, mut e) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let mut phase: f64 = 0.0;
    for _ in 0..steps {
        let (sp, cp) = phase.sin_cos();
        let off = Complex64::new(omega * cp, -omega * sp) * s;
        // U = cos I - i sin (n . sigma)
        let u00 = Complex64::new(cos, -s * hz);
        let u11 = Complex64::new(cos, s * hz);
        let u01 = -i * off;
        let u10 = -i * off.conj();
        let ng = u00 * g + u01 * e;
        let ne = u10 * g + u11 * e;
        g = ng;
        e = ne;
        if kick > 0.0 {
            phase += kick * rng.sample::<f64, _>(StandardNormal);
        }
    }
    e.norm_sqr().clamp(0.0, 1.0)
}

struct PointStats {
    mean: f64,
    std_error: f64,
}

fn run_point(
    params: &IonProbeParams,
    noise: &LaserNoise,
    point: usize,
    detuning_hz: f64,
    duration: f64,
    max_dt: f64,
) -> PointStats {
    let shots = params.shots_per_point;
    let deterministic = noise.is_noiseless() && params.detection == Detection::Expectation;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for shot in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        rng.set_stream(((point as u64) << 32) | shot as u64);
        let p = trajectory(&mut rng, params.rabi_frequency_hz, detuning_hz, duration, max_dt, noise);
        if deterministic {
            return PointStats { mean: p, std_error: 0.0 };
        }
        let x = match params.detection {
            Detection::Expectation => p,
            Detection::Projective => f64::from(u8::from(rng.random::<f64>() < p)),
        };
        sum += x;
        sum_sq += x * x;
    }
    let n = shots as f64;
    let mean = sum / n;
    let var = if shots > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    PointStats { mean: mean.clamp(0.0, 1.0), std_error: (var / n).sqrt() }
}

/// Excitation probability versus laser detuning for a fixed pulse.
pub fn simulate_carrier_spectrum(params: &IonProbeParams, noise: &LaserNoise) -> Result<ExcitationCurve> {
    params.validate()?;
    let grid = params.detuning_grid;
    let t = params.pulse_duration_s;
    let need = 4.0 / t;
    if grid.start() > -need * (1.0 - 1e-9) || grid.end() < need * (1.0 - 1e-9) {
        return Err(Error::invalid(format!(
            "detuning grid [{}, {}] Hz must span +-4/T = +-{need} Hz",
            grid.start(),
            grid.end()
        )));
    }
    let delta_max = grid.start().abs().max(grid.end().abs());
    let dt = checked_step(params.time_step_s, largest_step(params.rabi_frequency_hz, delta_max))?;
    let detunings: Vec<f64> = grid.points().collect();
    let stats: Vec<PointStats> =
        detunings.par_iter().enumerate().map(|(i, &d)| run_point(params, noise, i, d, t, dt)).collect();
    Ok(ExcitationCurve {
        abscissa_kind: Abscissa::DetuningHz,
        abscissa: detunings,
        probability: stats.iter().map(|s| s.mean).collect(),
        std_error: stats.iter().map(|s| s.std_error).collect(),
        shot_count: params.shots_per_point,
    })
}

/// Resonant excitation probability versus pulse length, `t_points` samples
/// on `[0, t_max]`, each from independent shots.
pub fn simulate_rabi(
    params: &IonProbeParams,
    noise: &LaserNoise,
    t_max: f64,
    t_points: usize,
) -> Result<ExcitationCurve> {
    params.validate()?;
    if !(t_max > 0.0) {
        return Err(Error::invalid("t_max must be > 0"));
    }
    let per_period_needed = 20.0 * params.rabi_frequency_hz * t_max;
    if t_points < 2 || (t_points as f64) < per_period_needed {
        return Err(Error::invalid(format!(
            "{t_points} time points undersample {:.1} Rabi periods (need 20 per period)",
            params.rabi_frequency_hz * t_max
        )));
    }
    let dt = checked_step(params.time_step_s, largest_step(params.rabi_frequency_hz, 0.0))?;
    let times: Vec<f64> = (0..t_points).map(|k| t_max * k as f64 / (t_points - 1) as f64).collect();
    let stats: Vec<PointStats> =
        times.par_iter().enumerate().map(|(i, &t)| run_point(params, noise, i, 0.0, t, dt)).collect();
    Ok(ExcitationCurve {
        abscissa_kind: Abscissa::TimeS,
        abscissa: times,
        probability: stats.iter().map(|s| s.mean).collect(),
        std_error: stats.iter().map(|s| s.std_error).collect(),
        shot_count: params.shots_per_point,
    })
}
