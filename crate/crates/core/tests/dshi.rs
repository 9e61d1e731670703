use dshi_core::dshi::*;
use dshi_core::grid::FrequencyGrid;
use dshi_core::lineshape::{width_at_level, SampledSpectrum, HALF_POWER_DB};
use dshi_core::trace::SpectrumTrace;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn reference(df: f64) -> DshiParams {
    DshiParams::reference().with_laser_fwhm(df).unwrap()
}

/// Central bins replaced by an even parabola through their neighbours so
/// widths see the continuum.
fn without_spike(t: &SpectrumTrace, carrier: f64) -> SpectrumTrace {
    let c = t.grid.nearest_index(carrier).unwrap();
    let mut v = t.linear_values().into_owned();
    let y2 = 0.5 * (v[c - 2] + v[c + 2]);
    let y3 = 0.5 * (v[c - 3] + v[c + 3]);
    let curv = (y3 - y2) / 5.0;
    let top = y2 - 4.0 * curv;
    v[c] = top;
    v[c - 1] = top + curv;
    v[c + 1] = top + curv;
    SpectrumTrace::linear(t.grid, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eom_shift_is_translation(shift in -3.0e6f64..3.0e6, df in 1.0f64..5e3) {
        let a = reference(df);
        let b = a.with_eom_frequency(7.0e6 + shift).unwrap();
        let ga = FrequencyGrid::centered(a.eom_frequency_hz(), 50.0, 1000).unwrap();
        let gb = FrequencyGrid::centered(b.eom_frequency_hz(), 50.0, 1000).unwrap();
        let ta = analytic_psd(&a, &ga).unwrap();
        let tb = analytic_psd(&b, &gb).unwrap();
        for (x, y) in ta.values.iter().zip(&tb.values) {
            prop_assert!((x - y).abs() <= 1e-6 * x.abs().max(y.abs()));
        }
    }

    #[test]
    fn power_scales_quadratically(k in 0.01f64..100.0, df in 10.0f64..2e3) {
        let a = reference(df);
        let b = a.with_optical_power(k).unwrap();
        let grid = FrequencyGrid::centered(7.0e6, 40.0, 2500).unwrap();
        let ta = analytic_psd(&a, &grid).unwrap();
        let tb = analytic_psd(&b, &grid).unwrap();
        for (x, y) in ta.values.iter().zip(&tb.values) {
            prop_assert!((y / x / (k * k) - 1.0).abs() < 1e-12);
        }
        let (ca, cb) = (without_spike(&ta, 7.0e6), without_spike(&tb, 7.0e6));
        for level in [HALF_POWER_DB, 10.0, 20.0] {
            let (wa, wb) = (width_at_level(&ca, level).unwrap(), width_at_level(&cb, level).unwrap());
            prop_assert!((wa / wb - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn contrast_strictly_decreasing(lo in 10.0f64..9e3, ratio in 1.001f64..1.5, order in 1u32..6) {
        let hi = (lo * ratio).min(1e4);
        prop_assume!(hi > lo);
        let peak = if order % 2 == 1 { order } else { order + 1 };
        let trough = peak + 1;
        let a = contrast_db(&reference(lo), peak, trough);
        let b = contrast_db(&reference(hi), peak, trough);
        prop_assert!(b < a);
    }

    #[test]
    fn long_delay_approaches_lorentzian(product in 3.0f64..30.0, km in 1.0f64..50.0) {
        let p = reference(100.0).with_fiber_length(km * 1e3).unwrap();
        let df = product / p.delay_s();
        let p = p.with_laser_fwhm(df).unwrap();
        let grid = FrequencyGrid::centered(7.0e6f64.max(20.0 * df), df / 40.0, 600).unwrap();
        let p = p.with_eom_frequency(grid.point(600)).unwrap();
        let t = without_spike(&analytic_psd(&p, &grid).unwrap(), p.eom_frequency_hz());
        let w20 = width_at_level(&t, 20.0).unwrap();
        prop_assert!((w20 / (99f64.sqrt() * df) - 1.0).abs() < 0.02, "{} vs {}", w20, 99f64.sqrt() * df);
    }

    #[test]
    fn bump_roundtrip(offset in 10e3f64..150e3, width in 2e3f64..40e3, height in -10.0f64..20.0, symmetric: bool) {
        let p = reference(320.0);
        let grid = FrequencyGrid::centered(7.0e6, 100.0, 2000).unwrap();
        let model = analytic_psd(&p, &grid).unwrap();
        let b = ServoBumpModel::new(offset, width, height, symmetric).unwrap();
        let measured = inject_servo_bumps(&model, 7.0e6, &b).unwrap();
        let ratio = extract_servo_bumps(&measured, &model).unwrap();
        for (f, r) in ratio.grid.points().zip(&ratio.values) {
            prop_assert!((r / b.multiplier(7.0e6, f) - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn extrema_spacing_for_five_km() {
    let p = reference(100.0);
    let ex = predict_extrema(&p, 10).unwrap();
    assert!((ex[0].frequency_hz - 7.0e6 - SPEED_OF_LIGHT / (2.0 * 1.468 * 5000.0)).abs() < 1e-6);
    assert!((p.extremum_spacing_hz() - 20.42e3).abs() / 20.42e3 < 1e-3);
}

#[test]
fn bumps_distort_envelope_extrema() {
    let p = reference(320.0);
    let grid = FrequencyGrid::centered(7.0e6, 50.0, 4000).unwrap();
    let model = analytic_psd(&p, &grid).unwrap();
    let b = ServoBumpModel::new(50e3, 20e3, 10.0, true).unwrap();
    let bumped = inject_servo_bumps(&model, 7.0e6, &b).unwrap();
    for e in predict_extrema(&p, 3).unwrap().iter().filter(|e| e.order >= 2) {
        let i = grid.nearest_index(e.frequency_hz).unwrap();
        let db = 10.0 * (bumped.values[i] / model.values[i]).log10();
        assert!(db > 1.0, "order {} distorted by only {db} dB", e.order);
    }
}

#[test]
fn noisy_ratio_is_unbiased() {
    let p = reference(320.0);
    let grid = FrequencyGrid::centered(7.0e6, 50.0, 4000).unwrap();
    let model = analytic_psd(&p, &grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let noisy: Vec<f64> = model.values.iter().map(|v| v * 10f64.powf(noise.sample(&mut rng) / 10.0)).collect();
    let measured = SpectrumTrace::linear(grid, noisy).unwrap();
    let ratio = extract_servo_bumps(&measured, &model).unwrap();
    let db: Vec<f64> = ratio.values.iter().map(|r| 10.0 * r.log10()).collect();
    let n = db.len() as f64;
    let mean = db.iter().sum::<f64>() / n;
    let sd = (db.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    let inside = db.iter().filter(|d| d.abs() <= 0.2).count() as f64 / n;
    assert!(mean.abs() < 0.01, "bias {mean}");
    assert!((sd - 0.1).abs() < 0.01, "sd {sd}");
    assert!(inside > 0.95, "{inside}");
}

#[test]
fn intensity_noise_does_not_broaden() {
    let p = reference(320.0);
    let cfg = SimConfig { seed: 9, ..SimConfig::for_params(&p) };
    let clean = simulate_time_domain(&p, &NoiseModel::white(320.0).unwrap(), &cfg).unwrap();
    let rin = simulate_time_domain(&p, &NoiseModel::new(320.0, 0.0, 0.1).unwrap(), &cfg).unwrap();
    let w = |t: &SpectrumTrace| width_at_level(&without_spike(t, 7.0e6), 20.0).unwrap();
    let (a, b) = (w(&clean), w(&rin));
    assert!((b / a - 1.0).abs() < 0.02, "20 dB width {a} -> {b}");
    let edge = |t: &SpectrumTrace| t.values[..50].iter().sum::<f64>();
    assert!(edge(&rin) > 1.2 * edge(&clean));
}

#[test]
fn flicker_broadens_the_beat() {
    let p = reference(320.0);
    let cfg = SimConfig { seed: 4, segments: 16, ..SimConfig::for_params(&p) };
    let white = simulate_time_domain(&p, &NoiseModel::white(320.0).unwrap(), &cfg).unwrap();
    let flicker = simulate_time_domain(&p, &NoiseModel::new(320.0, 1e6, 0.0).unwrap(), &cfg).unwrap();
    let c = white.grid.nearest_index(7.0e6).unwrap();
    assert!(flicker.values[c] < white.values[c]);
}

#[test]
fn monte_carlo_tracks_analytic() {
    let p = reference(320.0);
    let cfg = SimConfig { seed: 2, segments: 32, ..SimConfig::for_params(&p) };
    let mc = simulate_time_domain(&p, &NoiseModel::white(320.0).unwrap(), &cfg).unwrap();
    let an = analytic_psd(&p, &mc.grid).unwrap();
    let c = mc.grid.nearest_index(7.0e6).unwrap();
    let devs: Vec<f64> = (0..mc.values.len())
        .filter(|i| i.abs_diff(c) > 1)
        .map(|i| 10.0 * (mc.values[i] / an.values[i]).log10())
        .collect();
    let rms = (devs.iter().map(|d| d * d).sum::<f64>() / devs.len() as f64).sqrt();
    assert!(rms < 1.5, "rms {rms} dB");
}
