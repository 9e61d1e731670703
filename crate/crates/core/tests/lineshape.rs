use dshi_core::grid::FrequencyGrid;
use dshi_core::lineshape::*;
use dshi_core::trace::{PowerUnit, SpectrumTrace};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gaussian_normalized_over_ten_fwhm(fwhm in 1.0f64..1e4, f0 in -1e6f64..1e6) {
        let grid = FrequencyGrid::centered(f0, fwhm / 50.0, 500).unwrap();
        let t = eval_gaussian(&grid, f0, fwhm).unwrap();
        prop_assert!((t.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lorentzian_normalized_over_ten_thousand_fwhm(fwhm in 1.0f64..1e4) {
        let grid = FrequencyGrid::centered(0.0, fwhm / 10.0, 100_000).unwrap();
        let t = eval_lorentzian(&grid, 0.0, fwhm).unwrap();
        prop_assert!((t.integral() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn half_power_width_roundtrip(fwhm in 10.0f64..1e4, per_fwhm in 8usize..60) {
        let step = fwhm / per_fwhm as f64;
        let grid = FrequencyGrid::centered(0.0, step, 40 * per_fwhm).unwrap();
        let g = eval_gaussian(&grid, 0.0, fwhm).unwrap();
        let l = eval_lorentzian(&grid, 0.0, fwhm).unwrap();
        prop_assert!((width_at_level(&g, HALF_POWER_DB).unwrap() - fwhm).abs() <= step);
        prop_assert!((width_at_level(&l, HALF_POWER_DB).unwrap() - fwhm).abs() <= step);
    }

    #[test]
    fn shapes_are_even(g in 5.0f64..500.0, l in 5.0f64..500.0) {
        let grid = FrequencyGrid::centered(0.0, g.min(l) / 25.0, 800).unwrap();
        let params = LineshapeParams { center: 0.0, fwhm_gaussian: g, fwhm_lorentzian: l };
        for t in [
            eval_gaussian(&grid, 0.0, g).unwrap(),
            eval_lorentzian(&grid, 0.0, l).unwrap(),
            eval_voigt_numeric(&grid, &params).unwrap(),
        ] {
            let n = t.values.len();
            for i in 0..n / 2 {
                let (a, b) = (t.values[i], t.values[n - 1 - i]);
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()));
            }
        }
    }

    #[test]
    fn voigt_width_monotone(l in 0.0f64..1e4, g in 0.0f64..1e4, dl in 1e-3f64..100.0, dg in 1e-3f64..100.0) {
        let base = voigt_fwhm_approx(l, g).unwrap();
        prop_assert!(voigt_fwhm_approx(l + dl, g).unwrap() > base);
        prop_assert!(voigt_fwhm_approx(l, g + dg).unwrap() > base);
    }

    #[test]
    fn gaussian_inverse_roundtrip(l in 1.0f64..1e4, g in 1.0f64..1e4) {
        let v = voigt_fwhm_approx(l, g).unwrap();
        let back = gaussian_from_voigt(v, l).unwrap();
        prop_assert!((back / g - 1.0).abs() < 1e-9);
    }

    #[test]
    fn numeric_voigt_width_tracks_closed_form(ll in 0.0f64..4.0, lg in 0.0f64..4.0) {
        let (l, g) = (10f64.powf(ll), 10f64.powf(lg));
        let v = voigt_fwhm_approx(l, g).unwrap();
        let step = l.min(g) / 40.0;
        let wide = 10.0 * v;
        let half = ((wide / step).ceil() as usize).min(20_000);
        let step = step.max(wide / half as f64);
        let grid = FrequencyGrid::centered(0.0, step, half).unwrap();
        let p = LineshapeParams { center: 0.0, fwhm_gaussian: g, fwhm_lorentzian: l };
        let t = eval_voigt_numeric(&grid, &p).unwrap();
        let w = width_at_level(&t, HALF_POWER_DB).unwrap();
        prop_assert!((w / v - 1.0).abs() < 0.01, "L={} G={} numeric {} closed {}", l, g, w, v);
    }

    #[test]
    fn unit_conversion_involutive(vals in prop::collection::vec(-150.0f64..40.0, 2..64), rbw in 0.0f64..1e4) {
        let grid = FrequencyGrid::new(0.0, 1.0, vals.len()).unwrap();
        let t = SpectrumTrace::new(grid, vals, PowerUnit::DbmPerRbw, rbw).unwrap();
        let back = t.to_linear().to_dbm().unwrap();
        for (a, b) in t.values.iter().zip(&back.values) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn width_ignores_power_scale(k in 1e-6f64..1e6) {
        let grid = FrequencyGrid::centered(0.0, 2.0, 2000).unwrap();
        let t = eval_lorentzian(&grid, 0.0, 300.0).unwrap();
        let scaled = SpectrumTrace::linear(grid, t.values.iter().map(|v| v * k).collect()).unwrap();
        for level in [HALF_POWER_DB, 10.0, 20.0] {
            let a = width_at_level(&t, level).unwrap();
            let b = width_at_level(&scaled, level).unwrap();
            prop_assert!((a / b - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn tied_peak_is_ambiguous() {
    let grid = FrequencyGrid::new(0.0, 1.0, 9).unwrap();
    let t = SpectrumTrace::linear(grid, vec![0.0, 0.0, 1.0, 5.0, 5.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(matches!(width_at_level(&t, HALF_POWER_DB), Err(dshi_core::Error::AmbiguousPeak(2))));
    let m = measure_width(&t.values, 1.0, HALF_POWER_DB).unwrap();
    assert!(m.tied);
    assert_eq!(m.peak_index, 3);
}
