use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lineshape::SampledSpectrum;
use crate::trace::{PowerUnit, SpectrumTrace};

/// Spectral bumps from a frequency-lock servo, as a Gaussian multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServoBumpModel {
    pub offset_hz: f64,
    /// FWHM of each bump.
    pub width_hz: f64,
    pub height_db: f64,
    pub symmetric: bool,
}

impl ServoBumpModel {
    pub fn new(offset_hz: f64, width_hz: f64, height_db: f64, symmetric: bool) -> Result<Self> {
        if !(offset_hz > 0.0 && offset_hz.is_finite()) {
            return Err(Error::invalid("bump offset must be > 0"));
        }
        if !(width_hz > 0.0 && width_hz.is_finite()) {
            return Err(Error::invalid("bump width must be > 0"));
        }
        if !height_db.is_finite() {
            return Err(Error::invalid("bump height must be finite"));
        }
        Ok(Self { offset_hz, width_hz, height_db, symmetric })
    }

    fn centers(&self, carrier_hz: f64) -> impl Iterator<Item = f64> + '_ {
        let lower = self.symmetric.then_some(carrier_hz - self.offset_hz);
        std::iter::once(carrier_hz + self.offset_hz).chain(lower)
    }

    /// Linear-power multiplier at `f`.
    pub fn multiplier(&self, carrier_hz: f64, f: f64) -> f64 {
        let gain = 10f64.powf(self.height_db / 10.0) - 1.0;
        let sigma = self.width_hz / (8.0 * std::f64::consts::LN_2).sqrt();
        let g: f64 = self.centers(carrier_hz).map(|c| (-0.5 * ((f - c) / sigma).powi(2)).exp()).sum();
        1.0 + gain * g
    }
}

/// Multiplies the trace's linear power by the bump profile around `carrier_hz`.
pub fn inject_servo_bumps(trace: &SpectrumTrace, carrier_hz: f64, bumps: &ServoBumpModel) -> Result<SpectrumTrace> {
    for c in bumps.centers(carrier_hz) {
        if !trace.grid.contains(c) {
            return Err(Error::Domain(format!("bump center {c} Hz lies outside the trace grid")));
        }
    }
    let linear = trace.linear_values();
    let out = trace.grid.points().zip(linear.iter()).map(|(f, v)| v * bumps.multiplier(carrier_hz, f)).collect();
    trace.with_linear_values(out)
}

/// Pointwise linear ratio `measured / model`.
pub fn extract_servo_bumps(measured: &SpectrumTrace, model: &SpectrumTrace) -> Result<SpectrumTrace> {
    if measured.grid != model.grid {
        return Err(Error::Domain("measured and model traces are on different grids".into()));
    }
    let m = measured.linear_values();
    let d = model.linear_values();
    let ratio = m
        .iter()
        .zip(d.iter())
        .enumerate()
        .map(|(i, (&a, &b))| {
            if b > 0.0 {
                Ok(a / b)
            } else {
                Err(Error::Domain(format!("model bin {i} is not positive; cannot divide")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SpectrumTrace::new(measured.grid, ratio, PowerUnit::Ratio, measured.rbw_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dshi::{analytic_psd, DshiParams};
    use crate::grid::FrequencyGrid;

    fn model() -> SpectrumTrace {
        let grid = FrequencyGrid::centered(7.0e6, 100.0, 1500).unwrap();
        analytic_psd(&DshiParams::reference().with_laser_fwhm(320.0).unwrap(), &grid).unwrap()
    }

    #[test]
    fn zero_height_is_identity() {
        let t = model();
        let b = ServoBumpModel::new(50e3, 20e3, 0.0, true).unwrap();
        assert_eq!(inject_servo_bumps(&t, 7.0e6, &b).unwrap().values, t.values);
    }

    #[test]
    fn inject_extract_roundtrip() {
        let t = model();
        let b = ServoBumpModel::new(50e3, 20e3, 10.0, true).unwrap();
        let bumped = inject_servo_bumps(&t, 7.0e6, &b).unwrap();
        let ratio = extract_servo_bumps(&bumped, &t).unwrap();
        assert_eq!(ratio.unit, PowerUnit::Ratio);
        for (f, r) in ratio.grid.points().zip(&ratio.values) {
            let m = b.multiplier(7.0e6, f);
            assert!((r / m - 1.0).abs() < 1e-6);
        }
        let at = ratio.grid.nearest_index(7.05e6).unwrap();
        assert!((10.0 * ratio.values[at].log10() - 10.0).abs() < 0.01);
    }

    #[test]
    fn self_division_is_unity() {
        let t = model();
        let r = extract_servo_bumps(&t, &t).unwrap();
        assert!(r.values.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn errors() {
        let t = model();
        let b = ServoBumpModel::new(500e3, 20e3, 10.0, false).unwrap();
        assert!(matches!(inject_servo_bumps(&t, 7.0e6, &b), Err(Error::Domain(_))));
        let other = SpectrumTrace::linear(t.grid.shifted(1.0), t.values.clone()).unwrap();
        assert!(matches!(extract_servo_bumps(&t, &other), Err(Error::Domain(_))));
        let mut zero = t.clone();
        zero.values[3] = 0.0;
        assert!(matches!(extract_servo_bumps(&t, &zero), Err(Error::Domain(_))));
        assert!(ServoBumpModel::new(0.0, 1.0, 1.0, true).is_err());
        assert!(ServoBumpModel::new(1.0, 0.0, 1.0, true).is_err());
    }
}
