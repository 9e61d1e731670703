//! Power spectra on a uniform grid, with unit tagging.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::io::{dbm_to_linear, linear_to_dbm};
use crate::lineshape::{gaussian_density, SampledSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerUnit {
    /// ESA-style display: dBm in one resolution bandwidth.
    DbmPerRbw,
    /// Linear power spectral density (mW/Hz or normalized units).
    LinearPerHz,
    /// Dimensionless linear power ratio.
    Ratio,
}

impl PowerUnit {
    pub fn tag(self) -> &'static str {
        match self {
            PowerUnit::DbmPerRbw => "dbm",
            PowerUnit::LinearPerHz => "linear",
            PowerUnit::Ratio => "ratio",
        }
    }
}

impl fmt::Display for PowerUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PowerUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dbm" | "dbm_per_rbw" => Ok(PowerUnit::DbmPerRbw),
            "linear" | "linear_per_hz" | "mw/hz" => Ok(PowerUnit::LinearPerHz),
            "ratio" => Ok(PowerUnit::Ratio),
            other => Err(Error::Schema(format!("unknown unit '{other}'"))),
        }
    }
}

/// Sampled one-sided PSD.
///
/// dBm values are referenced to `rbw_hz`; with `rbw_hz == 0` (ideal trace)
/// they are referenced to 1 Hz, so conversions stay invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
    pub unit: PowerUnit,
    pub rbw_hz: f64,
}

impl SpectrumTrace {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>, unit: PowerUnit, rbw_hz: f64) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::invalid(format!("{} values for a {}-point grid", values.len(), grid.count())));
        }
        if !(rbw_hz >= 0.0) {
            return Err(Error::invalid("RBW must be >= 0"));
        }
        if unit != PowerUnit::DbmPerRbw && values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("linear power values must be >= 0"));
        }
        Ok(Self { grid, values, unit, rbw_hz })
    }

    pub fn linear(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values, PowerUnit::LinearPerHz, 0.0)
    }

    fn reference_bandwidth(&self) -> f64 {
        if self.rbw_hz > 0.0 {
            self.rbw_hz
        } else {
            1.0
        }
    }

    /// Same trace in linear units (ratios are already linear).
    pub fn to_linear(&self) -> SpectrumTrace {
        match self.unit {
            PowerUnit::DbmPerRbw => {
                let bw = self.reference_bandwidth();
                SpectrumTrace {
                    values: self.values.iter().map(|&x| dbm_to_linear(x) / bw).collect(),
                    unit: PowerUnit::LinearPerHz,
                    ..self.clone()
                }
            }
            _ => self.clone(),
        }
    }

    /// Same trace in dBm per RBW. Fails on non-positive linear samples.
    pub fn to_dbm(&self) -> Result<SpectrumTrace> {
        match self.unit {
            PowerUnit::DbmPerRbw => Ok(self.clone()),
            PowerUnit::LinearPerHz | PowerUnit::Ratio => {
                let bw = self.reference_bandwidth();
                let values = self.values.iter().map(|&x| linear_to_dbm(x * bw)).collect::<Result<Vec<_>>>()?;
                Ok(SpectrumTrace { values, unit: PowerUnit::DbmPerRbw, ..self.clone() })
            }
        }
    }

    /// Linear values converted back into this trace's unit.
    pub(crate) fn with_linear_values(&self, linear: Vec<f64>) -> Result<SpectrumTrace> {
        let lin = SpectrumTrace { values: linear, unit: self.unit_linear(), ..self.clone() };
        match self.unit {
            PowerUnit::DbmPerRbw => lin.to_dbm(),
            _ => Ok(lin),
        }
    }

    fn unit_linear(&self) -> PowerUnit {
        match self.unit {
            PowerUnit::Ratio => PowerUnit::Ratio,
            _ => PowerUnit::LinearPerHz,
        }
    }

    /// Value at `f` by linear interpolation between the bracketing samples.
    pub fn interpolate_linear(&self, f: f64) -> Option<f64> {
        if !self.grid.contains(f) {
            return None;
        }
        let values = self.linear_values();
        let x = (f - self.grid.start()) / self.grid.step();
        let i = (x.floor() as usize).min(self.grid.count() - 2);
        let t = x - i as f64;
        Some(values[i] * (1.0 - t) + values[i + 1] * t)
    }
}

impl SampledSpectrum for SpectrumTrace {
    fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    fn linear_values(&self) -> Cow<'_, [f64]> {
        match self.unit {
            PowerUnit::DbmPerRbw => {
                let bw = self.reference_bandwidth();
                Cow::Owned(self.values.iter().map(|&x| dbm_to_linear(x) / bw).collect())
            }
            _ => Cow::Borrowed(&self.values),
        }
    }
}

/// Convolves the linear PSD with a unit-area Gaussian of the given FWHM.
///
/// Near the grid edges the kernel is renormalized over the samples that
/// exist, so a flat trace stays flat.
pub fn gaussian_broaden(trace: &SpectrumTrace, fwhm_hz: f64) -> Result<SpectrumTrace> {
    if !(fwhm_hz > 0.0) {
        return Err(Error::invalid(format!("broadening FWHM must be > 0, got {fwhm_hz}")));
    }
    let step = trace.grid.step();
    if fwhm_hz < 2.0 * step {
        return Err(Error::Resolution(format!("broadening FWHM {fwhm_hz} Hz is under two grid steps ({step} Hz)")));
    }
    let half = (4.0 * fwhm_hz / step).ceil() as usize;
    let kernel: Vec<f64> =
        (0..=2 * half).map(|k| gaussian_density((k as f64 - half as f64) * step, 0.0, fwhm_hz) * step).collect();
    let input = trace.linear_values();
    let n = input.len();
    let out: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let (mut acc, mut mass) = (0.0, 0.0);
            for j in lo..=hi {
                let w = kernel[j + half - i];
                acc += w * input[j];
                mass += w;
            }
            acc / mass
        })
        .collect();
    trace.with_linear_values(out)
}

/// Models a finite resolution bandwidth: Gaussian smoothing with FWHM equal
/// to `rbw_hz`, recorded on the trace.
pub fn apply_rbw(trace: &SpectrumTrace, rbw_hz: f64) -> Result<SpectrumTrace> {
    let mut out = gaussian_broaden(trace, rbw_hz)?;
    out.rbw_hz = rbw_hz;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(0.0, 1.0, 201).unwrap()
    }

    #[test]
    fn unit_roundtrip_is_involutive() {
        let values: Vec<f64> = (0..201).map(|i| -120.0 + 0.7 * i as f64).collect();
        for rbw in [0.0, 1.0, 30.0] {
            let t = SpectrumTrace::new(grid(), values.clone(), PowerUnit::DbmPerRbw, rbw).unwrap();
            let back = t.to_linear().to_dbm().unwrap();
            for (a, b) in t.values.iter().zip(&back.values) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_negative_linear() {
        assert!(SpectrumTrace::linear(grid(), vec![-1.0; 201]).is_err());
        assert!(SpectrumTrace::linear(grid(), vec![1.0; 3]).is_err());
    }

    #[test]
    fn broadening_preserves_flat_and_area() {
        let flat = SpectrumTrace::linear(grid(), vec![2.0; 201]).unwrap();
        let b = gaussian_broaden(&flat, 10.0).unwrap();
        assert!(b.values.iter().all(|v| (v - 2.0).abs() < 1e-12));

        let mut spike = vec![0.0; 201];
        spike[100] = 5.0;
        let t = SpectrumTrace::linear(grid(), spike).unwrap();
        let b = apply_rbw(&t, 10.0).unwrap();
        assert_eq!(b.rbw_hz, 10.0);
        let area: f64 = b.values.iter().sum();
        assert!((area - 5.0).abs() < 1e-9);
        let w = crate::lineshape::width_at_level(&b, crate::lineshape::HALF_POWER_DB).unwrap();
        assert!((w - 10.0).abs() < 0.2);
    }

    #[test]
    fn unit_tags_parse() {
        for u in [PowerUnit::DbmPerRbw, PowerUnit::LinearPerHz, PowerUnit::Ratio] {
            assert_eq!(u.tag().parse::<PowerUnit>().unwrap(), u);
        }
        assert!("watts".parse::<PowerUnit>().is_err());
    }
}
