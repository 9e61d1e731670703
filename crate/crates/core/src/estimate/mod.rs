//! Linewidth estimators and the least-squares fitter.

mod envelope;
pub mod fit;
mod voigt;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lineshape::voigt_fwhm_approx;

pub use envelope::{estimate_envelope_contrast, EnvelopeOptions};
pub use fit::{fit_least_squares, Bounds, CurveModel, FitOptions, FitResult, FnModel};
pub use voigt::{estimate_voigt, VoigtOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMethod {
    VoigtIterative,
    EnvelopeContrast,
    DirectLorentzian,
}

impl fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimationMethod::VoigtIterative => "voigt-iterative",
            EstimationMethod::EnvelopeContrast => "envelope-contrast",
            EstimationMethod::DirectLorentzian => "direct-lorentzian",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateFlag {
    ServoContaminated,
    GridLimited,
    NonConverged,
    /// Several samples tied for the maximum; the lowest-frequency one was used.
    AmbiguousPeak,
}

/// Widths are combined two-arm values except `single_laser_fwhm_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinewidthEstimate {
    pub lorentzian_fwhm_hz: f64,
    pub gaussian_fwhm_hz: f64,
    pub voigt_fwhm_hz: f64,
    pub single_laser_fwhm_hz: f64,
    pub method: EstimationMethod,
    pub iterations: u32,
    /// Relative mismatch of the matched widths (or contrasts).
    pub residual: f64,
    pub flags: BTreeSet<EstimateFlag>,
}

impl LinewidthEstimate {
    pub(crate) fn from_widths(
        method: EstimationMethod,
        lorentzian: f64,
        gaussian: f64,
        iterations: u32,
        residual: f64,
        flags: BTreeSet<EstimateFlag>,
    ) -> Self {
        let voigt = voigt_fwhm_approx(lorentzian, gaussian).expect("non-negative widths");
        Self {
            lorentzian_fwhm_hz: lorentzian,
            gaussian_fwhm_hz: gaussian,
            voigt_fwhm_hz: voigt,
            single_laser_fwhm_hz: halve_combined(lorentzian),
            method,
            iterations,
            residual,
            flags,
        }
    }

    pub fn has_flag(&self, flag: EstimateFlag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Single-laser width from a combined beat width of two identical lasers.
pub fn halve_combined(combined_fwhm_hz: f64) -> f64 {
    0.5 * combined_fwhm_hz
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving() {
        assert_eq!(halve_combined(320.0), 160.0);
        assert_eq!(halve_combined(0.0), 0.0);
        assert_eq!(halve_combined(312.0), 156.0);
    }

    #[test]
    fn estimate_invariants() {
        for (l, g) in [(320.0, 0.0), (0.0, 100.0), (100.0, 100.0), (1.0, 1e4)] {
            let e = LinewidthEstimate::from_widths(EstimationMethod::VoigtIterative, l, g, 1, 0.0, BTreeSet::new());
            assert_eq!(e.single_laser_fwhm_hz * 2.0, e.lorentzian_fwhm_hz);
            assert!(e.voigt_fwhm_hz >= 0.999 * l.max(g));
        }
    }

    #[test]
    fn serde_names() {
        let mut flags = BTreeSet::new();
        flags.insert(EstimateFlag::ServoContaminated);
        let e = LinewidthEstimate::from_widths(EstimationMethod::EnvelopeContrast, 100.0, 0.0, 3, 0.0, flags);
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("\"envelope-contrast\""));
        assert!(s.contains("\"servo-contaminated\""));
        assert!(s.contains("lorentzian_fwhm_hz"));
    }
}
