use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dshi_core::dshi::{DshiParams, DEFAULT_FIBER_INDEX};
use dshi_core::estimate::{
    estimate_envelope_contrast, estimate_voigt, EnvelopeOptions, LinewidthEstimate, VoigtOptions,
};
use dshi_core::io::{read_trace, write_report, write_trace, AnalysisReport, InputDescriptor};
use dshi_core::lineshape::{eval_voigt_numeric, LineshapeParams, SampledSpectrum};
use dshi_core::{PowerUnit, SpectrumTrace};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{layered, positive, usage, CliResult, Failure};
use crate::report::emit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    Voigt,
    Envelope,
    Both,
}

layered! {
    #[derive(Debug, Default, Args, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
    pub struct FitArgs {
        /// Trace CSV to analyse
        #[arg(long)]
        pub input: Option<PathBuf>,
        /// voigt (default), envelope, or both
        #[arg(long, value_enum)]
        pub method: Option<FitMethod>,
        /// Report JSON path [default: stdout]
        #[arg(long)]
        pub report: Option<PathBuf>,
        /// Also write the fitted profile, scaled to the trace, as CSV
        #[arg(long)]
        pub profile: Option<PathBuf>,
        /// Voigt width-match tolerance [default: 0.001]
        #[arg(long)]
        pub tol: Option<f64>,
        /// Voigt bisection iterations [default: 60]
        #[arg(long)]
        pub max_iter: Option<u32>,
        /// Central bins bridged over the coherent spike [default: 3]
        #[arg(long)]
        pub exclude_bins: Option<usize>,
        /// Carrier location [default: --eom-mhz]
        #[arg(long)]
        pub carrier_mhz: Option<f64>,
        /// EOM frequency shift [default: 7]
        #[arg(long)]
        pub eom_mhz: Option<f64>,
        /// Delay fiber length, for the envelope method [default: 5]
        #[arg(long)]
        pub fiber_km: Option<f64>,
        /// Fiber group index [default: 1.468]
        #[arg(long)]
        pub fiber_index: Option<f64>,
        /// Envelope peak order, odd [default: 1]
        #[arg(long)]
        pub peak_order: Option<u32>,
        /// Envelope trough order, adjacent to the peak [default: 2]
        #[arg(long)]
        pub trough_order: Option<u32>,
        /// Extrema closer than this to the carrier are flagged [default: 100]
        #[arg(long)]
        pub servo_band_khz: Option<f64>,
        /// Extremum search half-window, in extremum spacings [default: 0.25]
        #[arg(long)]
        pub search_fraction: Option<f64>,
    }
}

#[derive(Debug, Serialize)]
struct Effective {
    input: PathBuf,
    method: FitMethod,
    tol: f64,
    max_iter: u32,
    exclude_bins: usize,
    carrier_mhz: f64,
    eom_mhz: f64,
    fiber_km: f64,
    fiber_index: f64,
    peak_order: u32,
    trough_order: u32,
    servo_band_khz: f64,
    search_fraction: f64,
}

fn resolve(a: &FitArgs) -> CliResult<Effective> {
    let eom_mhz = positive("--eom-mhz", a.eom_mhz.unwrap_or(7.0))?;
    Ok(Effective {
        input: a.input.clone().ok_or_else(|| usage("--input is required"))?,
        method: a.method.unwrap_or(FitMethod::Voigt),
        tol: positive("--tol", a.tol.unwrap_or(1e-3))?,
        max_iter: a.max_iter.unwrap_or(60),
        exclude_bins: a.exclude_bins.unwrap_or(3),
        carrier_mhz: positive("--carrier-mhz", a.carrier_mhz.unwrap_or(eom_mhz))?,
        eom_mhz,
        fiber_km: positive("--fiber-km", a.fiber_km.unwrap_or(5.0))?,
        fiber_index: a.fiber_index.unwrap_or(DEFAULT_FIBER_INDEX),
        peak_order: a.peak_order.unwrap_or(1),
        trough_order: a.trough_order.unwrap_or(2),
        servo_band_khz: positive("--servo-band-khz", a.servo_band_khz.unwrap_or(100.0))?,
        search_fraction: positive("--search-fraction", a.search_fraction.unwrap_or(0.25))?,
    })
}

/// Fitted lineshape on the trace grid, scaled by least squares to the
/// trace outside the excluded central bins.
fn profile_trace(trace: &SpectrumTrace, e: &LinewidthEstimate, cfg: &Effective) -> CliResult<SpectrumTrace> {
    let shape = LineshapeParams {
        center: cfg.carrier_mhz * 1e6,
        fwhm_gaussian: e.gaussian_fwhm_hz,
        fwhm_lorentzian: e.lorentzian_fwhm_hz,
    };
    let model = eval_voigt_numeric(&trace.grid, &shape).map_err(|err| Failure::with_flags(err, &["--profile"]))?;
    let data = trace.linear_values();
    let center = trace.grid.nearest_index(shape.center);
    let keep = |i: usize| center.is_none_or(|c| i.abs_diff(c) > cfg.exclude_bins / 2);
    let (mut num, mut den) = (0.0, 0.0);
    for (_, (d, m)) in data.iter().zip(&model.values).enumerate().filter(|(i, _)| keep(*i)) {
        num += d * m;
        den += m * m;
    }
    let scale = if den > 0.0 { num / den } else { 0.0 };
    let fitted = SpectrumTrace::linear(trace.grid, model.values.iter().map(|m| m * scale).collect())?;
    Ok(match trace.unit {
        PowerUnit::DbmPerRbw => SpectrumTrace { rbw_hz: trace.rbw_hz, ..fitted }.to_dbm()?,
        _ => fitted,
    })
}

pub fn run(args: FitArgs, verbose: u8) -> CliResult<()> {
    let cfg = resolve(&args)?;
    let trace = read_trace(&cfg.input)?;
    let geometry = DshiParams::new(1.0, cfg.eom_mhz * 1e6, 0.0, cfg.fiber_km * 1e3, cfg.fiber_index)
        .map_err(|e| Failure::with_flags(e, &["--fiber-index"]))?;
    let voigt_opts = VoigtOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        exclude_central_bins: cfg.exclude_bins,
        carrier_hz: Some(cfg.carrier_mhz * 1e6),
    };
    let env_opts = EnvelopeOptions { servo_band_hz: cfg.servo_band_khz * 1e3, search_fraction: cfg.search_fraction };

    let voigt = matches!(cfg.method, FitMethod::Voigt | FitMethod::Both).then(|| estimate_voigt(&trace, &voigt_opts));
    let envelope = matches!(cfg.method, FitMethod::Envelope | FitMethod::Both)
        .then(|| estimate_envelope_contrast(&trace, &geometry, cfg.peak_order, cfg.trough_order, &env_opts));

    let input = InputDescriptor {
        source: cfg.input.display().to_string(),
        params: json!({
            "eom_frequency_hz": geometry.eom_frequency_hz(),
            "fiber_length_m": geometry.fiber_length_m(),
            "fiber_index": geometry.fiber_index(),
            "grid_points": trace.grid.count(),
            "unit": trace.unit.tag(),
        }),
    };
    let method = match cfg.method {
        FitMethod::Voigt => "voigt",
        FitMethod::Envelope => "envelope",
        FitMethod::Both => "voigt+envelope",
    };
    let mut report = AnalysisReport::new(input, method, serde_json::to_value(&cfg).map_err(dshi_core::Error::from)?);

    let mut errors = Vec::new();
    let mut failure = None;
    let mut take = |label: &str, r: Option<dshi_core::Result<LinewidthEstimate>>| -> Option<LinewidthEstimate> {
        match r? {
            Ok(e) => Some(e),
            Err(err) => {
                errors.push(format!("{label}: {err}"));
                failure.get_or_insert_with(|| Failure::from(err));
                None
            }
        }
    };
    let v = take("voigt", voigt);
    let e = take("envelope", envelope);
    match cfg.method {
        FitMethod::Envelope => report.result = e,
        _ => {
            report.result = v;
            report.cross_check = e;
        }
    }
    if !errors.is_empty() {
        report.error = Some(errors.join("; "));
    }
    if verbose > 0 {
        for est in report.result.iter().chain(&report.cross_check) {
            eprintln!(
                "{}: combined {:.3} Hz, single-laser {:.3} Hz, flags {:?}",
                est.method, est.lorentzian_fwhm_hz, est.single_laser_fwhm_hz, est.flags
            );
        }
    }

    if let (Some(path), Some(est)) = (&args.profile, &report.result) {
        write_trace(&profile_trace(&trace, est, &cfg)?, path)?;
    }
    match &args.report {
        Some(path) => write_report(&report, path)?,
        None => emit(&report)?,
    }
    match failure {
        Some(f) => Err(match f {
            Failure::Estimation(_) => Failure::Estimation(report.error.unwrap_or_default()),
            other => other,
        }),
        None => Ok(()),
    }
}
