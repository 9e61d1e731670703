use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dshi_core::estimate::FitResult;
use dshi_core::grid::FrequencyGrid;
use dshi_core::io::{write_report, AnalysisReport, InputDescriptor};
use dshi_core::ionsim::{
    fit_damped_sine, fit_inverse_power, fit_lorentzian_peak, simulate_carrier_spectrum, simulate_rabi, Abscissa,
    Detection, ExcitationCurve, IonProbeParams, LaserNoise,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{layered, non_negative, positive, usage, CliResult, Failure};
use crate::report::{emit, write_columns};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IonMode {
    /// Carrier scan and Lorentzian fit
    Spectrum,
    /// Rabi flopping and damped-sine fit
    Rabi,
    /// Fitted linewidth versus pulse length, inverse-power fit
    SweepT,
    /// Coherence time versus Rabi frequency, inverse-power fit
    SweepOmega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionArg {
    Expectation,
    Projective,
}

layered! {
    #[derive(Debug, Default, Args, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
    pub struct IonArgs {
        /// spectrum (default), rabi, sweep-t or sweep-omega
        #[arg(long, value_enum)]
        pub mode: Option<IonMode>,
        /// Rabi frequency [default: 250 for spectrum, 40000 for rabi]
        #[arg(long)]
        pub rabi_hz: Option<f64>,
        /// Probe pulse length [default: 4]
        #[arg(long)]
        pub pulse_ms: Option<f64>,
        /// Laser Lorentzian FWHM [default: 156 for spectrum and sweep-t, 0 otherwise]
        #[arg(long)]
        pub laser_fwhm_hz: Option<f64>,
        /// Per-shot fractional Rabi-frequency spread [default: 0, 0.02 for rabi and sweep-omega]
        #[arg(long)]
        pub rin_sigma: Option<f64>,
        /// Shots per point [default: 200]
        #[arg(long)]
        pub shots: Option<usize>,
        /// Seed [default: 0]
        #[arg(long)]
        pub seed: Option<u64>,
        /// expectation (default) or projective
        #[arg(long, value_enum)]
        pub detection: Option<DetectionArg>,
        /// Detuning points on each side of resonance [default: 60]
        #[arg(long)]
        pub half_points: Option<usize>,
        /// Detuning half-span [default: max(8/T, 6 x laser FWHM)]
        #[arg(long)]
        pub span_hz: Option<f64>,
        /// Integration step; must not exceed the stability limit [default: automatic]
        #[arg(long)]
        pub time_step_us: Option<f64>,
        /// Rabi record length [default: 25 periods]
        #[arg(long)]
        pub t_max_ms: Option<f64>,
        /// Rabi time samples [default: 24 per period]
        #[arg(long)]
        pub t_points: Option<usize>,
        /// sweep-t pulse lengths, comma separated [default: 1,2,4,8]
        #[arg(long, value_delimiter = ',')]
        pub pulses_ms: Option<Vec<f64>>,
        /// sweep-t pulse area Omega*T held fixed [default: 0.5]
        #[arg(long)]
        pub area: Option<f64>,
        /// sweep-omega Rabi frequencies, comma separated [default: 20000,40000,80000]
        #[arg(long, value_delimiter = ',')]
        pub rabis_hz: Option<Vec<f64>>,
        /// Hold the power-law exponent fixed instead of fitting it
        #[arg(long, allow_negative_numbers = true)]
        pub fixed_exponent: Option<f64>,
        /// Curve CSV path [default: curve.csv]
        #[arg(long)]
        pub out: Option<PathBuf>,
        /// Report JSON path [default: stdout]
        #[arg(long)]
        pub report: Option<PathBuf>,
    }
}

#[derive(Debug, Serialize)]
struct Effective {
    mode: IonMode,
    rabi_hz: f64,
    pulse_ms: f64,
    laser_fwhm_hz: f64,
    rin_sigma: f64,
    shots: usize,
    seed: u64,
    detection: DetectionArg,
    half_points: usize,
    span_hz: Option<f64>,
    time_step_us: Option<f64>,
    t_max_ms: Option<f64>,
    t_points: Option<usize>,
    pulses_ms: Vec<f64>,
    area: f64,
    rabis_hz: Vec<f64>,
    fixed_exponent: Option<f64>,
}

fn resolve(a: &IonArgs) -> CliResult<Effective> {
    let mode = a.mode.unwrap_or(IonMode::Spectrum);
    let coherent = matches!(mode, IonMode::Spectrum | IonMode::SweepT);
    let list = |flag: &str, v: &Option<Vec<f64>>, default: &[f64]| -> CliResult<Vec<f64>> {
        let v = v.clone().unwrap_or_else(|| default.to_vec());
        if v.len() < 3 {
            return Err(usage(format!("{flag} needs at least 3 values")));
        }
        v.into_iter().map(|x| positive(flag, x)).collect()
    };
    Ok(Effective {
        mode,
        rabi_hz: positive("--rabi-hz", a.rabi_hz.unwrap_or(if mode == IonMode::Rabi { 40e3 } else { 250.0 }))?,
        pulse_ms: positive("--pulse-ms", a.pulse_ms.unwrap_or(4.0))?,
        laser_fwhm_hz: non_negative("--laser-fwhm-hz", a.laser_fwhm_hz.unwrap_or(if coherent { 156.0 } else { 0.0 }))?,
        rin_sigma: non_negative("--rin-sigma", a.rin_sigma.unwrap_or(if coherent { 0.0 } else { 0.02 }))?,
        shots: a.shots.unwrap_or(200),
        seed: a.seed.unwrap_or(0),
        detection: a.detection.unwrap_or(DetectionArg::Expectation),
        half_points: a.half_points.unwrap_or(60),
        span_hz: a.span_hz.map(|s| positive("--span-hz", s)).transpose()?,
        time_step_us: a.time_step_us.map(|s| positive("--time-step-us", s)).transpose()?,
        t_max_ms: a.t_max_ms.map(|s| positive("--t-max-ms", s)).transpose()?,
        t_points: a.t_points,
        pulses_ms: list("--pulses-ms", &a.pulses_ms, &[1.0, 2.0, 4.0, 8.0])?,
        area: positive("--area", a.area.unwrap_or(0.5))?,
        rabis_hz: list("--rabis-hz", &a.rabis_hz, &[20e3, 40e3, 80e3])?,
        fixed_exponent: a.fixed_exponent,
    })
}

impl Effective {
    fn noise(&self) -> CliResult<LaserNoise> {
        LaserNoise::new(self.laser_fwhm_hz, self.rin_sigma)
            .map_err(|e| Failure::with_flags(e, &["--laser-fwhm-hz", "--rin-sigma"]))
    }

    fn probe(&self, rabi_hz: f64, pulse_s: f64) -> CliResult<IonProbeParams> {
        let span = self.span_hz.unwrap_or((8.0 / pulse_s).max(6.0 * self.laser_fwhm_hz));
        let half = self.half_points.max(2);
        let grid = FrequencyGrid::centered(0.0, span / half as f64, half)
            .map_err(|e| Failure::with_flags(e, &["--span-hz", "--half-points"]))?;
        let mut p = IonProbeParams::new(rabi_hz, pulse_s, grid, self.shots, self.seed)
            .map_err(|e| Failure::with_flags(e, &["--rabi-hz", "--pulse-ms", "--shots"]))?;
        p.time_step_s = self.time_step_us.map(|s| s * 1e-6);
        p.detection = match self.detection {
            DetectionArg::Expectation => Detection::Expectation,
            DetectionArg::Projective => Detection::Projective,
        };
        Ok(p)
    }

    fn spectrum(&self, rabi_hz: f64, pulse_s: f64) -> CliResult<ExcitationCurve> {
        simulate_carrier_spectrum(&self.probe(rabi_hz, pulse_s)?, &self.noise()?)
            .map_err(|e| Failure::with_flags(e, &["--span-hz", "--time-step-us"]))
    }

    fn rabi(&self, rabi_hz: f64) -> CliResult<ExcitationCurve> {
        let t_max = self.t_max_ms.map(|t| t * 1e-3).unwrap_or(25.0 / rabi_hz);
        let points = self.t_points.unwrap_or((24.0 * rabi_hz * t_max).ceil() as usize);
        simulate_rabi(&self.probe(rabi_hz, 1.0 / (2.0 * rabi_hz))?, &self.noise()?, t_max, points)
            .map_err(|e| Failure::with_flags(e, &["--t-max-ms", "--t-points", "--time-step-us"]))
    }
}

fn curve_columns(c: &ExcitationCurve) -> [&'static str; 3] {
    match c.abscissa_kind {
        Abscissa::DetuningHz => ["detuning_hz", "probability", "std_error"],
        Abscissa::TimeS => ["time_s", "probability", "std_error"],
    }
}

fn curve_rows(c: &ExcitationCurve) -> impl Iterator<Item = Vec<f64>> + '_ {
    (0..c.abscissa.len()).map(|i| vec![c.abscissa[i], c.probability[i], c.std_error[i]])
}

pub fn run(args: IonArgs, verbose: u8) -> CliResult<()> {
    let cfg = resolve(&args)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("curve.csv"));
    let log = |msg: String| {
        if verbose > 0 {
            eprintln!("{msg}");
        }
    };
    let pulse_s = cfg.pulse_ms * 1e-3;

    let (method, fit): (&str, FitResult) = match cfg.mode {
        IonMode::Spectrum => {
            let c = cfg.spectrum(cfg.rabi_hz, pulse_s)?;
            write_columns(&out, &curve_columns(&c), curve_rows(&c))?;
            let fit = fit_lorentzian_peak(&c)?;
            log(format!("Lorentzian FWHM {:.2} Hz, residual {:.3e}", fit.parameters[1], fit.residual_norm));
            ("ionsim-spectrum", fit)
        }
        IonMode::Rabi => {
            let c = cfg.rabi(cfg.rabi_hz)?;
            write_columns(&out, &curve_columns(&c), curve_rows(&c))?;
            let fit = fit_damped_sine(&c)?;
            log(format!("Rabi frequency {:.2} Hz, tau {:.4e} s", fit.parameters[0], fit.parameters[1]));
            ("ionsim-rabi", fit)
        }
        IonMode::SweepT => {
            let mut points = Vec::new();
            for &t_ms in &cfg.pulses_ms {
                let t = t_ms * 1e-3;
                let fit = fit_lorentzian_peak(&cfg.spectrum(cfg.area / t, t)?)?;
                log(format!("T = {t_ms} ms: FWHM {:.2} Hz", fit.parameters[1]));
                points.push((t, fit.parameters[1], fit.std_error(1)));
            }
            write_columns(&out, &["pulse_s", "fwhm_hz", "fwhm_std_error"], points.iter().map(|p| vec![p.0, p.1, p.2]))?;
            let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.1)).collect();
            ("ionsim-sweep-t", fit_inverse_power(&pairs, cfg.fixed_exponent)?)
        }
        IonMode::SweepOmega => {
            let mut points = Vec::new();
            for &w in &cfg.rabis_hz {
                let fit = fit_damped_sine(&cfg.rabi(w)?)?;
                log(format!("Omega = {w} Hz: tau {:.4e} s", fit.parameters[1]));
                points.push((w, fit.parameters[1], fit.std_error(1)));
            }
            write_columns(&out, &["rabi_hz", "tau_s", "tau_std_error"], points.iter().map(|p| vec![p.0, p.1, p.2]))?;
            let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.1)).collect();
            ("ionsim-sweep-omega", fit_inverse_power(&pairs, cfg.fixed_exponent)?)
        }
    };

    let input = InputDescriptor { source: "synthetic".into(), params: json!({ "curve": out.display().to_string() }) };
    let mut report = AnalysisReport::new(input, method, serde_json::to_value(&cfg).map_err(dshi_core::Error::from)?);
    report.seed = Some(cfg.seed);
    report.fit = Some(fit);
    match &args.report {
        Some(path) => write_report(&report, path)?,
        None => emit(&report)?,
    }
    Ok(())
}
