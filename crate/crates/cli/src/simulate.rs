use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dshi_core::dshi::{
    analytic_psd, inject_servo_bumps, simulate_time_domain, DshiParams, NoiseModel, ServoBumpModel, SimConfig,
    DEFAULT_FIBER_INDEX,
};
use dshi_core::grid::FrequencyGrid;
use dshi_core::io::write_trace;
use dshi_core::trace::gaussian_broaden;
use dshi_core::SpectrumTrace;
use serde::{Deserialize, Serialize};

use crate::config::{layered, non_negative, positive, usage, CliResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    Analytic,
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sweep {
    /// Values in MHz.
    Eom,
    /// Values in normalized power units.
    Power,
    /// Values in Hz.
    Linewidth,
    /// Values in km.
    Fiber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputUnit {
    Dbm,
    Linear,
}

layered! {
    #[derive(Debug, Default, Args, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
    pub struct SimulateArgs {
        /// analytic (default) or montecarlo
        #[arg(long, value_enum)]
        pub mode: Option<SimMode>,
        /// Optical power P0 in normalized units [default: 1]
        #[arg(long)]
        pub power: Option<f64>,
        /// EOM frequency shift [default: 7]
        #[arg(long)]
        pub eom_mhz: Option<f64>,
        /// Combined two-laser Lorentzian FWHM [default: 320]
        #[arg(long)]
        pub linewidth_hz: Option<f64>,
        /// Delay fiber length [default: 5]
        #[arg(long)]
        pub fiber_km: Option<f64>,
        /// Fiber group index [default: 1.468]
        #[arg(long)]
        pub fiber_index: Option<f64>,
        /// Half-span around f_EOM [default: 200]
        #[arg(long)]
        pub span_khz: Option<f64>,
        /// Analytic grid step; Monte-Carlo bins are 1 / segment length [default: 20]
        #[arg(long)]
        pub step_hz: Option<f64>,
        /// Gaussian (flicker/technical) broadening FWHM applied to the trace
        #[arg(long)]
        pub broadening_hz: Option<f64>,
        /// Servo bump height; bumps are added only when set
        #[arg(long, allow_negative_numbers = true)]
        pub bump_height_db: Option<f64>,
        /// Servo bump distance from f_EOM [default: 50]
        #[arg(long)]
        pub bump_offset_khz: Option<f64>,
        /// Servo bump FWHM [default: 20]
        #[arg(long)]
        pub bump_width_khz: Option<f64>,
        /// Put the bump on the upper side only
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        pub bump_one_sided: Option<bool>,
        /// Monte-Carlo 1/f frequency-noise level, Hz^2/Hz at 1 Hz [default: 0]
        #[arg(long)]
        pub flicker_level: Option<f64>,
        /// Monte-Carlo fractional RMS intensity noise [default: 0]
        #[arg(long)]
        pub rin_sigma: Option<f64>,
        /// Monte-Carlo seed [default: 0]
        #[arg(long)]
        pub seed: Option<u64>,
        /// Monte-Carlo segments averaged [default: 64]
        #[arg(long)]
        pub segments: Option<usize>,
        /// Monte-Carlo segment length [default: 5]
        #[arg(long)]
        pub segment_ms: Option<f64>,
        /// Monte-Carlo sample rate [default: 8 x EOM]
        #[arg(long)]
        pub sample_rate_mhz: Option<f64>,
        /// Sweep one quantity; writes one trace per value into --out
        #[arg(long, value_enum)]
        pub sweep: Option<Sweep>,
        /// Sweep values, comma separated, in the swept flag's unit
        #[arg(long, value_delimiter = ',')]
        pub values: Option<Vec<f64>>,
        /// Unit of the written trace [default: linear]
        #[arg(long, value_enum)]
        pub unit: Option<OutputUnit>,
        /// Output CSV, or directory in sweep mode [default: trace.csv / sweep]
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

struct Plan {
    mode: SimMode,
    params: DshiParams,
    span_hz: f64,
    step_hz: f64,
    broadening_hz: Option<f64>,
    bumps: Option<ServoBumpModel>,
    flicker_level: f64,
    rin_sigma: f64,
    seed: u64,
    segments: usize,
    segment_s: f64,
    sample_rate_hz: Option<f64>,
    unit: OutputUnit,
}

fn params_from(a: &SimulateArgs) -> CliResult<DshiParams> {
    let power = positive("--power", a.power.unwrap_or(1.0))?;
    let eom = positive("--eom-mhz", a.eom_mhz.unwrap_or(7.0))? * 1e6;
    let width = non_negative("--linewidth-hz", a.linewidth_hz.unwrap_or(320.0))?;
    let length = positive("--fiber-km", a.fiber_km.unwrap_or(5.0))? * 1e3;
    let index = a.fiber_index.unwrap_or(DEFAULT_FIBER_INDEX);
    DshiParams::new(power, eom, width, length, index).map_err(|e| Failure::with_flags(e, &["--fiber-index"]))
}

fn plan_from(a: &SimulateArgs) -> CliResult<Plan> {
    let bumps = match a.bump_height_db {
        Some(h) => Some(
            ServoBumpModel::new(
                positive("--bump-offset-khz", a.bump_offset_khz.unwrap_or(50.0))? * 1e3,
                positive("--bump-width-khz", a.bump_width_khz.unwrap_or(20.0))? * 1e3,
                h,
                !a.bump_one_sided.unwrap_or(false),
            )
            .map_err(|e| Failure::with_flags(e, &["--bump-height-db"]))?,
        ),
        None => None,
    };
    Ok(Plan {
        mode: a.mode.unwrap_or(SimMode::Analytic),
        params: params_from(a)?,
        span_hz: positive("--span-khz", a.span_khz.unwrap_or(200.0))? * 1e3,
        step_hz: positive("--step-hz", a.step_hz.unwrap_or(20.0))?,
        broadening_hz: a.broadening_hz.map(|b| positive("--broadening-hz", b)).transpose()?,
        bumps,
        flicker_level: non_negative("--flicker-level", a.flicker_level.unwrap_or(0.0))?,
        rin_sigma: non_negative("--rin-sigma", a.rin_sigma.unwrap_or(0.0))?,
        seed: a.seed.unwrap_or(0),
        segments: a.segments.unwrap_or(64),
        segment_s: positive("--segment-ms", a.segment_ms.unwrap_or(5.0))? * 1e-3,
        sample_rate_hz: a.sample_rate_mhz.map(|r| positive("--sample-rate-mhz", r).map(|r| r * 1e6)).transpose()?,
        unit: a.unit.unwrap_or(OutputUnit::Linear),
    })
}

fn generate(plan: &Plan, params: &DshiParams) -> CliResult<SpectrumTrace> {
    let carrier = params.eom_frequency_hz();
    let mut trace = match plan.mode {
        SimMode::Analytic => {
            let half = (plan.span_hz / plan.step_hz).round() as usize;
            let grid = FrequencyGrid::centered(carrier, plan.step_hz, half.max(1))
                .map_err(|e| Failure::with_flags(e, &["--span-khz", "--step-hz"]))?;
            analytic_psd(params, &grid).map_err(|e| Failure::with_flags(e, &["--span-khz", "--eom-mhz"]))?
        }
        SimMode::Montecarlo => {
            let noise = NoiseModel::new(params.laser_fwhm_hz(), plan.flicker_level, plan.rin_sigma)?;
            let defaults = SimConfig::for_params(params);
            let cfg = SimConfig {
                sample_rate_hz: plan.sample_rate_hz.unwrap_or(defaults.sample_rate_hz),
                segment_duration_s: plan.segment_s,
                segments: plan.segments,
                seed: plan.seed,
                span_hz: plan.span_hz,
            };
            simulate_time_domain(params, &noise, &cfg).map_err(|e| {
                Failure::with_flags(e, &["--sample-rate-mhz", "--segment-ms", "--segments", "--span-khz"])
            })?
        }
    };
    if let Some(b) = plan.broadening_hz {
        trace = gaussian_broaden(&trace, b).map_err(|e| Failure::with_flags(e, &["--broadening-hz", "--step-hz"]))?;
    }
    if let Some(bumps) = &plan.bumps {
        trace = inject_servo_bumps(&trace, carrier, bumps)
            .map_err(|e| Failure::with_flags(e, &["--bump-offset-khz", "--span-khz"]))?;
    }
    Ok(match plan.unit {
        OutputUnit::Linear => trace,
        OutputUnit::Dbm => trace.to_dbm()?,
    })
}

fn swept(params: DshiParams, sweep: Sweep, value: f64) -> CliResult<DshiParams> {
    let (flag, result) = match sweep {
        Sweep::Eom => ("--eom-mhz", params.with_eom_frequency(value * 1e6)),
        Sweep::Power => ("--power", params.with_optical_power(value)),
        Sweep::Linewidth => ("--linewidth-hz", params.with_laser_fwhm(value)),
        Sweep::Fiber => ("--fiber-km", params.with_fiber_length(value * 1e3)),
    };
    result.map_err(|e| Failure::with_flags(e, &["--values", flag]))
}

fn file_stem(sweep: Sweep) -> &'static str {
    match sweep {
        Sweep::Eom => "eom_mhz",
        Sweep::Power => "power",
        Sweep::Linewidth => "linewidth_hz",
        Sweep::Fiber => "fiber_km",
    }
}

fn save(trace: &SpectrumTrace, path: &Path) -> CliResult<()> {
    write_trace(trace, path)?;
    println!("{}", path.display());
    Ok(())
}

pub fn run(args: SimulateArgs, verbose: u8) -> CliResult<()> {
    let plan = plan_from(&args)?;
    match args.sweep {
        None => {
            if args.values.is_some() {
                return Err(usage("--values requires --sweep"));
            }
            let out = args.out.clone().unwrap_or_else(|| PathBuf::from("trace.csv"));
            save(&generate(&plan, &plan.params)?, &out)
        }
        Some(sweep) => {
            let values =
                args.values.as_deref().filter(|v| !v.is_empty()).ok_or_else(|| usage("--sweep needs --values"))?;
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("sweep"));
            std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
            for &v in values {
                if verbose > 0 {
                    eprintln!("simulating {} = {v}", file_stem(sweep));
                }
                let params = swept(plan.params, sweep, v)?;
                save(&generate(&plan, &params)?, &dir.join(format!("{}_{v}.csv", file_stem(sweep))))?;
            }
            Ok(())
        }
    }
}
