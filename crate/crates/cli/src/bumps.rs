use std::path::PathBuf;

use clap::Args;
use dshi_core::dshi::extract_servo_bumps;
use dshi_core::io::{read_trace, write_trace};
use serde::{Deserialize, Serialize};

use crate::config::{layered, usage, CliResult, Failure};

layered! {
    #[derive(Debug, Default, Args, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
    pub struct BumpsArgs {
        /// Measured trace CSV
        #[arg(long)]
        pub measured: Option<PathBuf>,
        /// Simulated model trace CSV on the same grid
        #[arg(long)]
        pub model: Option<PathBuf>,
        /// Ratio trace CSV [default: bumps.csv]
        #[arg(long)]
        pub out: Option<PathBuf>,
    }
}

pub fn run(args: BumpsArgs, verbose: u8) -> CliResult<()> {
    let measured = read_trace(args.measured.as_ref().ok_or_else(|| usage("--measured is required"))?)?;
    let model = read_trace(args.model.as_ref().ok_or_else(|| usage("--model is required"))?)?;
    let ratio =
        extract_servo_bumps(&measured, &model).map_err(|e| Failure::with_flags(e, &["--measured", "--model"]))?;
    let out = args.out.unwrap_or_else(|| PathBuf::from("bumps.csv"));
    write_trace(&ratio, &out)?;
    if verbose > 0 {
        let peak = ratio.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        eprintln!("largest ratio {:.3} dB", 10.0 * peak.log10());
    }
    println!("{}", out.display());
    Ok(())
}
