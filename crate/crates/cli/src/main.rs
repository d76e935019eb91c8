//! `vlcnoma`: CSV experiment driver for NOMA in VLC downlinks with randomly
//! oriented receivers.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Family;
use config::{Experiment, RawConfig};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "vlcnoma", version, about = "Analytic and Monte Carlo NOMA sum rates for VLC with random receiver orientation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output CSV path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Feedback mode (full-csi, mean-angle, distance-only, two-bit-inst, two-bit-mean, one-bit-distance).
    #[arg(long, global = true)]
    mode: Option<String>,
    /// OMA baseline (time-shared or paper-literal).
    #[arg(long = "oma-mode", global = true)]
    oma_mode: Option<String>,
    /// Rescale the power coefficients so their squares sum to one.
    #[arg(long, global = true)]
    normalize_power: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Vertical-angle CDF: analytic vs empirical, with the KS distance.
    ValidateAngleCdf,
    /// Nonzero-user count PMF: analytic vs conditional histogram.
    ValidateKnz,
    /// Squared-gain CDF of one family vs conditioned samples.
    ValidateChannelCdf {
        #[arg(long, value_enum)]
        family: Family,
    },
    /// NOMA/OMA sum rates over the SNR grid.
    SweepSnr,
    /// Sum rates over the maximum-deviation grid at fixed SNR.
    SweepDeviation,
    /// Two-bit sum rates over the threshold-coefficient grid.
    SweepThresholds,
    /// Noiseless vs noisy feedback over the SNR grid.
    NoisyCompare,
}

fn resolve(cli: &Cli) -> CliResult<Experiment> {
    let mut raw = RawConfig::default();
    if let Some(path) = &cli.config {
        raw.apply_file(path)?;
    }
    for pair in &cli.set {
        raw.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", &seed.to_string())?;
    }
    if let Some(trials) = cli.trials {
        raw.set("trials", &trials.to_string())?;
    }
    if let Some(mode) = &cli.mode {
        raw.set("mode", mode)?;
    }
    if let Some(oma) = &cli.oma_mode {
        raw.set("oma_mode", oma)?;
    }
    if cli.normalize_power {
        raw.set("normalize_power", "true")?;
    }
    Experiment::from_raw(raw)
}

fn run(cli: &Cli) -> CliResult<()> {
    let exp = resolve(cli)?;
    if let Some(gap) = exp.power_mismatch {
        let action = if exp.raw.get("normalize_power") == "true" {
            "normalized"
        } else {
            "used as given; pass --normalize-power to rescale"
        };
        eprintln!("warning: beta_weak^2 + beta_strong^2 differs from 1 by {gap:.3e} ({action})");
    }
    let table = match &cli.command {
        Command::ValidateAngleCdf => commands::validate_angle_cdf(&exp)?,
        Command::ValidateKnz => commands::validate_knz(&exp)?,
        Command::ValidateChannelCdf { family } => commands::validate_channel_cdf(&exp, *family)?,
        Command::SweepSnr => commands::sweep_snr(&exp)?,
        Command::SweepDeviation => commands::sweep_deviation(&exp)?,
        Command::SweepThresholds => commands::sweep_thresholds(&exp)?,
        Command::NoisyCompare => commands::noisy_compare(&exp)?,
    };
    table.write(cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
