use std::path::PathBuf;

use atwr_core::problems::SolverMode;
use atwr_core::simulate::{Scheme, DEFAULT_REALIZATIONS};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "atwr-lab", version, about = "Monte Carlo sweeps for asymmetric two-way relay precoding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep mean weighted sum-rate over SNR or TUE distance and write CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Balanced,
    Unbalanced,
    CoverageExt,
    CoverageHole,
}

impl ScenarioArg {
    pub fn is_coverage(self) -> bool {
        matches!(self, ScenarioArg::CoverageExt | ScenarioArg::CoverageHole)
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,

    /// Relay and terminal antenna counts, `N,M`.
    #[arg(long, value_parser = parse_antennas, default_value = "4,2")]
    pub antennas: (usize, usize),

    /// UE-relay SNR axis in dB: `0,10,20` or `start:stop:step`.
    #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
    pub snr_db: Option<Axis>,

    /// BS-relay SNR in dB for the unbalanced scenario.
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub snr_b_db: f64,

    /// TUE-relay distance axis in meters for coverage scenarios.
    #[arg(long, value_parser = parse_axis)]
    pub distances_m: Option<Axis>,

    /// Defaults to `bi-ct,bi-cp,owr`, plus `direct` for coverage scenarios.
    #[arg(long, value_delimiter = ',')]
    pub schemes: Option<Vec<Scheme>>,

    /// Per-direction stream weights, `w_u,w_b`.
    #[arg(long, value_parser = parse_weights, default_value = "1,1")]
    pub weights: (f64, f64),

    #[arg(long, default_value_t = DEFAULT_REALIZATIONS)]
    pub realizations: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value = "auto")]
    pub solver: SolverMode,

    /// TOML overrides for geometry, radio and path-loss parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parsed axis values; a newtype so clap does not treat it as a repeated flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(pub Vec<f64>);

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// Comma-separated values, or an inclusive `start:stop:step` range.
pub fn parse_axis(s: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(number).collect::<Result<Vec<_>, _>>()?,
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if step <= 0.0 {
                return Err("range step must be > 0".into());
            }
            if stop < start {
                return Err("range stop must be >= start".into());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=count).map(|k| start + k as f64 * step).collect()
        }
        _ => return Err(format!("expected a list or start:stop:step, got '{s}'")),
    };
    if values.is_empty() {
        return Err("axis is empty".into());
    }
    Ok(Axis(values))
}

fn pair(s: &str) -> Result<(&str, &str), String> {
    s.split_once(',').ok_or_else(|| format!("expected two comma-separated values, got '{s}'"))
}

pub fn parse_antennas(s: &str) -> Result<(usize, usize), String> {
    let (n, m) = pair(s)?;
    let count = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("'{v}' is not an antenna count"));
    Ok((count(n)?, count(m)?))
}

pub fn parse_weights(s: &str) -> Result<(f64, f64), String> {
    let (u, b) = pair(s)?;
    let (u, b) = (number(u)?, number(b)?);
    if u < 0.0 || b < 0.0 {
        return Err("weights must be >= 0".into());
    }
    Ok((u, b))
}
