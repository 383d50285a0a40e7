use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use teleclone_core::protocols::Variant;
use teleclone_core::scalar::Squeezing;

#[derive(Debug, Parser)]
#[command(
    name = "teleclone",
    version,
    about = "Telecloning with phase-conjugate inputs: exact Gaussian simulation, closed forms and Monte Carlo checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one protocol and report its output states and fidelities as JSON.
    Simulate(SimulateArgs),
    /// Vary one parameter and write one CSV row per grid point.
    Sweep(SweepArgs),
    /// Compare exact moments with Monte Carlo sampling and report z-scores as JSON.
    Verify(VerifyArgs),
    /// PCI versus standard telecloning at r = inf for M = 2, 3 and M -> inf, as CSV.
    Table(TableArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    /// a, a-swapped, a-generalized, b or baseline.
    #[arg(long, default_value = "a", value_parser = parse_variant)]
    pub variant: Variant,
    /// Number of clones M (and of anticlones).
    #[arg(long, default_value_t = 2)]
    pub clones: usize,
    /// Number of copies N of the input and of its conjugate.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Squeezing r of the EPR pair; `inf` for the ideal limit.
    #[arg(long, default_value = "1", value_parser = parse_squeezing, allow_hyphen_values = true)]
    pub squeezing: Squeezing<f64>,
    /// Squeezing r2 of the second EPR pair (variant b). Defaults to --squeezing.
    #[arg(long, value_parser = parse_squeezing, allow_hyphen_values = true)]
    pub squeezing2: Option<Squeezing<f64>>,
    /// Input coherent amplitude as `x,p`.
    #[arg(long, default_value = "0,0", value_parser = parse_input, allow_hyphen_values = true)]
    pub input: (f64, f64),
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "M")]
    Clones,
    #[value(name = "N")]
    Copies,
    #[value(name = "r")]
    Squeezing,
    #[value(name = "r2")]
    Squeezing2,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Parameter to vary.
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,
    /// Evenly spaced points for the r and r2 axes (default 11). M and N step
    /// through every integer.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Check a single cell of this variant instead of the default grid.
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long, requires = "variant")]
    pub clones: Option<usize>,
    #[arg(long, requires = "variant")]
    pub copies: Option<usize>,
    #[arg(long, requires = "variant", value_parser = parse_squeezing, allow_hyphen_values = true)]
    pub squeezing: Option<Squeezing<f64>>,
    #[arg(long, requires = "variant", value_parser = parse_squeezing, allow_hyphen_values = true)]
    pub squeezing2: Option<Squeezing<f64>>,
    #[arg(long, requires = "variant", value_parser = parse_input, allow_hyphen_values = true)]
    pub input: Option<(f64, f64)>,
    /// Monte Carlo shots per cell (at least 1000).
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1000..))]
    pub samples: u64,
    #[arg(long, env = "TELECLONE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: teleclone_core::Error| e.to_string())
}

pub fn parse_squeezing(s: &str) -> Result<Squeezing<f64>, String> {
    let t = s.trim();
    if ["inf", "infinity", "∞"].iter().any(|w| t.eq_ignore_ascii_case(w)) {
        return Ok(Squeezing::Infinite);
    }
    let r: f64 = t.parse().map_err(|_| format!("`{s}` is not a number or `inf`"))?;
    if !r.is_finite() {
        Err(format!("`{s}` is not finite; use `inf` for the ideal limit"))
    } else if r < 0.0 {
        Err(format!("squeezing must be non-negative, got {r}"))
    } else {
        Ok(Squeezing::Finite(r))
    }
}

pub fn parse_input(s: &str) -> Result<(f64, f64), String> {
    let (x, p) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `x,p`, got `{s}`"))?;
    let num = |v: &str| -> Result<f64, String> {
        let n: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
        if n.is_finite() {
            Ok(n)
        } else {
            Err(format!("`{v}` is not finite"))
        }
    };
    Ok((num(x)?, num(p)?))
}
