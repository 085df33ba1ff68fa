//! Command-line definitions.

use std::path::PathBuf;

use attrest::{DegeneratePolicy, Family};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "attrest",
    version,
    about = "Ratio-type estimators of a population mean using a binary auxiliary attribute",
    long_about = "Analyze, optimize, simulate and verify four ratio-type estimators of a \
                  finite-population mean that use a binary auxiliary attribute with known \
                  proportion P.\n\n\
                  Population files are CSV with columns y,phi (optional header, phi in {0,1}).\n\n\
                  EXAMPLES:\n  \
                  attrest analyze --input pop.csv --n 20 --family sahai_ray --param w=1\n  \
                  attrest analyze --input pop.csv --n 20 --optimal --order 1 --format json\n  \
                  attrest simulate --input pop.csv --n 20 --param w=0.8 --family t3 --seed 7\n  \
                  attrest verify\n  \
                  attrest synth --size 200 --proportion 0.25 --rho 0.6 --seed 1 --output pop.csv"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First/second-order bias and MSE, engine-derived and as published
    Analyze(AnalyzeArgs),
    /// First-order closed-form and second-order numerical optima
    Optimize(OptimizeArgs),
    /// Monte Carlo bias and MSE compared with the approximations
    Simulate(SimulateArgs),
    /// Exact bias and MSE over every SRSWOR sample
    Enumerate(EnumerateArgs),
    /// Lemma audit against enumeration plus the printed-formula discrepancy report
    Verify(VerifyArgs),
    /// Generate a seeded synthetic population file
    Synth(SynthArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Optimize(_) => "optimize",
            Command::Simulate(_) => "simulate",
            Command::Enumerate(_) => "enumerate",
            Command::Verify(_) => "verify",
            Command::Synth(_) => "synth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provider {
    /// Lemma formulas in C_pq and L1..L4
    Lemma,
    /// Exhaustive enumeration of all samples
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Exclude degenerate samples and count them
    Skip,
    /// Stop at the first degenerate sample
    Abort,
}

impl From<Policy> for DegeneratePolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Skip => DegeneratePolicy::Skip,
            Policy::Abort => DegeneratePolicy::Abort,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PopulationArgs {
    /// Population CSV file (columns y,phi)
    #[arg(long)]
    pub input: PathBuf,
    /// Sample size
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimatorArgs {
    /// Estimator family: chakrabarty|khoshnevisan_ratio|sahai_ray|solanki or t1..t4
    /// (repeatable; default: all four)
    #[arg(long = "family", value_parser = parse_family)]
    pub families: Vec<Family>,
    /// Parameter as NAME=VALUE (repeatable): alpha, g, beta, w, lambda, delta
    #[arg(long = "param", value_parser = parse_param, allow_hyphen_values = true)]
    pub params: Vec<(String, f64)>,
    /// Use optimal parameters (closed form at order 1, numerical at order 2)
    #[arg(long)]
    pub optimal: bool,
}

impl EstimatorArgs {
    pub fn families(&self) -> Vec<Family> {
        if self.families.is_empty() {
            Family::ALL.to_vec()
        } else {
            let mut out: Vec<Family> = Vec::new();
            for f in &self.families {
                if !out.contains(f) {
                    out.push(*f);
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    /// Search bracket LO:HI for the tuning parameter
    #[arg(long, value_parser = parse_bracket, default_value = "-5:5", allow_hyphen_values = true)]
    pub bracket: (f64, f64),
    /// Golden-section tolerance
    #[arg(long, default_value_t = attrest::optimizer::DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report to this file instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub population: PopulationArgs,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    /// Approximation order
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    /// Source of the design moments E[e0^a e1^b] for the engine-derived values
    #[arg(long, value_enum, default_value_t = Provider::Lemma)]
    pub provider: Provider,
    /// Degenerate-sample policy for exact values (enumerate provider)
    #[arg(long, value_enum, default_value_t = Policy::Skip)]
    pub policy: Policy,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub population: PopulationArgs,
    /// Estimator family (repeatable; default: all four)
    #[arg(long = "family", value_parser = parse_family)]
    pub families: Vec<Family>,
    /// Fixed g for the Khoshnevisan family (the search runs over beta)
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub g: f64,
    /// Approximation order
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Coarse grid points before golden-section refinement
    #[arg(long, default_value_t = attrest::optimizer::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Also search Solanki over (lambda, delta) in bracket x bracket
    #[arg(long)]
    pub solanki_plane: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub population: PopulationArgs,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    /// Order used for --optimal
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    /// Number of Monte Carlo replicates (at least 1000)
    #[arg(long, default_value_t = 100_000)]
    pub replicates: usize,
    /// Random seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Degenerate-sample policy
    #[arg(long, value_enum, default_value_t = Policy::Skip)]
    pub policy: Policy,
    /// Worker threads (results do not depend on it)
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub population: PopulationArgs,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    /// Order used for --optimal
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    /// Degenerate-sample policy
    #[arg(long, value_enum, default_value_t = Policy::Skip)]
    pub policy: Policy,
    /// Largest number of subsets to enumerate
    #[arg(long, default_value_t = attrest::sampling::DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Directory of population CSV files (default: the bundled synthetic sweep)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Sample size for directory populations (default: largest n <= N/3 that
    /// keeps C(N,n) under the enumeration cap)
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of bundled synthetic populations
    #[arg(long, default_value_t = 20)]
    pub cases: usize,
    /// Seed of the bundled synthetic sweep
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Population size N
    #[arg(long)]
    pub size: usize,
    /// Attribute proportion P (the file has exactly round(N*P) ones)
    #[arg(long)]
    pub proportion: f64,
    /// Random seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Target population mean of y
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub mean: f64,
    /// Target coefficient of variation of y
    #[arg(long, default_value_t = 0.5)]
    pub cv: f64,
    /// Target point-biserial correlation between phi and y
    #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
    pub rho: f64,
    /// Explicit conditional distributions MEAN0:SD0:MEAN1:SD1 (overrides the targets)
    #[arg(long, value_parser = parse_conditional, allow_hyphen_values = true)]
    pub conditional: Option<(f64, f64, f64, f64)>,
    /// Output CSV path (default: standard output)
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: attrest::Error| e.to_string())
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let name = name.trim().to_ascii_lowercase();
    const KNOWN: [&str; 6] = ["alpha", "g", "beta", "w", "lambda", "delta"];
    if !KNOWN.contains(&name.as_str()) {
        return Err(format!(
            "unknown parameter {name:?}; expected one of {}",
            KNOWN.join(", ")
        ));
    }
    Ok((name, parse_number(value)?))
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("bracket needs LO < HI, got {lo}:{hi}"))
    }
}

fn parse_conditional(s: &str) -> Result<(f64, f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(format!("expected MEAN0:SD0:MEAN1:SD1, got {s:?}"));
    }
    Ok((
        parse_number(parts[0])?,
        parse_number(parts[1])?,
        parse_number(parts[2])?,
        parse_number(parts[3])?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values() {
        assert_eq!(parse_param("w=1.5").unwrap(), ("w".to_string(), 1.5));
        assert_eq!(
            parse_param("Beta=-0.25").unwrap(),
            ("beta".to_string(), -0.25)
        );
        assert!(parse_param("k=1").is_err());
        assert!(parse_param("w").is_err());
        assert_eq!(parse_bracket("-3:3").unwrap(), (-3.0, 3.0));
        assert!(parse_bracket("3:-3").is_err());
        assert!(parse_bracket("nan:1").is_err());
        assert_eq!(parse_conditional("1:2:3:4").unwrap(), (1.0, 2.0, 3.0, 4.0));
    }

    #[test]
    fn command_line_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
