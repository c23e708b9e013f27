//! Command-line arguments and their translation into library parameters.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairrec::{FairnessMeasure, ItemUtilityModel, MisestScope, TieBreak};
use serde::Serialize;

/// An invalid or inconsistent command-line setting.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "fairrec", version, about = "Fairness tradeoffs in recommendation policies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write a synthetic utility matrix.
    #[command(subcommand)]
    Generate(GenerateKind),
    /// User fairness against the item-fairness requirement over a gamma grid.
    Tradeoff(TradeoffArgs),
    /// Price of fairness of one population.
    Pof(PofArgs),
    /// Price of misestimation over a gamma grid.
    Misest(MisestArgs),
    /// Compare the LP path against the two-type closed form.
    ValidateClosedForm(ValidateArgs),
    /// Closed-form price of fairness as the type balance varies.
    SweepAlpha(SweepAlphaArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(GenerateKind::TwoType(_)) => "generate two-type",
            Command::Generate(GenerateKind::Homogeneous(_)) => "generate homogeneous",
            Command::Generate(GenerateKind::Misest(_)) => "generate misest",
            Command::Tradeoff(_) => "tradeoff",
            Command::Pof(_) => "pof",
            Command::Misest(_) => "misest",
            Command::ValidateClosedForm(_) => "validate-closed-form",
            Command::SweepAlpha(_) => "sweep-alpha",
        }
    }

    pub fn out_dir(&self) -> &PathBuf {
        match self {
            Command::Generate(GenerateKind::TwoType(a)) => &a.out.out,
            Command::Generate(GenerateKind::Homogeneous(a)) => &a.out.out,
            Command::Generate(GenerateKind::Misest(a)) => &a.out.out,
            Command::Tradeoff(a) => &a.out.out,
            Command::Pof(a) => &a.out.out,
            Command::Misest(a) => &a.out.out,
            Command::ValidateClosedForm(a) => &a.out.out,
            Command::SweepAlpha(a) => &a.out.out,
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenerateKind {
    /// Users holding `--values` or its reversal.
    TwoType(GenTwoTypeArgs),
    /// Users who all hold `--values`.
    Homogeneous(GenHomogeneousArgs),
    /// Known users of both types plus cold-start users with averaged rows.
    Misest(GenMisestArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenTwoTypeArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100)]
    pub users: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenHomogeneousArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub users: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenMisestArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 100)]
    pub users: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PopulationKind {
    TwoType,
    Homogeneous,
}

/// Where the utility matrix comes from: a file, or a generated population.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SourceArgs {
    /// Utility matrix CSV.
    #[arg(long, conflicts_with_all = ["values", "alpha"])]
    pub matrix: Option<PathBuf>,
    /// Value sequence of a generated population.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Fraction of type-1 users in a generated two-type population.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = PopulationKind::TwoType)]
    pub population: PopulationKind,
    #[arg(long, default_value_t = 100)]
    pub users: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureArg {
    Maxmin,
    Nash,
    Sumkmin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreakArg {
    Solver,
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeArg {
    All,
    MisestGroup,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = MeasureArg::Maxmin)]
    pub measure: MeasureArg,
    /// Number of smallest utilities summed by `sumkmin`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Item-side exposure weight in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long = "tie-break", value_enum, default_value_t = TieBreakArg::Solver)]
    pub tie_break: TieBreakArg,
}

impl SolveArgs {
    pub fn measure(&self) -> anyhow::Result<FairnessMeasure> {
        match (self.measure, self.k) {
            (MeasureArg::Maxmin, None) => Ok(FairnessMeasure::MaxMin),
            (MeasureArg::Nash, None) => Ok(FairnessMeasure::NashWelfare),
            (MeasureArg::Sumkmin, Some(k)) => Ok(FairnessMeasure::sum_k_min(k)?),
            (MeasureArg::Sumkmin, None) => Err(config_error("--measure sumkmin needs --k")),
            (_, Some(_)) => Err(config_error("--k only applies to --measure sumkmin")),
        }
    }

    pub fn item_model(&self) -> anyhow::Result<ItemUtilityModel> {
        ItemUtilityModel::new(self.delta).map_err(|e| config_error(format!("--delta: {e}")))
    }

    pub fn tie_break(&self) -> TieBreak {
        match self.tie_break {
            TieBreakArg::Solver => TieBreak::SolverDefault,
            TieBreakArg::Canonical => TieBreak::CanonicalSymmetric,
        }
    }
}

impl ScopeArg {
    pub fn scope(self) -> MisestScope {
        match self {
            ScopeArg::All => MisestScope::AllUsers,
            ScopeArg::MisestGroup => MisestScope::MisestimatedGroup,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TradeoffArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Number of evenly spaced points in [0, 1], or a comma-separated list.
    #[arg(long, default_value = "11")]
    pub gammas: String,
    /// Repetitions, each on a fresh subsample.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Users drawn without replacement in each run.
    #[arg(long)]
    pub sample_users: Option<usize>,
    /// Items drawn without replacement in each run.
    #[arg(long)]
    pub sample_items: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write an SVG chart of the curve.
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PofArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MisestArgs {
    /// True utility matrix CSV; requires `--estimate`.
    #[arg(long, requires = "estimate", conflicts_with_all = ["values", "beta"])]
    pub matrix: Option<PathBuf>,
    /// Estimated utility matrix CSV.
    #[arg(long, requires = "matrix")]
    pub estimate: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Fraction of known users of each type.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub users: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "11")]
    pub gammas: String,
    #[arg(long, value_enum, default_value_t = ScopeArg::All)]
    pub scope: ScopeArg,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    /// Count `N` for the grid `1/(N+1), ..., N/(N+1)`, or a comma-separated list.
    #[arg(long, default_value = "9")]
    pub alpha: String,
    /// Largest accepted gap between the two paths.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepAlphaArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    /// Count `N` for the grid `1/(N+1), ..., N/(N+1)`, or a comma-separated list.
    #[arg(long, default_value = "19")]
    pub alpha: String,
    /// Add the LP-path price next to the closed form.
    #[arg(long)]
    pub lp: bool,
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

fn parse_list(spec: &str, flag: &str) -> anyhow::Result<Vec<f64>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| config_error(format!("{flag}: '{s}' is not a number")))
        })
        .collect()
}

fn parse_count(spec: &str, flag: &str) -> anyhow::Result<Option<usize>> {
    if spec.contains(',') || spec.contains('.') {
        return Ok(None);
    }
    spec.trim()
        .parse::<usize>()
        .map(Some)
        .map_err(|_| config_error(format!("{flag}: '{spec}' is neither a count nor a list")))
}

/// A count `N >= 2` means `N` evenly spaced points from 0 to 1; anything with
/// a comma or a decimal point is an explicit list.
pub fn parse_gamma_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let grid = match parse_count(spec, "--gammas")? {
        Some(n) if n < 2 => {
            return Err(config_error(format!(
                "--gammas {n}: a count needs at least two points; pass a list such as 1.0 for one"
            )))
        }
        Some(n) => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
        None => parse_list(spec, "--gammas")?,
    };
    fairrec::optimizer::sweep::validate_gamma_grid(&grid)
        .map_err(|e| config_error(format!("--gammas: {e}")))?;
    Ok(grid)
}

/// A count `N >= 1` means the interior points `k / (N + 1)`.
pub fn parse_alpha_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let grid = match parse_count(spec, "--alpha")? {
        Some(0) => return Err(config_error("--alpha 0: the grid is empty")),
        Some(n) => (1..=n).map(|k| k as f64 / (n + 1) as f64).collect(),
        None => parse_list(spec, "--alpha")?,
    };
    if grid.is_empty() {
        return Err(config_error("--alpha: the grid is empty"));
    }
    if let Some(a) = grid.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(config_error(format!("--alpha: {a} outside (0, 1)")));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_counts_and_lists() {
        assert_eq!(parse_gamma_grid("3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_gamma_grid("0,0.25,1").unwrap(), vec![0.0, 0.25, 1.0]);
        assert_eq!(parse_gamma_grid("1.0").unwrap(), vec![1.0]);
        assert!(parse_gamma_grid("1").is_err());
        assert!(parse_gamma_grid("0.5,0.2").is_err());
        assert!(parse_gamma_grid("0,1.5").is_err());
        assert!(parse_gamma_grid("abc").is_err());
    }

    #[test]
    fn alpha_counts_and_lists() {
        let grid = parse_alpha_grid("9").unwrap();
        assert_eq!(grid.len(), 9);
        assert!((grid[0] - 0.1).abs() < 1e-15 && (grid[8] - 0.9).abs() < 1e-15);
        assert_eq!(parse_alpha_grid("0.3, 0.5").unwrap(), vec![0.3, 0.5]);
        assert!(parse_alpha_grid("0").is_err());
        assert!(parse_alpha_grid("0,0.5").is_err());
    }

    #[test]
    fn measure_flags() {
        let mut solve = SolveArgs {
            measure: MeasureArg::Sumkmin,
            k: None,
            delta: 0.0,
            tie_break: TieBreakArg::Solver,
        };
        assert!(solve.measure().is_err());
        solve.k = Some(2);
        assert_eq!(solve.measure().unwrap(), FairnessMeasure::SumKMin { k: 2 });
        solve.measure = MeasureArg::Maxmin;
        assert!(solve.measure().is_err());
        solve.delta = 1.5;
        assert!(solve.item_model().is_err());
    }
}
