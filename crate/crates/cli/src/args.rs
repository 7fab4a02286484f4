use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relkern::analysis::Predictor;
use relkern::features::Nonlinearity;
use relkern::{ItemPair, Ridge};

#[derive(Debug, Parser)]
#[command(name = "relkern", version, about = "Exchangeable-kernel ridge regression on relational tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file; `-` writes to stdout.
    #[arg(long, global = true, default_value = "-")]
    pub out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the closed form against the dual solver over a grid.
    Verify(VerifyArgs),
    /// Rank profile of a TI or TIExc task.
    Ranks(RanksArgs),
    /// Predictions on item pairs.
    Predict(PredictArgs),
    /// Margin summaries over an (alpha, creg_inv) grid.
    PhaseDiagram(PhaseArgs),
    /// Success-area fractions of several TIExc tasks on a shared grid.
    Sweep(SweepArgs),
    /// Margins of chosen pairs along one parameter, with zero crossings.
    Curves(CurvesArgs),
    /// Four-hot primal solution split into ranks and conjunctive readout.
    Decompose(DecomposeArgs),
    /// Random-feature networks against the exchangeable kernel.
    Features(FeaturesArgs),
    /// Hold'em equity, hierarchies and generalization proportions.
    #[command(subcommand)]
    Poker(PokerCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Ti,
    Tp,
    Tiexc,
}

/// Task selection. `--p/--q` imply TIExc, a bare `--n` means TI.
#[derive(Debug, Clone, Args)]
pub struct TaskArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
}

/// Either `(alpha, creg_inv)` or a full kernel triple with ridge `c`.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, conflicts_with_all = ["kappa_s", "kappa_o", "kappa_d", "c"])]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0, conflicts_with_all = ["kappa_s", "kappa_o", "kappa_d", "c"])]
    pub creg_inv: f64,
    #[arg(long, requires_all = ["kappa_o", "kappa_d"])]
    pub kappa_s: Option<f64>,
    #[arg(long, requires_all = ["kappa_s", "kappa_d"])]
    pub kappa_o: Option<f64>,
    #[arg(long, requires_all = ["kappa_s", "kappa_o"])]
    pub kappa_d: Option<f64>,
    /// Ridge strength, a positive number or `inf`.
    #[arg(long, requires = "kappa_s")]
    pub c: Option<Ridge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredictorArg {
    ClosedForm,
    Oracle,
}

impl From<PredictorArg> for Predictor {
    fn from(p: PredictorArg) -> Predictor {
        match p {
            PredictorArg::ClosedForm => Predictor::ClosedForm,
            PredictorArg::Oracle => Predictor::Oracle,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    /// Alpha values; defaults to 0.05, 0.15, ..., 0.95.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Effective inverse regularization values; defaults to 0, 0.01, 0.1, 1, 10.
    #[arg(long, value_delimiter = ',')]
    pub creg_inv: Vec<f64>,
    /// Relative tolerance, scaled by max(1, |oracle|).
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct RanksArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = PredictorArg::ClosedForm)]
    pub predictor: PredictorArg,
    /// Pairs as `j,k`; repeat the flag for several. Defaults to all ordered pairs.
    #[arg(long = "pair", value_parser = parse_pair)]
    pub pairs: Vec<ItemPair>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Use the default grids (49 alphas, 22 creg_inv values).
    #[arg(long, conflicts_with_all = ["alphas", "creg_invs"])]
    pub grid_default: bool,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub creg_invs: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = PredictorArg::ClosedForm)]
    pub predictor: PredictorArg,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TIExc tasks as `n,p,q`; repeat the flag for several.
    #[arg(long = "task", value_parser = parse_triple)]
    pub tasks: Vec<(usize, usize, usize)>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VaryArg {
    Alpha,
    CregInv,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[arg(long, value_enum)]
    pub vary: VaryArg,
    /// Value of the parameter held fixed.
    #[arg(long)]
    pub at: f64,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    /// Number of evenly spaced samples from `--from` to `--to`.
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    /// Pairs as `j,k`; repeat the flag for several.
    #[arg(long = "pair", value_parser = parse_pair, required = true)]
    pub pairs: Vec<ItemPair>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [512usize, 32768])]
    pub widths: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2, 3, 4])]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = Nonlinearity::Relu)]
    pub nonlinearity: Nonlinearity,
    /// Ridge strength, a positive number or `inf`.
    #[arg(long, default_value = "inf")]
    pub c: Ridge,
}

#[derive(Debug, Subcommand)]
pub enum PokerCommand {
    /// Full 169 x 169 Monte Carlo equity matrix.
    Equity(EquityArgs),
    /// Equity of one class against another.
    Matchup(MatchupArgs),
    /// Hand hierarchies that realize a task, one per seed.
    Hierarchy(HierarchyArgs),
    /// Fraction of sampled hierarchies in which item i beats item j.
    Proportions(HierarchyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct EquityArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Mc)]
    pub method: MethodArg,
    #[arg(long, default_value_t = relkern_poker::equity::DEFAULT_SAMPLES)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MatchupArgs {
    pub a: relkern_poker::HoleClass,
    pub b: relkern_poker::HoleClass,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    #[arg(long, default_value_t = relkern_poker::equity::DEFAULT_SAMPLES)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// The equity matrix comes from `--matrix`, or is built by Monte Carlo with
/// `--samples` and `--matrix-seed`.
#[derive(Debug, Args)]
pub struct HierarchyArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value_t = relkern_poker::equity::DEFAULT_SAMPLES, conflicts_with = "matrix")]
    pub samples: u64,
    #[arg(long, default_value_t = 1, conflicts_with = "matrix")]
    pub matrix_seed: u64,
    #[arg(long, default_value_t = relkern_poker::hierarchy::DEFAULT_BAND.0)]
    pub band_lo: f64,
    #[arg(long, default_value_t = relkern_poker::hierarchy::DEFAULT_BAND.1)]
    pub band_hi: f64,
    /// Hierarchies are sampled with seeds `first_seed .. first_seed + count`.
    #[arg(long, default_value_t = 200)]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long, default_value_t = relkern_poker::hierarchy::DEFAULT_MAX_RESTARTS)]
    pub max_restarts: usize,
}

fn parse_pair(s: &str) -> Result<ItemPair, String> {
    let (j, k) = s.split_once(',').ok_or_else(|| format!("expected j,k, got '{s}'"))?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("'{x}': {e}"));
    ItemPair::new(num(j)?, num(k)?).map_err(|e| e.to_string())
}

fn parse_triple(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [n, p, q] = parts.as_slice() else {
        return Err(format!("expected n,p,q, got '{s}'"));
    };
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("'{x}': {e}"));
    Ok((num(n)?, num(p)?, num(q)?))
}
