//! `wcfg`: counting, sampling and redundancy analytics for weighted
//! context-free grammars.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seed used when neither `--seed` nor `WCFG_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_090_517;

#[derive(Parser, Debug)]
#[command(
    name = "wcfg",
    version,
    about = "Weighted context-free grammars: counting, sampling, redundancy analytics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Weighted count Π_W(n)
    Count(CountArgs),
    /// Distinct word weights of L_n with multiplicities
    Spectrum(SpectrumArgs),
    /// Random words of length n
    Sample(SampleArgs),
    /// Urn-model predictions for L_n
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimate of one statistic
    Simulate(SimulateArgs),
    /// Singularity estimates, growth conditions and envelopes
    Asymptotics(AsymptoticsArgs),
    /// RNA secondary-structure model
    Rna(RnaArgs),
    /// Data behind the figures: 1 (p1 * Xi for weighted Motzkin) or 2 (RNA coverage)
    Figure(FigureArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Motzkin,
    Rna,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Args, Debug, Clone)]
#[group(id = "source", required = true, multiple = false, args = ["grammar", "builtin"])]
pub struct GrammarSource {
    /// Grammar file
    #[arg(long)]
    pub grammar: Option<PathBuf>,
    /// Built-in grammar
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Terminal weight override, e.g. `.=2` or `a=1/3` (repeatable)
    #[arg(long = "weight", value_name = "SYM=VALUE")]
    pub weights: Vec<String>,
    /// Significant digits kept for decimal weights
    #[arg(long, default_value_t = 30)]
    pub digits: u32,
    #[command(flatten)]
    pub rna: RnaParams,
}

#[derive(Args, Debug, Clone)]
pub struct RnaParams {
    /// Minimal plateau length (rna)
    #[arg(long, default_value_t = 3)]
    pub theta: usize,
    /// Base-pair free energy in kcal/mol (rna)
    #[arg(long, default_value = "-3", allow_hyphen_values = true)]
    pub energy: String,
    /// RT in kcal/mol (rna)
    #[arg(long, default_value = "0.6163")]
    pub rt: String,
    /// Use the printed sign convention w = exp(E/RT) instead of exp(-E/RT)
    #[arg(long)]
    pub literal: bool,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub source: GrammarSource,
    #[arg(long)]
    pub n: usize,
    /// `exact` or `floatBITS` with BITS at most 53
    #[arg(long, default_value = "exact")]
    pub precision: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: GrammarSource,
    #[arg(long)]
    pub n: usize,
    /// Largest number of weight classes
    #[arg(long, default_value_t = 1 << 20)]
    pub cap: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub source: GrammarSource,
    #[arg(long)]
    pub n: usize,
    /// Number of words
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Separator between letters (default: none for single-character terminals, else a space)
    #[arg(long)]
    pub sep: Option<String>,
    #[arg(long, env = "WCFG_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// `exact` or `floatBITS` with BITS at most 53
    #[arg(long, default_value = "exact")]
    pub precision: String,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: GrammarSource,
    #[arg(long)]
    pub n: usize,
    /// Number of draws for the distinct and coverage statistics
    #[arg(long, default_value_t = 1000)]
    pub k: u64,
    #[arg(long, default_value_t = 1 << 20)]
    pub cap: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StatisticName {
    FirstCollision,
    FullCollection,
    Distinct,
    Coverage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Level {
    /// Draw urns from the weight spectrum
    Urn,
    /// Draw words with the sampler
    Word,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: GrammarSource,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub statistic: StatisticName,
    /// Draws per trial for distinct and coverage
    #[arg(long, default_value_t = 1000)]
    pub k: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, env = "WCFG_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Level::Urn)]
    pub level: Level,
    #[arg(long, default_value_t = 1 << 20)]
    pub cap: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub source: GrammarSource,
    /// Coefficients used by the estimators
    #[arg(long, default_value_t = 512)]
    pub terms: usize,
    /// Length at which the envelopes are evaluated
    #[arg(long, default_value_t = 80)]
    pub n: usize,
    /// Largest length of the exact p_max ladder
    #[arg(long, default_value_t = 64)]
    pub probe: usize,
    /// With csv: emit the coefficient tail (n, coefficient)
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct RnaArgs {
    #[command(flatten)]
    pub params: RnaParams,
    #[arg(long, default_value_t = 80)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub k: u64,
    /// Length range `n1..n2` (inclusive); emits the sweep CSV
    #[arg(long)]
    pub sweep: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    /// Figure number
    #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
    pub figure: u8,
    /// Horizontal-step weight (figure 1)
    #[arg(long = "W", default_value = "2")]
    pub w: String,
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    /// Draws (figure 2)
    #[arg(long, default_value_t = 1000)]
    pub k: u64,
    /// RT in kcal/mol (figure 2)
    #[arg(long, default_value = "0.6163")]
    pub rt: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
