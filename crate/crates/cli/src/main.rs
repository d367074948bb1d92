mod commands;
mod report;

use bitmm::{Algo, Builtin, Semiring};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "bmm", version, about = "Bit-matrix multiplication over GF(2) and the Boolean semiring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random matrix.
    Gen(GenArgs),
    /// Convert between BMM1 and text (`.txt`) files.
    Convert(ConvertArgs),
    /// Multiply two matrices from files.
    Multiply(MultiplyArgs),
    /// Check a builtin decomposition, or a product file against the oracle.
    Verify(VerifyArgs),
    /// Time one or more algorithms on random or given inputs.
    Bench(BenchArgs),
    /// Standalone basis change or 64x64 blockwise transpose.
    Transform(TransformArgs),
}

#[derive(Args, Debug, Clone)]
pub struct PlanArgs {
    #[arg(long)]
    pub d_host: Option<usize>,
    #[arg(long)]
    pub d_serial: Option<usize>,
    #[arg(long)]
    pub d_parallel: Option<usize>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "BMM_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(short = 'n', long)]
    pub n: usize,
    /// Columns, if different from rows.
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MultiplyArgs {
    #[arg(long, default_value = "cubic")]
    pub algo: Algo,
    #[arg(long, default_value = "gf2")]
    pub ring: Semiring,
    #[arg(long = "in", num_args = 2, value_names = ["A", "B"], required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Compare the product with the cubic algorithm.
    #[arg(long)]
    pub check: bool,
    /// Time permutation and basis changes too.
    #[arg(long)]
    pub include_transforms: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, conflicts_with_all = ["inputs", "product"])]
    pub decomposition: Option<Builtin>,
    /// Print the six matrices.
    #[arg(long, requires = "decomposition")]
    pub dump: bool,
    #[arg(long = "in", num_args = 2, value_names = ["A", "B"], requires = "product")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, requires = "inputs")]
    pub product: Option<PathBuf>,
    #[arg(long, default_value = "gf2")]
    pub ring: Semiring,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(short = 'n', long, required_unless_present = "inputs")]
    pub n: Option<usize>,
    #[arg(long = "in", num_args = 2, value_names = ["A", "B"], conflicts_with = "n")]
    pub inputs: Vec<PathBuf>,
    #[arg(long = "algo", required = true)]
    pub algos: Vec<Algo>,
    #[arg(long, default_value = "gf2")]
    pub ring: Semiring,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeats: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub plan: PlanArgs,
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub include_transforms: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OperandArg {
    Left,
    Right,
    Result,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(long, required_unless_present = "transpose64", conflicts_with = "transpose64")]
    pub basis: Option<Builtin>,
    #[arg(long, requires = "basis", conflicts_with = "inverse")]
    pub forward: bool,
    #[arg(long, requires = "basis")]
    pub inverse: bool,
    #[arg(long, value_enum, default_value = "left")]
    pub operand: OperandArg,
    #[arg(long)]
    pub transpose64: bool,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub out: PathBuf,
    #[arg(long, env = "BMM_WORKERS")]
    pub workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_ARGS } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Convert(a) => commands::convert(a),
        Command::Multiply(a) => commands::multiply(a),
        Command::Verify(a) => commands::verify(a),
        Command::Bench(a) => commands::bench(a),
        Command::Transform(a) => commands::transform(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bmm: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
