use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use truthscore_cli::config::parse_param;
use truthscore_cli::{run_and_report, Command, Format, RunConfig};

/// Truthful scoring-rule auctions: run mechanisms and check their incentives.
///
/// Exit codes: 0 ok, 1 I/O or usage failure, 2 instance parse error,
/// 3 validation error, 4 IC violated under a verified convex welfare,
/// 5 outcome or grid guard exceeded.
#[derive(Debug, Parser)]
#[command(name = "truthscore", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Instance file (JSON with a top-level "kind").
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    /// Catalog welfare function: linear, square, threshold, concave_demo.
    #[arg(long, global = true)]
    welfare: Option<String>,
    /// Welfare parameter as key=value; repeatable.
    #[arg(long = "param", global = true)]
    params: Vec<String>,
    /// Seed for realization draws and instance sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid resolution for deviation scans.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Number of sampled instances for verify-ic without --instance.
    #[arg(long, global = true)]
    count: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Fmt::Json)]
    format: Fmt,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run the single-slot auction.
    RunSingle,
    /// Run the general mechanism on a general, network or principal-agent instance.
    RunGeneral,
    /// Scan misreports for every bidder.
    VerifyIc,
    /// The threshold welfare's value blind spot.
    DemoThreshold,
    /// Profitable misreports under non-convex welfare.
    DemoNegative,
    /// Expand a network spec into a general instance file.
    BuildNetwork,
    /// Expand a principal-agent spec into a general instance file.
    BuildPrincipalAgent,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fmt {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::RunSingle => Command::RunSingle,
        Cmd::RunGeneral => Command::RunGeneral,
        Cmd::VerifyIc => Command::VerifyIc,
        Cmd::DemoThreshold => Command::DemoThreshold,
        Cmd::DemoNegative => Command::DemoNegative,
        Cmd::BuildNetwork => Command::BuildNetwork,
        Cmd::BuildPrincipalAgent => Command::BuildPrincipalAgent,
    };
    let mut config = RunConfig::new(command);
    config.instance_path = cli.instance;
    config.welfare = cli.welfare;
    config.seed = cli.seed;
    config.grid = cli.grid;
    config.count = cli.count;
    config.output_path = cli.out;
    config.format = match cli.format {
        Fmt::Json => Format::Json,
        Fmt::Csv => Format::Csv,
    };
    for raw in &cli.params {
        match parse_param(raw) {
            Ok((k, v)) => {
                config.params.insert(k, v);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        }
    }
    ExitCode::from(run_and_report(&config) as u8)
}
