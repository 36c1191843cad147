use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use psmt_cli::audit::{audit_exit_code, format_audit, run_audit, AuditSpec, DEFAULT_BUDGET};
use psmt_cli::bench::{bench_csv, run_bench, BenchSpec, LRule};
use psmt_cli::run::run_experiment;
use psmt_cli::{CliError, ExperimentSpec, ProtocolKind};

#[derive(Parser)]
#[command(name = "psmt", version, about = "Two-round perfectly secure message transmission experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials and report communication costs.
    Run(RunArgs),
    /// Exhaustively compare Eve's view distributions across secrets.
    Audit(AuditArgs),
    /// Measure the improved protocol's rate over a sweep of n and l.
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = ProtocolKind::Improved)]
    protocol: ProtocolKind,
    #[arg(long)]
    n: usize,
    /// Defaults to (n-1)/2.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 1)]
    l: usize,
    /// Field order; defaults to the smallest prime above n (2 for rank).
    #[arg(long)]
    q: Option<u64>,
    /// Extension degree, rank protocol only; defaults to n+1.
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, default_value = "passive")]
    adversary: String,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for summary.csv and phases.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Transcript log path (JSON lines).
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long, value_enum, default_value_t = ProtocolKind::Basic)]
    protocol: ProtocolKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    m: Option<u32>,
    /// Defaults to every built-in adversary.
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of protocol runs.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 7, 11, 23])]
    n: Vec<usize>,
    /// Secrets per run: integers, n, n^2 or nlogn.
    #[arg(long, value_delimiter = ',', default_value = "n^2")]
    l: Vec<LRule>,
    #[arg(long, default_value = "targeted-syndrome")]
    adversary: String,
    #[arg(long, default_value_t = 5)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: RunArgs) -> Result<u8, CliError> {
    let spec = ExperimentSpec {
        protocol: args.protocol,
        n: args.n,
        t: args.t,
        l: args.l,
        q: args.q,
        m: args.m,
        adversary: args.adversary,
        trials: args.trials,
        seed: args.seed,
    }
    .validate()?;
    info!("running {} trials of the {} protocol", spec.trials, spec.protocol);
    let report = run_experiment(&spec, args.transcript.is_some());
    let summary = report.summary_csv()?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("summary.csv"), &summary)?;
        std::fs::write(dir.join("phases.csv"), report.phases_csv()?)?;
    }
    if let Some(path) = &args.transcript {
        std::fs::write(path, report.transcript_log())?;
    }
    print!("{summary}");
    Ok(if report.all_succeeded() { 0 } else { 1 })
}

fn audit(args: AuditArgs) -> Result<u8, CliError> {
    let spec = AuditSpec {
        protocol: args.protocol,
        n: args.n,
        t: args.t,
        q: args.q,
        m: args.m,
        adversary: args.adversary,
        seed: args.seed,
        budget: args.budget,
    };
    let outcomes = run_audit(&spec)?;
    print!("{}", format_audit(&spec, &outcomes));
    Ok(audit_exit_code(&outcomes))
}

fn bench(args: BenchArgs) -> Result<u8, CliError> {
    let rows = run_bench(&BenchSpec {
        ns: args.n,
        ls: args.l,
        adversary: args.adversary,
        trials: args.trials,
        seed: args.seed,
    })?;
    let csv = bench_csv(&rows)?;
    match &args.out {
        Some(path) => std::fs::write(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(if rows.iter().all(|r| r.successes == r.trials) { 0 } else { 1 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("PSMT_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Audit(a) => audit(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
