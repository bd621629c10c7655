//! `smoothlab` — config-driven runner for the inequality-check catalog.
//!
//! Exit codes: 0 all verdicts pass, 1 at least one check failed or errored
//! (artifacts are still written), 2 configuration problems.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{load_config, OutputFormat};
use smoothlab_core::catalog::{
    run_catalog, summarize, write_check_artifacts, write_summary, CheckId,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "smoothlab", version, about = "quasi-norm and modulus experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the checks listed in a TOML or JSON config file.
    Run(RunArgs),
    /// List all known checks with a one-line description and the estimate.
    ListChecks {
        /// emit the table as a JSON array
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// config file (.toml or .json)
    config: PathBuf,
    /// seed override for the whole run
    #[arg(long)]
    seed: Option<u64>,
    /// output directory override
    #[arg(long)]
    out: Option<PathBuf>,
    /// worker threads (also honors SMOOTHLAB_JOBS)
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListChecks { json } => {
            list_checks(json);
            ExitCode::SUCCESS
        }
        Command::Run(args) => run(args),
    }
}

fn list_checks(json: bool) {
    if json {
        let rows: Vec<serde_json::Value> = CheckId::ALL
            .iter()
            .map(|c| {
                serde_json::json!({
                    "id": c.name(),
                    "description": c.description(),
                    "statement": c.statement(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&rows).expect("serializes"));
    } else {
        let width = CheckId::ALL.iter().map(|c| c.name().len()).max().unwrap_or(0);
        for c in CheckId::ALL {
            println!("{:width$}  {}", c.name(), c.description());
            println!("{:width$}  {}", "", c.statement());
        }
    }
}

fn resolve_jobs(cli_jobs: Option<usize>, cfg_jobs: Option<usize>) -> Option<usize> {
    cli_jobs
        .or_else(|| {
            std::env::var("SMOOTHLAB_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .or(cfg_jobs)
}

fn run(args: RunArgs) -> ExitCode {
    let cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let seed = args.seed.or(cfg.global.seed).unwrap_or(42);
    let out_dir = args
        .out
        .or_else(|| cfg.global.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("smoothlab-out"));
    if let Some(jobs) = resolve_jobs(args.jobs, cfg.global.jobs) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("error: cannot create output directory {}: {e}", out_dir.display());
        return ExitCode::from(2);
    }

    let results = run_catalog(&cfg.checks, seed);
    let mut io_failure = false;
    for (_, res) in &results {
        if let Ok(report) = res {
            if let Err(e) = write_check_artifacts(
                report,
                &out_dir,
                cfg.format.csv(),
                cfg.format.json(),
            ) {
                eprintln!("error writing artifacts for {}: {e}", report.check);
                io_failure = true;
            }
        }
    }
    let summary = summarize(&results, seed);
    if let Err(e) = write_summary(&summary, &out_dir) {
        eprintln!("error writing summary: {e}");
        io_failure = true;
    }
    for entry in &summary.checks {
        let status = if entry.pass { "PASS" } else { "FAIL" };
        match &entry.error {
            Some(err) => println!("{status} {} error: {err}", entry.check),
            None => println!(
                "{status} {} ({:.1}s) {}",
                entry.check, entry.runtime_secs, entry.criterion
            ),
        }
    }
    println!(
        "{} of {} checks passed; artifacts in {}",
        summary.checks.iter().filter(|c| c.pass).count(),
        summary.checks.len(),
        out_dir.display()
    );
    if io_failure {
        return ExitCode::from(2);
    }
    if summary.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

// keep the format enum referenced even when configs choose the default
#[allow(dead_code)]
fn _format_assert(f: OutputFormat) -> bool {
    f.csv() || f.json()
}
