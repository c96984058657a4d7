use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fedsmell_core::experiments::{emit_outputs, parse_config, run_experiment, ExperimentKind};
use fedsmell_core::Error;
use log::info;

#[derive(Parser)]
#[command(
    name = "fedsmell",
    version,
    about = "Federated God-Class detection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model per dataset and report held-out accuracy.
    Centralized(RunArgs),
    /// Train on each of three datasets and evaluate on the other two.
    CrossEval(RunArgs),
    /// Run the reducer/combiner/client federation.
    Federated(RunArgs),
    /// Write the configured synthetic datasets as CSV files.
    Synth(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file, or a previously written config.resolved.json.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Train the clients of a round in parallel.
    #[arg(long)]
    parallel: bool,
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<(), Error> {
    let mut cfg = parse_config(&args.config)?;
    cfg.experiment = kind;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    if args.parallel {
        cfg.federation.parallel = true;
    }
    cfg.validate()?;

    let started = Instant::now();
    let result = run_experiment(&cfg)?;
    let elapsed = started.elapsed().as_secs_f64();
    let written = emit_outputs(&cfg.output_dir, &cfg, &result, elapsed)?;

    for row in &result.table.rows {
        println!(
            "{:>24} -> {:<24} {:>7.2}%",
            row.train_source, row.eval_source, row.accuracy_pct
        );
    }
    if let Some(report) = &result.final_report {
        println!(
            "final: accuracy {:.2}% kappa {:.3} ({}) roc_auc {:.3} ({})",
            report.accuracy_pct, report.kappa, report.kappa_band, report.roc_auc, report.roc_band
        );
    }
    for path in written {
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Centralized(a) => (ExperimentKind::Centralized, a),
        Command::CrossEval(a) => (ExperimentKind::CrossEval, a),
        Command::Federated(a) => (ExperimentKind::Federated, a),
        Command::Synth(a) => (ExperimentKind::Synth, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", kind.tag());
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}
