use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use netdyn_cli::experiment::ExperimentSpec;
use netdyn_cli::pipeline::{self, Overrides};

#[derive(Parser)]
#[command(
    name = "netdyn",
    about = "Simulate interacting particle systems on sparse graphs and solve the neighborhood law ODE",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Override the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker pool size (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for CSV/SVG files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Override the output grid step.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model document: transition graph, acyclicity, bounds.
    Check {
        /// Model TOML file.
        model: PathBuf,
    },
    /// Run Monte Carlo replicas and emit averaged observables.
    Simulate {
        /// Experiment TOML file.
        experiment: PathBuf,
        /// Also write one event-log CSV per replica.
        #[arg(long)]
        event_logs: bool,
    },
    /// Integrate the neighborhood law ODE.
    Solve {
        experiment: PathBuf,
        /// Also emit the mean-field baseline trajectory.
        #[arg(long)]
        mean_field: bool,
        /// Also emit a local-field ensemble trajectory.
        #[arg(long)]
        mlfe: bool,
    },
    /// Simulate and solve on a shared grid; emit TV(t) and an overlay plot.
    Compare {
        experiment: PathBuf,
        /// Include the mean-field baseline in the comparison.
        #[arg(long)]
        mean_field: bool,
    },
    /// Run the local-field ensemble alone.
    Mlfe { experiment: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        // Ignore the error if a pool already exists (e.g. under tests).
        let _ = netdyn::parallel::configure_threads(threads);
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let ov = Overrides {
        seed: cli.global.seed,
        grid_step: cli.global.grid_step,
        out_dir: cli.global.out_dir.clone(),
    };
    let load = |path: &PathBuf| -> Result<(ExperimentSpec, PathBuf)> {
        let spec = ExperimentSpec::load(path)?;
        let base = path.parent().unwrap_or(std::path::Path::new(".")).to_path_buf();
        Ok((spec, base))
    };
    let report = |written: Vec<PathBuf>| {
        for p in written {
            println!("wrote {}", p.display());
        }
        Ok(ExitCode::SUCCESS)
    };
    match &cli.command {
        Command::Check { model } => {
            let code = pipeline::run_check(model)?;
            Ok(if code == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Simulate {
            experiment,
            event_logs,
        } => {
            let (spec, base) = load(experiment)?;
            report(pipeline::run_simulate(&spec, &base, &ov, *event_logs)?)
        }
        Command::Solve {
            experiment,
            mean_field,
            mlfe,
        } => {
            let (spec, base) = load(experiment)?;
            report(pipeline::run_solve(&spec, &base, &ov, *mean_field, *mlfe)?)
        }
        Command::Compare {
            experiment,
            mean_field,
        } => {
            let (spec, base) = load(experiment)?;
            report(pipeline::run_compare(&spec, &base, &ov, *mean_field)?)
        }
        Command::Mlfe { experiment } => {
            let (spec, base) = load(experiment)?;
            report(pipeline::run_mlfe(&spec, &base, &ov)?)
        }
    }
}
