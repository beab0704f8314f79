use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use corridor_cli::{check_design, load_config, run_file, sweep, CliError, RunOptions, DEFAULT_SEPARATION_TOLERANCE};

#[derive(Parser)]
#[command(name = "corridor", version, about = "Loiter-lane reinsertion planner and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write trajectories, events and metrics.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 1 if separation drops below d_safe minus the tolerance.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value_t = DEFAULT_SEPARATION_TOLERANCE)]
        separation_tolerance: f64,
        /// Also write SVG figures.
        #[arg(long)]
        plots: bool,
        /// Print the corridor design numbers first.
        #[arg(long)]
        check_design: bool,
    },
    /// Print R_L, d_L and the patch bounds.
    CheckDesign { config: PathBuf },
    /// Run every config matching a glob pattern.
    Sweep {
        pattern: String,
        /// Root for per-config output directories.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value_t = DEFAULT_SEPARATION_TOLERANCE)]
        separation_tolerance: f64,
        #[arg(long)]
        plots: bool,
    },
}

fn print_metrics(m: &corridor_cli::Metrics) {
    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
    println!(
        "outcome {}  t_out {}  v_out {}  merge {}  min_sep {}",
        m.outcome,
        opt(m.t_out),
        opt(m.v_out),
        opt(m.merge_time),
        opt(m.min_separation)
    );
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, strict, separation_tolerance, plots, check_design: design } => {
            if design {
                println!("{}", check_design(&load_config(&config)?)?);
            }
            let opts = RunOptions { out_dir: out, strict, separation_tolerance, plots };
            let (dir, metrics) = run_file(&config, &opts)?;
            print_metrics(&metrics);
            println!("wrote {}", dir.display());
        }
        Command::CheckDesign { config } => {
            println!("{}", check_design(&load_config(&config)?)?);
        }
        Command::Sweep { pattern, out, strict, separation_tolerance, plots } => {
            let opts = RunOptions { out_dir: None, strict, separation_tolerance, plots };
            let results = sweep(&pattern, out.as_deref(), &opts)?;
            let mut worst: Option<CliError> = None;
            for (path, r) in results {
                match r {
                    Ok((dir, m)) => {
                        print!("{}: ", path.display());
                        print_metrics(&m);
                        println!("  -> {}", dir.display());
                    }
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                            worst = Some(e);
                        }
                    }
                }
            }
            if let Some(e) = worst {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
