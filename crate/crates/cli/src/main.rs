use std::path::PathBuf;
use std::process::ExitCode;

use adaptid_cli::{
    estimate_gt_command, run_command, seed_from_env, spectrum_command, tables, RunOutcome,
    EXIT_ERROR, EXIT_OK,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "adaptid",
    version,
    about = "Adaptive FIR/IIR system identification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its report and learning curve.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the configurations behind Tables 1-4 and write table1.csv..table4.csv.
    ReproduceTables {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Autocorrelation, PSD and eigenvalue spread of a config's input signal.
    Spectrum {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gradient threshold from the plateau of a learning-curve CSV.
    EstimateGt {
        curve: PathBuf,
        #[arg(long)]
        delta: usize,
    },
}

fn print_json<S: serde::Serialize>(v: &S) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("summary serializes")
    );
}

fn execute(cli: Cli) -> adaptid::Result<i32> {
    let seed = seed_from_env()?;
    match cli.command {
        Command::Run { config, out } => {
            let outcome = run_command(&config, out.as_deref(), seed)?;
            match &outcome {
                RunOutcome::Converged { iteration, report } => {
                    println!(
                        "converged at iteration {iteration}; report {}",
                        report.display()
                    )
                }
                RunOutcome::NotConverged { report } => {
                    eprintln!("did not converge; report {}", report.display())
                }
                RunOutcome::Diverged { iteration } => match iteration {
                    Some(n) => eprintln!("diverged at iteration {n}"),
                    None => eprintln!("diverged"),
                },
            }
            Ok(outcome.exit_code())
        }
        Command::ReproduceTables { out, jobs } => {
            let master = seed.unwrap_or(tables::DEFAULT_MASTER_SEED);
            for path in tables::reproduce_tables(&out, jobs, master)? {
                println!("{}", path.display());
            }
            Ok(EXIT_OK)
        }
        Command::Spectrum { config, out } => {
            print_json(&spectrum_command(&config, out.as_deref(), seed)?);
            Ok(EXIT_OK)
        }
        Command::EstimateGt { curve, delta } => {
            print_json(&estimate_gt_command(&curve, delta)?);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Usage errors exit 1; exit 2 is reserved for non-convergence.
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
