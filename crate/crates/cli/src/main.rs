use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pem_cli::commands::{self, parse_values, Axis};
use pem_cli::{CliError, Experiment};

#[derive(Parser)]
#[command(name = "pem", version, about = "Online blind source separation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment and write results and summary CSVs.
    Run {
        spec: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Repeat an experiment over a list of values on one axis.
    Sweep {
        spec: PathBuf,
        /// rho, snr_in_db or m
        #[arg(long)]
        axis: String,
        /// Comma-separated values; `null` means noiseless on the snr_in_db axis.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Record remainder, bounds and descent certificates along the run.
    Diagnose {
        spec: PathBuf,
        /// Override the copula correlation of the spec.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// List the shipped hyperparameter presets.
    Presets,
    /// Write the generated sources, mixing matrix and mixtures to a binary file.
    DumpData {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed to generate (defaults to the first seed of the spec).
        #[arg(long)]
        seed: Option<u64>,
        /// Draw the mixing matrix with this many rows and keep the first m.
        #[arg(long)]
        master_m: Option<usize>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { spec, out_dir } => {
            let out = commands::run(&Experiment::load(&spec)?, &out_dir)?;
            println!("{}", out.results.display());
            println!("{}", out.summary.display());
            for d in out.diag {
                println!("{}", d.display());
            }
        }
        Command::Sweep {
            spec,
            axis,
            values,
            out_dir,
        } => {
            let exp = Experiment::load(&spec)?;
            let axis: Axis = axis.parse()?;
            let values = parse_values(axis, &values)?;
            let out = commands::sweep(&exp, axis, &values, &out_dir)?;
            println!("{}", out.results.display());
            println!("{}", out.summary.display());
        }
        Command::Diagnose { spec, rho, out_dir } => {
            let path = commands::diagnose(&Experiment::load(&spec)?, rho, &out_dir)?;
            println!("{}", path.display());
        }
        Command::Presets => print!("{}", commands::presets()),
        Command::DumpData {
            spec,
            out,
            seed,
            master_m,
        } => {
            commands::dump_data(&Experiment::load(&spec)?, &out, seed, master_m)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
