use std::path::PathBuf;
use std::process::ExitCode;

use cdident_cli::run::{PLOT_FILE, RATE_FILE, TRACE_FILE};
use cdident_cli::{cmd_analyze, cmd_fetch, cmd_fit, cmd_plot, CliError, ExperimentConfig, Overrides};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cdident", version, about = "Cyclic proximal coordinate descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve, and write the trace CSV and reference solution
    Fit(Overrides),
    /// Solve and write the identification / rate report
    Analyze(Overrides),
    /// Draw the convergence plot from existing artifacts
    Plot {
        /// Directory holding trace.csv and rate.json
        #[arg(long)]
        out: Option<PathBuf>,
        /// Read the output directory from a config file
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        rate: Option<PathBuf>,
    },
    /// Download a registry dataset into the cache and print its path
    Fetch { name: String },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(o) => {
            let art = cmd_fit(&ExperimentConfig::load(&o)?)?;
            println!("{}", art.trace_csv.display());
            if let Some(p) = art.plot_svg {
                println!("{}", p.display());
            }
        }
        Command::Analyze(o) => {
            let (summary, art) = cmd_analyze(&ExperimentConfig::load(&o)?)?;
            if let Some(p) = &art.rate_json {
                println!("{}", p.display());
            }
            if let Some(p) = &art.plot_svg {
                println!("{}", p.display());
            }
            for note in &summary.notes {
                eprintln!("note: {note}");
            }
        }
        Command::Plot { out, config, trace, rate } => {
            let dir = match (out, config) {
                (Some(dir), _) => dir,
                (None, Some(path)) => ExperimentConfig::from_file(&path)?.outputs(),
                (None, None) => ExperimentConfig::default().outputs(),
            };
            let trace = trace.unwrap_or_else(|| dir.join(TRACE_FILE));
            let rate = rate.unwrap_or_else(|| dir.join(RATE_FILE));
            println!("{}", cmd_plot(&trace, &rate, &dir.join(PLOT_FILE))?.display());
        }
        Command::Fetch { name } => println!("{}", cmd_fetch(&name)?.display()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.status.code() as u8)
        }
    }
}
