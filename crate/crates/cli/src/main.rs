use std::path::PathBuf;
use std::process::ExitCode;

use anosov_lab::{emit_reports, run, CliError, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "anosov-lab",
    version,
    about = "Certify Anosov representations and estimate limit-set dimensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every pipeline step of a config and write reports.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn load(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation {
        field: "config".into(),
        msg: format!("{}: {e}", path.display()),
    })?;
    RunConfig::parse(&text)
}

fn main_inner(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Cmd::Validate { config } => {
            let cfg = load(&config)?;
            cfg.validate()?;
            print!("{}", cfg.emit());
            Ok(0)
        }
        Cmd::Run {
            config,
            out,
            threads,
            seed,
        } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Validation {
                        field: "threads".into(),
                        msg: e.to_string(),
                    })?;
            }
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let record = run(&cfg)?;
            let manifest = emit_reports(&record, &out)?;
            for step in &record.steps {
                let status = match &step.outcome {
                    anosov_lab::record::Outcome::Ok { .. } => "ok".to_string(),
                    anosov_lab::record::Outcome::Error { message, .. } => {
                        format!("error: {message}")
                    }
                };
                eprintln!(
                    "[{}] {} ({:.1}s): {status}",
                    step.index, step.command, step.elapsed_seconds
                );
            }
            eprintln!(
                "{} files written to {}",
                manifest.files.len() + 1,
                out.display()
            );
            Ok(record.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
