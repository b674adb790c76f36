mod config;
mod error;
mod output;
mod scenarios;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, Parser};

use config::{Command, Params};
use error::CliError;
use output::Format;
use scenarios::Fault;

const DEFAULT_SEED: u64 = 20_251_016;

/// Quantum-ensemble scenario runner.
#[derive(Debug, Parser)]
#[command(name = "qensemble", version)]
struct Cli {
    /// Scenario to run, or `selftest`.
    #[arg(value_enum)]
    command: Command,
    /// Flat key=value parameter file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Parameter override, applied after the config file.
    #[arg(long = "set", value_name = "K=V", value_parser = parse_set)]
    set: Vec<(String, String)>,
    /// Output file; the table goes to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format; inferred from the --out extension, csv otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for stochastic outputs.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

fn parse_set(s: &str) -> Result<(String, String), String> {
    config::split_pair(s)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("QENSEMBLE_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("QENSEMBLE_THREADS: `{text}` is not a whole number")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(format!("QENSEMBLE_THREADS: {e}")))
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn resolve_format(cli: &Cli) -> Format {
    cli.format.unwrap_or_else(|| match cli.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    configure_threads()?;
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    if cli.command == Command::Selftest {
        if cli.config.is_some() || !cli.set.is_empty() {
            return Err(CliError::Invalid("selftest takes no parameters".into()));
        }
        let report = selftest::run(seed, cli.inject_fault);
        let text = report.render(seed);
        print!("{text}");
        if let Some(path) = &cli.out {
            write_out(path, &text)?;
        }
        return Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(2) });
    }

    let file = match &cli.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            config::parse_file(&text)?
        }
        None => Vec::new(),
    };
    let params = Params::resolve(cli.command, &file, &cli.set)?;
    let start = Instant::now();
    let (table, mut report) = scenarios::run(cli.command, &params, seed, cli.inject_fault)?;
    report.wall_time = start.elapsed();

    let body = match resolve_format(&cli) {
        Format::Csv => output::to_csv(&table)?,
        Format::Json => output::to_json(&table, &report)?,
    };
    match &cli.out {
        Some(path) => {
            write_out(path, &body)?;
            print!("{}", report.render(table.rows.len()));
        }
        None => {
            print!("{body}");
            eprint!("{}", report.render(table.rows.len()));
        }
    }
    if report.all_pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprint!("{}", report.diff());
        Ok(ExitCode::from(2))
    }
}

fn main() -> ExitCode {
    if std::env::args_os().len() <= 1 {
        eprintln!("{}", Cli::command().render_help());
        return ExitCode::from(1);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
