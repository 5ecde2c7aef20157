//! tpiet: load a spatio-temporal workspace, run TPiet-QL queries against it,
//! apply discrete-change operations, and validate cross-store consistency.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tpiet_cli::{config, diagnostic, opspec, render, repl, Format};

#[derive(Parser)]
#[command(name = "tpiet", version, about = "valid-time GIS/OLAP query engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a workspace and print a summary.
    Load { config: Option<PathBuf> },
    /// Run one query and print the result.
    Query {
        config: Option<PathBuf>,
        /// The query text.
        #[arg(short = 'e', long = "execute")]
        query: String,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Interactive query loop.
    Repl { config: Option<PathBuf> },
    /// Apply an update operation and rewrite the workspace files.
    Op {
        config: PathBuf,
        /// create | split | merge | update | delete | reincarnate, then its
        /// arguments; the README documents the grammar.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, required = true)]
        spec: Vec<String>,
    },
    /// Check every store invariant and the alpha mapping.
    Validate { config: Option<PathBuf> },
}

fn config_path(arg: Option<PathBuf>) -> Result<PathBuf, String> {
    arg.or_else(|| std::env::var_os("TPIET_WORKSPACE").map(PathBuf::from))
        .ok_or_else(|| "no workspace config given (argument or TPIET_WORKSPACE)".to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Load { config } => {
            let path = config_path(config)?;
            let (_, ws) = config::load_workspace(&path).map_err(|e| e.to_string())?;
            print!("{}", config::summary(&ws));
            println!("workspace ok");
            Ok(ExitCode::SUCCESS)
        }
        Command::Query {
            config,
            query,
            format,
        } => {
            let path = config_path(config)?;
            let (_, ws) = config::load_workspace(&path).map_err(|e| e.to_string())?;
            match ws.run_query(&query) {
                Ok(rel) => {
                    print!("{}", render(&rel, format));
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprint!("{}", diagnostic(&query, &e));
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Repl { config } => {
            let path = config_path(config)?;
            let (_, mut ws) = config::load_workspace(&path).map_err(|e| e.to_string())?;
            Ok(ExitCode::from(repl::run(&mut ws) as u8))
        }
        Command::Op { config, spec } => {
            let (ws_spec, mut ws) = config::load_workspace(&config).map_err(|e| e.to_string())?;
            let op = match opspec::parse_op(&spec, &ws.time) {
                Ok(op) => op,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return Ok(ExitCode::from(1));
                }
            };
            match ws.apply(op) {
                Ok(outcome) => {
                    println!("{}", outcome.event);
                    for w in &outcome.warnings {
                        eprintln!("warning: {w}");
                    }
                    for n in &outcome.propagation_notes {
                        println!("  {n}");
                    }
                    config::save_workspace(&ws_spec, &ws).map_err(|e| e.to_string())?;
                    println!("workspace saved");
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Validate { config } => {
            let path = config_path(config)?;
            let (_, ws) = config::load_workspace(&path).map_err(|e| e.to_string())?;
            let problems = ws.check_consistency();
            if problems.is_empty() {
                println!("workspace is consistent");
                Ok(ExitCode::SUCCESS)
            } else {
                for p in &problems {
                    eprintln!("problem: {p}");
                }
                Err(format!("{} consistency problem(s)", problems.len()))
            }
        }
    }
}
