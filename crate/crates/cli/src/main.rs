use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use cxhermite_cli::{run, Cli, RunConfig};

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(2);
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(cfg) => cfg,
        Err(e) => return usage_error(e),
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return usage_error(e),
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.text),
        None => std::io::stdout().lock().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(outcome.status as u8)
}
