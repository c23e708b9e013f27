mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use commands::SolverFailure;
use config::{Cli, Command, ConfigError, GenerateKind};

/// Error category and exit code.
fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return ("config", 2);
        }
        if cause.is::<SolverFailure>() {
            return ("solver", 3);
        }
        if let Some(e) = cause.downcast_ref::<fairrec::Error>() {
            return match e {
                fairrec::Error::Lp(_) | fairrec::Error::NonConvergence { .. } => ("solver", 3),
                fairrec::Error::Io(_) => ("io", 4),
                _ => ("config", 2),
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return ("io", 4);
        }
    }
    ("solver", 3)
}

fn run(command: &Command) -> anyhow::Result<String> {
    let name = command.name();
    match command {
        Command::Generate(GenerateKind::TwoType(a)) => commands::generate_two_type(a, name),
        Command::Generate(GenerateKind::Homogeneous(a)) => commands::generate_homogeneous(a, name),
        Command::Generate(GenerateKind::Misest(a)) => commands::generate_misest(a, name),
        Command::Tradeoff(a) => commands::tradeoff(a, name),
        Command::Pof(a) => commands::pof(a, name),
        Command::Misest(a) => commands::misest(a, name),
        Command::ValidateClosedForm(a) => commands::validate_closed_form(a, name),
        Command::SweepAlpha(a) => commands::sweep_alpha(a, name),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(summary) => {
            println!("{}: {summary}", cli.command.name());
            ExitCode::SUCCESS
        }
        Err(err) => {
            let (kind, code) = classify(&err);
            eprintln!("error: {err:#}");
            output::write_error_record(cli.command.out_dir(), cli.command.name(), kind, code, &err);
            ExitCode::from(code)
        }
    }
}
