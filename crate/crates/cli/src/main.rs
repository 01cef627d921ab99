//! `polygc` command-line tool.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors, 1 for
//! anything else. Failures are reported on stderr as a JSON object
//! `{"error": {"kind": ..., "message": ..., "causes": [...]}}`.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use commands::{Cli, UsageError};

fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return ("validation", 2);
        }
        if let Some(e) = cause.downcast_ref::<polygc::Error>() {
            return if e.is_validation() { ("validation", 2) } else { ("internal", 1) };
        }
    }
    ("internal", 1)
}

fn report(kind: &str, err: &anyhow::Error) {
    let causes: Vec<String> = err.chain().skip(1).map(|c| c.to_string()).collect();
    let envelope = json!({
        "error": { "kind": kind, "message": err.to_string(), "causes": causes }
    });
    eprintln!("{envelope}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let envelope = json!({
                "error": { "kind": "usage", "message": e.kind().to_string(), "causes": [e.to_string()] }
            });
            eprintln!("{envelope}");
            return ExitCode::from(2);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, code) = classify(&err);
            report(kind, &err);
            ExitCode::from(code)
        }
    }
}
