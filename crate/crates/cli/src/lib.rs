//! Configuration, command dispatch and artifact export for `tilepress`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use serde_json::Value;

pub use commands::{Context, Options};
pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Describe,
    Entropy,
    Pressure,
    Gibbs,
    Rate,
    Deviation,
    Verify,
    Tiles,
}

/// Result of one command: the JSON summary and the files written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

/// Runs `command` on a loaded config. Verification failures are reported as
/// [`CliError::Verification`] after the report has been written.
pub fn run(cfg: RunConfig, command: Command, opts: &Options, with_rate: bool) -> Result<Outcome, CliError> {
    let ctx = Context::new(cfg, opts)?;
    let mut sink = output::Sink::new(&ctx.cfg.output, opts.out.as_deref())?;
    let summary = match command {
        Command::Describe => commands::describe(&ctx, &mut sink)?,
        Command::Entropy => commands::entropy_cmd(&ctx, &mut sink)?,
        Command::Pressure => commands::pressure(&ctx, &mut sink)?,
        Command::Gibbs => commands::gibbs(&ctx, &mut sink)?,
        Command::Rate => commands::rate(&ctx, &mut sink)?,
        Command::Deviation => commands::deviation(&ctx, &mut sink)?,
        Command::Tiles => commands::tiles(&ctx, &mut sink)?,
        Command::Verify => {
            let report = verify::verify(&ctx, with_rate, &mut sink)?;
            for c in &report.checks {
                eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if report.failed > 0 {
                return Err(CliError::Verification { failed: report.failed });
            }
            serde_json::to_value(&report).expect("serializable")
        }
    };
    Ok(Outcome { summary, files: sink.written().to_vec() })
}
