use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tilepress::{run, Command, Options, RunConfig};

/// Thermodynamic formalism for subsystems of checkerboard pillow maps.
#[derive(Debug, Parser)]
#[command(name = "tilepress", version)]
struct Args {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; outputs do not depend on this.
    #[arg(long, env = "TILEPRESS_THREADS")]
    threads: Option<usize>,
    /// Level override for level-dependent commands.
    #[arg(long)]
    n_max: Option<u32>,
    /// Adds a face-dependent jump to the potential (negative control).
    #[arg(long)]
    inject_discontinuity: Option<f64>,
    /// Include the rate-function checks in `verify`.
    #[arg(long)]
    with_rate: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = RunConfig::load(&args.config).and_then(|cfg| {
        let opts = Options { out: args.out.clone(), n_max: args.n_max, inject_discontinuity: args.inject_discontinuity };
        run(cfg, args.command, &opts, args.with_rate)
    });
    match result {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.summary).expect("serializable");
            // A closed pipe on stdout is not an error of the run.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
