use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use habitat_core::run::{run, Command, RunConfig};
use habitat_core::Error;

/// Optimal habitat design: limit problem, single solves and δ sweeps.
#[derive(Debug, Parser)]
#[command(name = "habitat", version)]
struct Args {
    /// Command to run; defaults to the configuration's `command`.
    #[arg(value_enum)]
    command: Option<Cmd>,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Cmd {
    Limit,
    Solve,
    Sweep,
}

fn fail(e: &Error) -> ExitCode {
    let line = serde_json::json!({ "error": e.code(), "message": e.to_string() });
    eprintln!("{line}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Error::Config(e.to_string().lines().next().unwrap_or("bad arguments").into())),
    };
    if args.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build_global() {
            return fail(&Error::Config(e.to_string()));
        }
    }
    let outcome = RunConfig::load(&args.config).and_then(|mut c| {
        if let Some(cmd) = args.command {
            c.command = match cmd {
                Cmd::Limit => Command::Limit,
                Cmd::Solve => Command::Solve,
                Cmd::Sweep => Command::Sweep,
            };
        }
        run(&c, args.output.as_deref(), args.overwrite)
    });
    match outcome {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
