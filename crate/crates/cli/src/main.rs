//! helmres2d: batch solver for the two subwavelength resonances of a pair
//! of closely spaced high-contrast inclusions in 2D.
//!
//! Usage:
//!   helmres2d <resonance|sweep|profile|validate> --config <path>
//!             [--jobs J] [--out DIR]
//!
//! Exit codes: 0 ok, 1 config error, 2 solver failure, 3 validation failure.

mod commands;
mod config;
mod svg;
mod table;

use commands::CmdError;
use std::path::PathBuf;
use std::process::ExitCode;

struct Args {
    command: String,
    config: PathBuf,
    jobs: Option<usize>,
    out: Option<String>,
}

fn parse_args() -> Result<Args, String> {
    let mut argv = std::env::args().skip(1);
    let command = argv.next().ok_or_else(usage)?;
    if command == "--help" || command == "-h" || command == "help" {
        return Err(usage());
    }
    if !matches!(command.as_str(), "resonance" | "sweep" | "profile" | "validate") {
        return Err(format!("unknown command \"{command}\"\n{}", usage()));
    }
    let mut config = None;
    let mut jobs = None;
    let mut out = None;
    while let Some(flag) = argv.next() {
        match flag.as_str() {
            "--config" => {
                config = Some(PathBuf::from(
                    argv.next().ok_or("--config requires a path")?,
                ))
            }
            "--jobs" => {
                let j: usize = argv
                    .next()
                    .ok_or("--jobs requires a count")?
                    .parse()
                    .map_err(|e| format!("--jobs: {e}"))?;
                jobs = Some(j)
            }
            "--out" => out = Some(argv.next().ok_or("--out requires a directory")?),
            other => return Err(format!("unknown flag \"{other}\"\n{}", usage())),
        }
    }
    let config = config.ok_or("--config <path> is required")?;
    Ok(Args { command, config, jobs, out })
}

fn usage() -> String {
    "usage: helmres2d <resonance|sweep|profile|validate> --config <path> [--jobs J] [--out DIR]"
        .to_string()
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(1);
        }
    };
    if let Some(j) = args.jobs {
        // sweep parallelism cap; ignored if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let resolved = match config::load(&args.config) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(1);
        }
    };
    println!(
        "delta = {:.6e}, tau = {:.6e}, v = {:.6e}, v_b = {:.6e}",
        resolved.medium.delta, resolved.medium.tau, resolved.medium.v, resolved.medium.v_b
    );
    let out = commands::out_dir(&resolved, args.out.as_deref());
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("cannot create output directory {}: {e}", out.display());
        return ExitCode::from(2);
    }
    let outcome = match args.command.as_str() {
        "resonance" => commands::cmd_resonance(&resolved, &out).map(|_| true),
        "sweep" => commands::cmd_sweep(&resolved, &out).map(|_| true),
        "profile" => commands::cmd_profile(&resolved, &out).map(|_| true),
        "validate" => commands::cmd_validate(&resolved, &out),
        _ => unreachable!(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::from(3)
        }
        Err(CmdError::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Io(msg)) => {
            eprintln!("output failure: {msg}");
            ExitCode::from(2)
        }
    }
}
