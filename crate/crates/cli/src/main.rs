mod args;
mod commands;
mod config;
mod manifest;

use args::{Cli, Command};
use clap::Parser;
use commands::Outcome;
use fastdiff::io::write_atomic;
use fastdiff::Error;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Parameter and input problems are usage errors; everything a solver or a
/// fit can run into is a numerical failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::QOutOfRange { .. }
        | Error::LambdaOutOfRange { .. }
        | Error::BadGridSpec(_)
        | Error::GridMismatch
        | Error::GammaDomain(_)
        | Error::MassMismatch { .. }
        | Error::MassNotZero(_)
        | Error::WrongVariant(_)
        | Error::MissingKernel
        | Error::InvalidProfile(_)
        | Error::ZeroProfile
        | Error::Parse(_)
        | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn execute(cmd: &Command) -> fastdiff::Result<Outcome> {
    match cmd {
        Command::Stationary(a) => commands::stationary(a),
        Command::Evolve(a) => commands::evolve(a),
        Command::Hp(a) => commands::hp(a),
        Command::Rhls(a) => commands::rhls(a),
        Command::Positivity(a) => commands::positivity(a),
        Command::Rates(a) => commands::rates(a),
    }
}

fn publish(cmd: &Command, outcome: &Outcome, wall_clock: f64) -> fastdiff::Result<()> {
    let dir = &cmd.common().out;
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in &outcome.artifacts {
        write_atomic(&dir.join(name), bytes)?;
    }
    let m = manifest::render(cmd.name(), &outcome.params, &outcome.artifacts, wall_clock);
    write_atomic(&dir.join(format!("{}.manifest", cmd.name())), m.as_bytes())
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = Cli::parse_from(argv);
    let cmd = &cli.command;
    let t0 = Instant::now();
    let outcome = match execute(cmd) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let wall_clock = t0.elapsed().as_secs_f64();
    for (k, v) in &outcome.summary {
        println!("{k}={v}");
    }
    let common = cmd.common();
    if common.check {
        let path = common.out.join(format!("{}.manifest", cmd.name()));
        let recorded = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
        };
        let problems = manifest::check(&recorded, &common.out, &outcome.artifacts);
        if !problems.is_empty() {
            for p in problems {
                eprintln!("check failed: {p}");
            }
            return ExitCode::from(EXIT_NUMERICAL);
        }
        println!("check=ok");
        return ExitCode::SUCCESS;
    }
    if let Err(e) = publish(cmd, &outcome, wall_clock) {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    println!("wall_clock_seconds={wall_clock:.3}");
    ExitCode::SUCCESS
}
