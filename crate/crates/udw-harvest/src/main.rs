//! `udwh` — negativity of a pair of switched detectors coupled to the
//! vacuum, in flat spacetime or near a weakly gravitating star.
//!
//! Exit codes: 0 success, 1 configuration/validation error, 2 numerical
//! non-convergence, 3 selfcheck failure.

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use udw_harvest::cli::{parse_config, run, Mode};
use udw_harvest::Error;

#[derive(Parser)]
#[command(
    name = "udwh",
    version,
    about = "Vacuum entanglement extracted by two static detectors, flat or near a star",
    after_help = "CONFIG is a `key = value` file (`#` comments). See the project README \
                  for the key reference and the CSV column schema."
)]
struct Args {
    /// Run configuration file.
    config: PathBuf,

    /// Override the mode from the config file (flat|curved|sweep|selfcheck).
    #[arg(long)]
    mode: Option<String>,

    /// Override the output path from the config file; `-` forces stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Map argument errors to the validation exit code (clap's own default
    // would collide with the non-convergence code). Help/version requests
    // still exit 0.
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Convergence { .. } | Error::NonFiniteIntegrand { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn execute(args: &Args) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = parse_config(&text)?;
    if let Some(mode) = &args.mode {
        cfg.mode = mode.parse()?;
    }
    if let Some(out) = &args.out {
        cfg.out = if out.as_os_str() == "-" {
            None
        } else {
            Some(out.clone())
        };
    }

    let outcome = run(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.report)?,
        None => print!("{}", outcome.report),
    }

    if cfg.mode == Mode::SelfCheck && !outcome.checks_passed {
        return Ok(ExitCode::from(3));
    }
    if !outcome.rows_converged {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
