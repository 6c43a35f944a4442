//! Command-line driver: TOML config in, CSV files and `summary.txt` out.

mod commands;
mod config;

use std::path::{Path, PathBuf};

use clap::Parser;

pub use commands::{dispatch, Outcome};
pub use config::{RunConfig, COMMANDS};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "koiter-wrinkle", about = "Homogenized moderately wrinkled Koiter shells")]
pub struct Args {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// One of the subcommands or `all`; overrides `command` in the config.
    #[arg(long)]
    pub command: Option<String>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn write_all(dir: &Path, files: &[(String, String)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, content) in files {
        std::fs::write(dir.join(name), content)?;
    }
    Ok(())
}

/// Runs the driver and returns the process exit code.
pub fn run(args: Args) -> i32 {
    let cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let command = args.command.or_else(|| cfg.command.clone()).unwrap_or_else(|| "all".to_string());
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let out = args.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = cfg.validate(&command) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    match dispatch(&command, &cfg, seed) {
        Ok(outcome) => {
            let mut files = outcome.files.clone();
            files.push(("summary.txt".to_string(), outcome.summary_text(&command, seed)));
            if let Err(e) = write_all(&out, &files) {
                eprintln!("error: cannot write {}: {e}", out.display());
                return EXIT_NUMERICAL;
            }
            if outcome.pass() {
                EXIT_OK
            } else {
                for (k, p) in &outcome.flags {
                    if !p {
                        eprintln!("check failed: {k}");
                    }
                }
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => numerical_failure(&out, &command, seed, &e),
    }
}

fn numerical_failure(out: &Path, command: &str, seed: u64, e: &Error) -> i32 {
    if matches!(e, Error::InvalidConfig(_) | Error::InvalidArgument(_)) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    eprintln!("numerical failure in {}: {e}", e.module());
    let log = format!("command={command}\nseed={seed}\nmodule={}\nerror={e}\n", e.module());
    if let Err(w) = write_all(out, &[("diagnostic.log".to_string(), log)]) {
        eprintln!("error: cannot write diagnostic.log: {w}");
    }
    EXIT_NUMERICAL
}
