use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use erasure_squeeze::cli::{execute, keys_help, parse_config};
use erasure_squeeze::{Error, Result};

#[derive(Parser)]
#[command(
    name = "erasure-squeeze",
    version,
    about = "Spin squeezing with multi-pass light, light-spin erasure and two-axis twisting",
    after_help = keys_help()
)]
struct Args {
    /// Configuration file with `key = value` lines.
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Overrides as KEY=VALUE; a bare word is taken as the command.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main_inner(args: Args) -> Result<()> {
    let text = args
        .config
        .as_ref()
        .map(|p| std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display()))))
        .transpose()?;
    let overrides: Vec<String> = args
        .overrides
        .into_iter()
        .map(|o| if o.contains('=') { o } else { format!("command={o}") })
        .collect();
    let cfg = parse_config(text.as_deref(), &overrides)?;
    let bytes = execute(&cfg)?;
    if cfg.output.is_none() {
        std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
