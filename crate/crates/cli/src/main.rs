use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use creditworks_cli::Command;

#[derive(Parser)]
#[command(
    name = "creditworks",
    version,
    about = "Loan default models, expected loss and CDS pricing"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Pipeline config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Model file to write (train) or read (evaluate, score, price).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(64);
        }
    };
    match creditworks_cli::run(cli.command, &cli.config, cli.model, cli.out) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("creditworks: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
