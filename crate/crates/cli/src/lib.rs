//! Command-line pipeline over the creditworks engine: explore, prepare,
//! train, evaluate, score and price.

pub mod commands;
pub mod config;
pub mod error;

use std::path::{Path, PathBuf};

pub use config::PipelineConfig;
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Explore,
    Prepare,
    Train,
    Evaluate,
    Score,
    Price,
}

/// Runs one command and returns the files it wrote.
pub fn run(
    command: Command,
    config: &Path,
    model: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<Vec<PathBuf>, CliError> {
    let cfg = PipelineConfig::load(config)?;
    let run = commands::Run::new(cfg, config, model, out);
    match command {
        Command::Explore => commands::explore(&run),
        Command::Prepare => commands::prepare(&run),
        Command::Train => commands::train(&run),
        Command::Evaluate => commands::evaluate(&run),
        Command::Score => commands::score(&run),
        Command::Price => commands::price(&run),
    }
}
