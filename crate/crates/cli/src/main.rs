//! `cardnet`: every pipeline stage as a subcommand.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use crate::commands::{ClassifyTextArgs, FixtureArgs, IngestArgs, MatchArgs, StatsArgs};
use crate::config::{Overrides, PipelineConfig};

#[derive(Parser, Debug)]
#[command(name = "cardnet", version, about = "Card corpus, classifiers, generator and matcher")]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the effective config and progress (repeat for more detail).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate the corpus, or fetch it from a card-database mirror.
    Ingest(IngestArgs),
    /// Color and type distribution tables.
    Stats(StatsArgs),
    /// Expand labels, split by card, augment, and write batch files.
    BuildDataset,
    /// Train the image classifier(s) from batch files.
    TrainImage,
    /// Train the text classifier(s) from the corpus.
    TrainText,
    /// Train the character-level generator on the encoded corpus.
    TrainGenerator,
    /// Sample cards and tag them with both text classifiers.
    BuildBank,
    /// Prediction vectors for an image.
    ClassifyImage {
        #[arg(long)]
        image: PathBuf,
    },
    /// Prediction vectors for a text.
    ClassifyText(ClassifyTextArgs),
    /// Find the generated card closest to an image.
    Match(MatchArgs),
    /// Write a synthetic corpus, artwork and config for trying the pipeline.
    MakeFixtures(FixtureArgs),
}

fn run(cli: Cli) -> cardnet::Result<()> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cli.overrides.apply(&mut config);
    if cli.verbose > 0 {
        eprintln!("# effective config\n{}", config.to_toml());
    }
    match cli.command {
        Command::Ingest(args) => commands::ingest(&config, &args),
        Command::Stats(args) => commands::stats(&config, &args),
        Command::BuildDataset => commands::build_dataset(&config),
        Command::TrainImage => commands::train_image(&config),
        Command::TrainText => commands::train_text(&config),
        Command::TrainGenerator => commands::train_generator(&config),
        Command::BuildBank => commands::build_bank(&config),
        Command::ClassifyImage { image } => commands::classify_image(&config, &image),
        Command::ClassifyText(args) => commands::classify_text(&config, &args),
        Command::Match(args) => commands::match_image(&config, &args),
        Command::MakeFixtures(args) => commands::make_fixtures(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error: kind={} message={}", e.kind(), message);
            ExitCode::FAILURE
        }
    }
}
