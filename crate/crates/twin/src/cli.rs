//! The `twin` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};

use crate::config::Config;
use crate::error::{Result, TwinError};
use crate::manifest::StageRecord;
use crate::pipeline::{Pipeline, Stage};

#[derive(Debug, Parser)]
#[command(
    name = "twin",
    version,
    about = "Build and evaluate digital twins of online communities"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true, env = "TWIN_CONFIG", default_value = "twin.toml")]
    pub config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Use mock providers only.
    #[arg(long, global = true)]
    pub offline: bool,
    /// Overrides a config value, e.g. `--set synth.balance=500`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// More log output (repeatable).
    #[arg(long, short, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean posts and drop reposts and replies.
    Ingest,
    /// Detect user clusters and split posts into community corpora.
    Communities,
    /// Keep each community's lowest-perplexity posts.
    Curate,
    /// Write instruction-tuning demonstrations.
    Demos,
    /// Generate and filter synthetic corpora.
    Generate,
    /// Alignment metrics, origin classification and annotation sheets.
    Evaluate,
    /// Administer the screening questionnaire to aligned models.
    Screen {
        /// Score recorded majority votes (`community,item,vote`) instead.
        #[arg(long)]
        from_votes: Option<PathBuf>,
        /// Published criteria (`community,c1,c2,c3,c4`) to compare against.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Collect tables and plot data into `out/report`.
    Report,
    /// Every stage in order.
    All,
    /// Write the bundled toy dataset and an offline config.
    Toy {
        /// Target directory.
        dir: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<Config> {
    if !cli.config.is_file() {
        return Err(TwinError::Config(format!(
            "config file {} does not exist",
            cli.config.display()
        )));
    }
    let mut config = Config::load_with_overrides(&cli.config, &cli.overrides)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.offline |= cli.offline;
    Ok(config)
}

fn summarize(stage: Stage, record: &StageRecord) {
    println!(
        "{stage}: {} output files, {} provider calls",
        record.outputs.len(),
        record.provider_calls()
    );
}

pub fn execute(cli: &Cli) -> Result<()> {
    if let Command::Toy { dir } = &cli.command {
        let path = crate::toy::write_toy(dir, cli.seed.unwrap_or(0))?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    let pipeline = Pipeline::new(load_config(cli)?)?;
    let single = |stage: Stage| pipeline.run(stage).map(|r| summarize(stage, &r));
    match &cli.command {
        Command::Ingest => single(Stage::Ingest),
        Command::Communities => single(Stage::Communities),
        Command::Curate => single(Stage::Curate),
        Command::Demos => single(Stage::Demos),
        Command::Generate => single(Stage::Generate),
        Command::Evaluate => single(Stage::Evaluate),
        Command::Report => single(Stage::Report),
        Command::Screen { from_votes, reference } => {
            let record = match from_votes {
                Some(votes) => pipeline.screen_from_votes(votes, reference.as_deref())?,
                None => pipeline.screen(reference.as_deref())?,
            };
            summarize(Stage::Screen, &record);
            Ok(())
        }
        Command::All => {
            for (stage, record) in pipeline.run_all()? {
                summarize(stage, &record);
            }
            Ok(())
        }
        Command::Toy { .. } => unreachable!("handled above"),
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Parses arguments, runs, and returns the process exit code: 0 on
/// success, 1 for usage and input errors, 2 when a provider failed.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    }
}

/// Convenience for tests and scripts: the config path a toy directory uses.
pub fn toy_config_path(dir: &Path) -> PathBuf {
    dir.join("twin.toml")
}
