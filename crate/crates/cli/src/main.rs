use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use disseg_cli::config::Overrides;
use disseg_cli::error::CliError;
use disseg_cli::ops::{
    cmd_eval, cmd_features, cmd_gen_corpus, cmd_segment, cmd_train, cmd_xval, load_experiment,
    DataSel, GenOptions,
};

/// Discourse-segmentation experiments over spoken-narrative corpora.
#[derive(Parser)]
#[command(name = "disseg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export the coded feature table for the configured corpus.
    Features {
        #[arg(long)]
        config: PathBuf,
        /// Write the table here instead of `<out-dir>/features.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Narratives to code: train, test or all.
        #[arg(long, default_value = "all")]
        set: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Segment narratives with a rule algorithm or a decision tree.
    Segment {
        #[arg(long)]
        config: PathBuf,
        /// Narratives to segment: train, test or all.
        #[arg(long, default_value = "all")]
        set: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Learn decision tree(s) on the training split and report.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the full experiment report, score a stored segmentation, or
    /// benchmark the human subjects.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Report average human performance instead of the full suite.
        #[arg(long)]
        human: bool,
        /// Score this segmentation file against the gold labels.
        #[arg(long)]
        segmentation: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Narrative-grouped cross-validation over the training split.
    Xval {
        #[arg(long)]
        config: PathBuf,
        /// Fold count; defaults to one fold per training narrative.
        #[arg(long)]
        folds: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate a synthetic corpus and a ready-to-run experiment config.
    GenCorpus {
        /// Directory to create the corpus and config under.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 31)]
        seed: u64,
        /// Number of training narratives.
        #[arg(long, default_value_t = 10)]
        train: usize,
        /// Number of test narratives.
        #[arg(long, default_value_t = 5)]
        test: usize,
        /// Label-noise probability in [0, 1).
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Planted-rule pause cutoff in seconds.
        #[arg(long = "min-duration", default_value_t = 0.6)]
        min_duration: f64,
        #[arg(long, default_value_t = 7)]
        subjects: u32,
        #[arg(long, default_value_t = 3)]
        threshold: u32,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Features {
            config,
            out,
            set,
            overrides,
        } => {
            let experiment = load_experiment(&config, &overrides)?;
            cmd_features(&experiment, DataSel::parse(&set)?, out.as_deref())?;
            Ok(())
        }
        Command::Segment {
            config,
            set,
            overrides,
        } => {
            let experiment = load_experiment(&config, &overrides)?;
            cmd_segment(&experiment, DataSel::parse(&set)?)
        }
        Command::Train { config, overrides } => {
            let experiment = load_experiment(&config, &overrides)?;
            cmd_train(&experiment)
        }
        Command::Eval {
            config,
            human,
            segmentation,
            overrides,
        } => {
            let experiment = load_experiment(&config, &overrides)?;
            cmd_eval(&experiment, human, segmentation.as_deref())
        }
        Command::Xval {
            config,
            folds,
            overrides,
        } => {
            let experiment = load_experiment(&config, &overrides)?;
            cmd_xval(&experiment, folds)
        }
        Command::GenCorpus {
            out,
            seed,
            train,
            test,
            noise,
            min_duration,
            subjects,
            threshold,
        } => cmd_gen_corpus(&GenOptions {
            out,
            seed,
            train,
            test,
            noise,
            min_duration,
            subjects,
            threshold,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("disseg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
