//! Declarative experiment configuration.
//!
//! An experiment is a TOML file naming the corpus, the train/test split,
//! the coding options, the algorithm, and the learner settings, plus
//! command-line overrides for the options that are rerun most often.
//! Every report embeds an FNV-1a digest of the fully resolved
//! configuration so outputs can be traced back to the exact settings that
//! produced them.

use std::env;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use disseg_core::coder::GlobalProMode;
use disseg_core::induce::{CategoricalGrouping, GainRestriction, LearnerConfig};

use crate::error::CliError;

/// Environment variable naming the directory that relative corpus paths
/// resolve against; defaults to the config file's own directory.
pub const CORPUS_ROOT_ENV: &str = "DISSEG_CORPUS_ROOT";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: CorpusSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub coding: CodingSection,
    /// Algorithm used by `segment`: np1, np2, fig7, or `tree:<path>`.
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
    #[serde(default)]
    pub learner: LearnerSection,
    /// Optional second learner configuration, reported as "Learning 2".
    #[serde(default)]
    pub learner2: Option<LearnerSection>,
    #[serde(default)]
    pub xval: XvalSection,
    #[serde(default)]
    pub report: ReportSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_algorithm() -> String {
    "np2".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    /// Directory of `<id>.txt` transcripts with `<id>.ann` sidecars.
    pub dir: PathBuf,
    /// Cue lexicon file; the builtin inventory when absent.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default = "default_parse_mode")]
    pub parse_mode: String,
}

fn default_parse_mode() -> String {
    "strict".into()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    #[serde(default)]
    pub train: Vec<String>,
    #[serde(default)]
    pub test: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingSection {
    #[serde(default = "default_threshold")]
    pub threshold: u32,
    #[serde(default = "default_gp_mode")]
    pub global_pro_mode: String,
}

fn default_threshold() -> u32 {
    3
}

fn default_gp_mode() -> String {
    "static".into()
}

impl Default for CodingSection {
    fn default() -> Self {
        CodingSection {
            threshold: default_threshold(),
            global_pro_mode: default_gp_mode(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    #[serde(default = "default_min_instances")]
    pub min_instances: usize,
    #[serde(default = "default_cf")]
    pub confidence_factor: f64,
    #[serde(default = "default_grouping")]
    pub categorical_grouping: String,
    #[serde(default = "default_restriction")]
    pub gain_restriction: String,
}

fn default_min_instances() -> usize {
    2
}

fn default_cf() -> f64 {
    0.25
}

fn default_grouping() -> String {
    "per_value".into()
}

fn default_restriction() -> String {
    "gain_ratio_over_average_gain".into()
}

impl Default for LearnerSection {
    fn default() -> Self {
        LearnerSection {
            min_instances: default_min_instances(),
            confidence_factor: default_cf(),
            categorical_grouping: default_grouping(),
            gain_restriction: default_restriction(),
        }
    }
}

impl LearnerSection {
    pub fn to_learner_config(&self) -> Result<LearnerConfig, CliError> {
        let categorical_grouping = match self.categorical_grouping.as_str() {
            "per_value" => CategoricalGrouping::PerValue,
            "subset_search" => CategoricalGrouping::SubsetSearch,
            other => {
                return Err(CliError::config(format!(
                    "unknown categorical_grouping '{other}' (expected per_value or subset_search)"
                )))
            }
        };
        let gain_restriction = match self.gain_restriction.as_str() {
            "gain_ratio_over_average_gain" => GainRestriction::GainRatioOverAverageGain,
            "pure_gain_ratio" => GainRestriction::PureGainRatio,
            other => {
                return Err(CliError::config(format!(
                    "unknown gain_restriction '{other}'"
                )))
            }
        };
        let config = LearnerConfig {
            min_instances: self.min_instances,
            confidence_factor: self.confidence_factor,
            categorical_grouping,
            gain_restriction,
        };
        config.validate().map_err(CliError::config)?;
        Ok(config)
    }

    /// True when this matches the stock configuration, i.e. a "Learning 1"
    /// style run.
    pub fn is_default(&self) -> bool {
        let d = LearnerSection::default();
        self.min_instances == d.min_instances
            && self.confidence_factor == d.confidence_factor
            && self.categorical_grouping == d.categorical_grouping
            && self.gain_restriction == d.gain_restriction
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XvalSection {
    /// Fold count; 0 means one fold per training narrative.
    #[serde(default)]
    pub folds: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "text".into()
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            format: default_format(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out_dir(),
        }
    }
}

/// Command-line overrides applied on top of the loaded file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Boundary threshold T (subjects required for a gold boundary).
    #[arg(long)]
    pub threshold: Option<u32>,
    /// Cue lexicon file replacing the configured one.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// global.pro grounding recorded in exports: static or dynamic.
    #[arg(long = "global-pro-mode")]
    pub global_pro_mode: Option<String>,
    /// Algorithm for `segment`: np1, np2, fig7, or `tree:<path>`.
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Learner: minimum records in at least two branches of a split.
    #[arg(long = "min-instances")]
    pub min_instances: Option<usize>,
    /// Learner: pruning confidence factor in (0, 1].
    #[arg(long = "confidence-factor")]
    pub confidence_factor: Option<f64>,
    /// Learner: per_value or subset_search.
    #[arg(long = "grouping")]
    pub categorical_grouping: Option<String>,
    /// Learner: gain_ratio_over_average_gain or pure_gain_ratio.
    #[arg(long = "gain-restriction")]
    pub gain_restriction: Option<String>,
    /// Report format: text or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Output directory for generated files.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;

        // Relative corpus paths resolve against the corpus root: the
        // environment override when set, otherwise the config's directory.
        let base = env::var_os(CORPUS_ROOT_ENV)
            .map(PathBuf::from)
            .or_else(|| path.parent().map(|p| p.to_path_buf()))
            .unwrap_or_default();
        if config.corpus.dir.is_relative() {
            config.corpus.dir = base.join(&config.corpus.dir);
        }
        if let Some(lex) = &config.corpus.lexicon {
            if lex.is_relative() {
                config.corpus.lexicon = Some(base.join(lex));
            }
        }

        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(t) = o.threshold {
            self.coding.threshold = t;
        }
        if let Some(lex) = &o.lexicon {
            self.corpus.lexicon = Some(lex.clone());
        }
        if let Some(mode) = &o.global_pro_mode {
            self.coding.global_pro_mode = mode.clone();
        }
        if let Some(a) = &o.algorithm {
            self.algorithm = a.clone();
        }
        if let Some(v) = o.min_instances {
            self.learner.min_instances = v;
        }
        if let Some(v) = o.confidence_factor {
            self.learner.confidence_factor = v;
        }
        if let Some(v) = &o.categorical_grouping {
            self.learner.categorical_grouping = v.clone();
        }
        if let Some(v) = &o.gain_restriction {
            self.learner.gain_restriction = v.clone();
        }
        if let Some(v) = &o.format {
            self.report.format = v.clone();
        }
        if let Some(v) = &o.out_dir {
            self.output.dir = v.clone();
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        for id in &self.split.train {
            if self.split.test.contains(id) {
                return Err(CliError::config(format!(
                    "narrative '{id}' appears in both train and test"
                )));
            }
        }
        if !self.corpus.dir.is_dir() {
            return Err(CliError::config(format!(
                "corpus directory {} does not exist",
                self.corpus.dir.display()
            )));
        }
        for id in self.split.train.iter().chain(&self.split.test) {
            for ext in ["txt", "ann"] {
                let p = self.corpus.dir.join(format!("{id}.{ext}"));
                if !p.is_file() {
                    return Err(CliError::config(format!(
                        "missing corpus file {}",
                        p.display()
                    )));
                }
            }
        }
        if let Some(lex) = &self.corpus.lexicon {
            if !lex.is_file() {
                return Err(CliError::config(format!(
                    "lexicon file {} does not exist",
                    lex.display()
                )));
            }
        }
        self.global_pro_mode()?;
        self.parse_mode()?;
        self.learner.to_learner_config()?;
        if let Some(l2) = &self.learner2 {
            l2.to_learner_config()?;
        }
        match self.report.format.as_str() {
            "text" | "json" => {}
            other => {
                return Err(CliError::config(format!(
                    "unknown report format '{other}' (expected text or json)"
                )))
            }
        }
        Algorithm::parse(&self.algorithm)?;
        Ok(())
    }

    pub fn global_pro_mode(&self) -> Result<GlobalProMode, CliError> {
        GlobalProMode::parse(&self.coding.global_pro_mode).ok_or_else(|| {
            CliError::config(format!(
                "unknown global_pro_mode '{}' (expected static or dynamic)",
                self.coding.global_pro_mode
            ))
        })
    }

    pub fn parse_mode(&self) -> Result<disseg_core::corpus::ParseMode, CliError> {
        match self.corpus.parse_mode.as_str() {
            "strict" => Ok(disseg_core::corpus::ParseMode::Strict),
            "lenient" => Ok(disseg_core::corpus::ParseMode::Lenient),
            other => Err(CliError::config(format!(
                "unknown parse_mode '{other}' (expected strict or lenient)"
            ))),
        }
    }

    /// FNV-1a digest of the resolved configuration.
    pub fn digest(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in canonical.bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

/// The segmentation algorithm selector.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Np1,
    Np2,
    Fig7,
    TreeFile(PathBuf),
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Algorithm, CliError> {
        match s {
            "np1" => Ok(Algorithm::Np1),
            "np2" => Ok(Algorithm::Np2),
            "fig7" => Ok(Algorithm::Fig7),
            other => match other.strip_prefix("tree:") {
                Some(path) if !path.is_empty() => Ok(Algorithm::TreeFile(PathBuf::from(path))),
                _ => Err(CliError::config(format!(
                    "unknown algorithm '{other}' (expected np1, np2, fig7 or tree:<path>)"
                ))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Algorithm::Np1 => "np1".into(),
            Algorithm::Np2 => "np2".into(),
            Algorithm::Fig7 => "fig7".into(),
            Algorithm::TreeFile(p) => format!("tree:{}", p.display()),
        }
    }
}
