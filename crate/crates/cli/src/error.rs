//! CLI error classes with stable exit codes: 2 for configuration
//! problems, 3 for corpus parse/annotation problems, 4 for schema problems
//! (feature tables, tree files, domain mismatches), 1 for everything else.

use std::fmt;

use disseg_core::coder::CoderError;
use disseg_core::corpus::CorpusError;
use disseg_core::eval::EvalError;
use disseg_core::induce::InduceError;
use disseg_core::segmenter::{ApplyError, SegmentationFormatError, TreeFormatError};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Corpus(String),
    Schema(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Corpus(_) => 3,
            CliError::Schema(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Corpus(m) => write!(f, "corpus error: {m}"),
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Corpus(e.to_string())
    }
}

impl From<CoderError> for CliError {
    fn from(e: CoderError) -> Self {
        match e {
            CoderError::ThresholdOutOfRange { .. } => CliError::Config(e.to_string()),
            CoderError::Table { .. } => CliError::Schema(e.to_string()),
        }
    }
}

impl From<TreeFormatError> for CliError {
    fn from(e: TreeFormatError) -> Self {
        CliError::Schema(e.to_string())
    }
}

impl From<SegmentationFormatError> for CliError {
    fn from(e: SegmentationFormatError) -> Self {
        CliError::Schema(e.to_string())
    }
}

impl From<ApplyError> for CliError {
    fn from(e: ApplyError) -> Self {
        CliError::Schema(e.to_string())
    }
}

impl From<InduceError> for CliError {
    fn from(e: InduceError) -> Self {
        CliError::Schema(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Coder(inner) => inner.into(),
            EvalError::Apply(inner) => inner.into(),
            EvalError::Induce(inner) => inner.into(),
            EvalError::TooFewFolds { .. } | EvalError::FoldsExceedNarratives { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
