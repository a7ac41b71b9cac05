//! Discourse segmentation of spoken narratives.
//!
//! The crate covers the full experimental pipeline:
//!
//! * [`corpus`] — parse transcripts (one prosodic phrase per line, with
//!   pause and contour markers) and their hand-coded annotation sidecars;
//! * [`coder`] — turn every potential boundary site into a twelve-feature
//!   vector with a subject-majority gold label;
//! * [`segmenter`] — assign boundaries with the two noun-phrase rule
//!   algorithms, the builtin learned tree, or any tree read from a file;
//! * [`induce`] — learn decision trees from coded records with a
//!   gain-ratio criterion and pessimistic pruning;
//! * [`eval`] — score segmentations with information-retrieval metrics,
//!   aggregate across narratives, benchmark the human subjects, and run
//!   narrative-grouped cross-validation;
//! * [`synth`] — generate deterministic synthetic corpora for desk-scale
//!   experiments.
//!
//! ```
//! use disseg_core::prelude::*;
//!
//! let (phrases, _) = parse_transcript("He looks up.\n[.75] Falls over,\n", ParseMode::Strict)?;
//! let narrative = Narrative::new(
//!     "demo",
//!     phrases,
//!     vec![],
//!     SubjectAnnotation { subject_count: 7, marks_per_site: vec![5], per_subject: None },
//! )?;
//! let records = code_narrative(&narrative, &CueLexicon::builtin(), 3, GlobalProMode::Static)?;
//! let segmentation = apply_tree(&builtin_fig7_tree(), &records)?;
//! assert_eq!(segmentation.decisions.len(), 1);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod coder;
pub mod corpus;
pub mod eval;
pub mod induce;
pub mod segmenter;
pub mod synth;

/// The types and functions most callers need.
pub mod prelude {
    pub use crate::coder::{
        code_narrative, label_sites, read_feature_table, write_feature_table, CueLexicon,
        FeatureId, FeatureVector, GlobalProMode, Label, SiteRecord, TableMeta,
    };
    pub use crate::corpus::{
        emit_annotations, emit_transcript, load_corpus_dir, load_narrative, parse_annotations,
        parse_transcript, FinalContour, Narrative, ParseMode, SubjectAnnotation,
    };
    pub use crate::eval::{
        aggregate, confusion, cross_validate, human_performance, metrics, AggregateReport,
        ConfusionCounts, IrScores,
    };
    pub use crate::induce::{
        entropy, grow_tree, learn, prune_tree, FeatureSchema, LearnerConfig, TrainingSet,
    };
    pub use crate::segmenter::{
        apply_tree, builtin_fig7_tree, np_condition1, np_condition2, parse_tree_canonical,
        parse_tree_text, serialize_tree_canonical, serialize_tree_text, DecisionTree, Segmentation,
    };
}
