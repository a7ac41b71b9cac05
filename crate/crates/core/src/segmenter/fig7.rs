//! The published high-performing learned tree, built in as a ready-to-use
//! classifier.
//!
//! The tree tests `before`, `coref`, `after`, `duration`, `word1`, `infer`,
//! `cue1` and `global.pro`. Its `word1` test is encoded in the published
//! merged form: two value groups plus a dedicated "and" branch. The
//! originally learned tree branched on every `word1` value; callers wanting
//! that shape can expand the builtin with
//! [`DecisionTree::expand_grouped`](super::DecisionTree::expand_grouped),
//! which agrees with the merged groups by construction.

use std::collections::BTreeSet;

use crate::coder::{FeatureId, Label};
use crate::segmenter::tree::{Branch, DecisionTree, TreeNode};

fn leaf(class: Label) -> TreeNode {
    TreeNode::Leaf { class }
}

fn branch(values: &[&str], child: TreeNode) -> Branch {
    Branch {
        values: values
            .iter()
            .map(|v| v.to_string())
            .collect::<BTreeSet<_>>(),
        child,
    }
}

fn categorical(
    feature: FeatureId,
    branches: Vec<Branch>,
    default_branch: Option<usize>,
) -> TreeNode {
    TreeNode::Categorical {
        feature,
        branches,
        default_branch,
    }
}

fn threshold(t: f64, le: TreeNode, gt: TreeNode) -> TreeNode {
    TreeNode::Threshold {
        feature: FeatureId::Duration,
        threshold: t,
        le: Box::new(le),
        gt: Box::new(gt),
    }
}

/// Words routed to `non-boundary` when `before` is sentence-final, the new
/// clause corefers, and `after` is not sentence-final.
const WORD1_NON_BOUNDARY: [&str; 16] = [
    "also",
    "basically",
    "because",
    "finally",
    "first",
    "like",
    "meanwhile",
    "no",
    "oh",
    "okay",
    "only",
    "see",
    "so",
    "well",
    "where",
    "NA",
];

/// Words routed straight to `boundary` in the same context.
const WORD1_BOUNDARY: [&str; 5] = ["anyway", "but", "now", "or", "then"];

/// Returns the builtin decision tree.
pub fn builtin_fig7_tree() -> DecisionTree {
    use Label::{Boundary, NonBoundary};

    let coref_plus = categorical(
        FeatureId::After,
        vec![
            branch(&["+sfc"], threshold(1.3, leaf(NonBoundary), leaf(Boundary))),
            branch(
                &["-sfc"],
                categorical(
                    FeatureId::Word1,
                    vec![
                        branch(&WORD1_NON_BOUNDARY, leaf(NonBoundary)),
                        branch(&WORD1_BOUNDARY, leaf(Boundary)),
                        branch(&["and"], threshold(0.6, leaf(NonBoundary), leaf(Boundary))),
                    ],
                    // Cue words outside the published inventory behave like
                    // the majority group.
                    Some(0),
                ),
            ),
        ],
        None,
    );

    let global_pro = categorical(
        FeatureId::GlobalPro,
        vec![
            branch(&["NA"], leaf(Boundary)),
            branch(&["-gp"], leaf(Boundary)),
            branch(&["+gp"], threshold(0.65, leaf(NonBoundary), leaf(Boundary))),
        ],
        None,
    );

    let cue1_false = threshold(
        0.5,
        threshold(0.35, leaf(NonBoundary), leaf(Boundary)),
        leaf(NonBoundary),
    );

    let infer_minus = categorical(
        FeatureId::After,
        vec![
            branch(&["-sfc"], leaf(Boundary)),
            branch(
                &["+sfc"],
                categorical(
                    FeatureId::Cue1,
                    vec![
                        branch(&["true"], global_pro),
                        branch(&["false"], cue1_false),
                    ],
                    None,
                ),
            ),
        ],
        None,
    );

    let coref_minus = categorical(
        FeatureId::Infer,
        vec![
            branch(&["+infer"], leaf(NonBoundary)),
            branch(&["NA"], leaf(Boundary)),
            branch(&["-infer"], infer_minus),
        ],
        None,
    );

    let before_plus = categorical(
        FeatureId::Coref,
        vec![
            branch(&["NA"], leaf(NonBoundary)),
            branch(&["+coref"], coref_plus),
            branch(&["-coref"], coref_minus),
        ],
        None,
    );

    DecisionTree {
        root: categorical(
            FeatureId::Before,
            vec![
                branch(&["-sfc"], leaf(NonBoundary)),
                branch(&["+sfc"], before_plus),
            ],
            None,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coder::{CueProsody, FeatureVector, NpValue};
    use crate::corpus::FinalContour;

    fn vector() -> FeatureVector {
        FeatureVector {
            before: FinalContour::SentenceFinal,
            after: FinalContour::NonSentenceFinal,
            pause: true,
            duration: 0.75,
            cue1: false,
            word1: None,
            cue2: false,
            word2: None,
            coref: NpValue::Plus,
            infer: NpValue::Minus,
            global_pro: NpValue::Plus,
            cue_prosody: CueProsody::True,
        }
    }

    #[test]
    fn builtin_is_structurally_valid() {
        builtin_fig7_tree().validate().unwrap();
    }

    #[test]
    fn non_sentence_final_before_is_never_a_boundary() {
        let tree = builtin_fig7_tree();
        let mut fv = vector();
        fv.before = FinalContour::NonSentenceFinal;
        assert_eq!(tree.classify(&fv).unwrap(), Label::NonBoundary);
    }

    #[test]
    fn long_pause_after_coreferent_clause_is_a_boundary() {
        let tree = builtin_fig7_tree();
        let mut fv = vector();
        fv.after = FinalContour::SentenceFinal;
        fv.duration = 1.5;
        assert_eq!(tree.classify(&fv).unwrap(), Label::Boundary);
        fv.duration = 1.3;
        assert_eq!(tree.classify(&fv).unwrap(), Label::NonBoundary);
    }

    #[test]
    fn reference_site_vector_is_non_boundary() {
        // before=+sfc, coref=+coref, after=-sfc, word1=NA: the NA falls in
        // the non-boundary word group.
        let tree = builtin_fig7_tree();
        assert_eq!(tree.classify(&vector()).unwrap(), Label::NonBoundary);
    }

    #[test]
    fn unlisted_cue_word_uses_the_default_group() {
        let tree = builtin_fig7_tree();
        let mut fv = vector();
        fv.cue1 = true;
        fv.word1 = Some("right".into());
        assert_eq!(tree.classify(&fv).unwrap(), Label::NonBoundary);
    }

    #[test]
    fn expanded_builtin_agrees_with_merged_form() {
        let merged = builtin_fig7_tree();
        let expanded = merged.expand_grouped();
        expanded.validate().unwrap();
        for word in ["and", "but", "so", "then", "NA", "right"] {
            let mut fv = vector();
            if word == "NA" {
                fv.cue1 = false;
                fv.word1 = None;
            } else {
                fv.cue1 = true;
                fv.word1 = Some(word.into());
            }
            assert_eq!(
                merged.classify(&fv).unwrap(),
                expanded.classify(&fv).unwrap(),
                "disagreement on word1={word}"
            );
        }
    }
}
