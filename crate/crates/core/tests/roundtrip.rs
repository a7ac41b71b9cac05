//! Property tests: round trips, coder invariants, and parser robustness.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use disseg_core::coder::{
    code_narrative, label_sites, CueLexicon, FeatureId, GlobalProMode, Label,
};
use disseg_core::corpus::{
    emit_transcript, parse_transcript, FinalContour, Narrative, ParseMode, PauseDuration,
    ProsodicPhrase, SubjectAnnotation,
};
use disseg_core::segmenter::{
    parse_tree_canonical, parse_tree_text, serialize_tree_canonical, serialize_tree_text, Branch,
    DecisionTree, TreeNode,
};
use disseg_core::synth::{generate, SynthConfig};

fn phrase_strategy() -> impl Strategy<Value = ProsodicPhrase> {
    let word = "[a-z]{1,8}";
    let tail_token = prop_oneof![
        word.prop_map(|w| w),
        Just("..".to_string()),
        Just("[.45]".to_string()),
        "[a-z]{1,5}\\.\\.".prop_map(|w| w),
    ];
    (
        word.prop_map(|w| w.to_string()),
        prop::collection::vec(tail_token, 0..5),
        prop::option::of(0u32..300),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(first, tail, pause, short, sentence_final)| {
            let mut text = first;
            for t in tail {
                text.push(' ');
                text.push_str(&t);
            }
            ProsodicPhrase {
                index: 0,
                text,
                initial_pause: pause.map(|c| PauseDuration::from_seconds(c as f64 / 100.0)),
                initial_short_break: short,
                final_contour: if sentence_final {
                    FinalContour::SentenceFinal
                } else {
                    FinalContour::NonSentenceFinal
                },
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Emitting a narrative and parsing it back reproduces every
    /// structured phrase field.
    #[test]
    fn transcript_round_trip(phrases in prop::collection::vec(phrase_strategy(), 2..12)) {
        let phrases: Vec<ProsodicPhrase> = phrases
            .into_iter()
            .enumerate()
            .map(|(i, mut p)| { p.index = i + 1; p })
            .collect();
        let n_sites = phrases.len() - 1;
        let narrative = Narrative::new(
            "prop",
            phrases.clone(),
            vec![],
            SubjectAnnotation { subject_count: 7, marks_per_site: vec![0; n_sites], per_subject: None },
        ).unwrap();
        let emitted = emit_transcript(&narrative);
        let (reparsed, warnings) = parse_transcript(&emitted, ParseMode::Strict).unwrap();
        prop_assert!(warnings.is_empty());
        prop_assert_eq!(phrases, reparsed);
    }

    /// The lenient parser accepts arbitrary input without panicking and
    /// without reporting an error.
    #[test]
    fn lenient_parser_never_panics(input in any::<String>()) {
        let result = parse_transcript(&input, ParseMode::Lenient);
        prop_assert!(result.is_ok());
    }

    /// Every coded site satisfies the feature-vector invariants, and the
    /// number of records equals the number of sites.
    #[test]
    fn coded_vectors_satisfy_invariants(seed in any::<u64>(), count in 10usize..40) {
        let config = SynthConfig { phrase_counts: vec![count], seed, ..SynthConfig::default() };
        let narrative = generate(&config).pop().unwrap();
        let records = code_narrative(&narrative, &CueLexicon::builtin(), 3, GlobalProMode::Static).unwrap();
        prop_assert_eq!(records.len(), narrative.site_count());
        for r in &records {
            prop_assert!(r.features.validate().is_ok(), "site {}: {:?}", r.site_index, r.features);
        }
    }

    /// Raising the threshold never adds a boundary.
    #[test]
    fn labels_are_monotone_in_the_threshold(seed in any::<u64>(), t1 in 1u32..7, bump in 1u32..4) {
        let config = SynthConfig { phrase_counts: vec![30], seed, ..SynthConfig::default() };
        let narrative = generate(&config).pop().unwrap();
        let t2 = (t1 + bump).min(7);
        let low = label_sites(&narrative.subjects, t1).unwrap();
        let high = label_sites(&narrative.subjects, t2).unwrap();
        for (l, h) in low.iter().zip(&high) {
            if *h == Label::Boundary {
                prop_assert_eq!(*l, Label::Boundary);
            }
        }
    }

    /// Both tree file formats are the identity on randomly built trees.
    #[test]
    fn tree_formats_round_trip(seed in any::<u64>()) {
        let tree = random_tree(seed);
        tree.validate().unwrap();
        let text = serialize_tree_text(&tree);
        let from_text = parse_tree_text(&text)
            .map_err(|e| TestCaseError::fail(format!("text parse: {e}\n{text}")))?;
        prop_assert_eq!(&from_text, &tree);
        let canonical = serialize_tree_canonical(&tree);
        let from_canonical = parse_tree_canonical(&canonical)
            .map_err(|e| TestCaseError::fail(format!("canonical parse: {e}")))?;
        prop_assert_eq!(&from_canonical, &tree);
    }
}

/// Builds a random valid tree: features never repeat along a path, value
/// groups partition a sample of the feature's plausible values, and
/// thresholds land on a coarse grid.
fn random_tree(seed: u64) -> DecisionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features: Vec<FeatureId> = FeatureId::ALL.to_vec();
    features.shuffle(&mut rng);
    let root = random_node(&mut rng, &features, 0);
    DecisionTree { root }
}

fn values_for(feature: FeatureId) -> Vec<&'static str> {
    match feature {
        FeatureId::Before | FeatureId::After => vec!["+sfc", "-sfc"],
        FeatureId::Pause | FeatureId::Cue1 | FeatureId::Cue2 => vec!["true", "false"],
        FeatureId::Word1 | FeatureId::Word2 => {
            vec!["and", "so", "but", "then", "well", "anyway", "NA"]
        }
        FeatureId::Coref => vec!["+coref", "-coref", "NA"],
        FeatureId::Infer => vec!["+infer", "-infer", "NA"],
        FeatureId::GlobalPro => vec!["+gp", "-gp", "NA"],
        FeatureId::CueProsody => vec!["complex", "true", "false"],
        FeatureId::Duration => vec![],
    }
}

fn random_node(rng: &mut ChaCha8Rng, unused: &[FeatureId], depth: usize) -> TreeNode {
    let leaf_chance = 0.25 + depth as f64 * 0.3;
    if unused.is_empty() || rng.gen_bool(leaf_chance.min(0.95)) {
        return TreeNode::Leaf {
            class: if rng.gen_bool(0.5) {
                Label::Boundary
            } else {
                Label::NonBoundary
            },
        };
    }
    let feature = unused[rng.gen_range(0..unused.len())];
    let rest: Vec<FeatureId> = unused.iter().copied().filter(|f| *f != feature).collect();
    if feature == FeatureId::Duration {
        let threshold = rng.gen_range(1..=30) as f64 * 5.0 / 100.0;
        return TreeNode::Threshold {
            feature,
            threshold,
            le: Box::new(random_node(rng, &rest, depth + 1)),
            gt: Box::new(random_node(rng, &rest, depth + 1)),
        };
    }
    let mut values = values_for(feature);
    values.shuffle(rng);
    let group_count = rng.gen_range(2..=values.len().min(4));
    let mut groups: Vec<BTreeSet<String>> = vec![BTreeSet::new(); group_count];
    for (i, v) in values.iter().enumerate() {
        groups[i % group_count].insert(v.to_string());
    }
    let branches: Vec<Branch> = groups
        .into_iter()
        .map(|values| Branch {
            values,
            child: random_node(rng, &rest, depth + 1),
        })
        .collect();
    let default_branch = rng.gen_bool(0.7).then(|| rng.gen_range(0..branches.len()));
    TreeNode::Categorical {
        feature,
        branches,
        default_branch,
    }
}
