//! Decision-tree induction from coded site records.
//!
//! The learner grows a tree top-down, choosing at each node the candidate
//! test with the best gain ratio among those whose information gain reaches
//! the mean gain of all viable candidates, then prunes bottom-up using a
//! pessimistic binomial error estimate. Candidate evaluation is
//! deterministic: features are scanned in schema order and ties keep the
//! earliest candidate, so a fixed training set and configuration always
//! yield the same tree.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coder::{CueLexicon, FeatureId, Label, SiteRecord};
use crate::segmenter::{Branch, DecisionTree, TreeNode};

#[derive(Debug, Error)]
pub enum InduceError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("entropy of zero records is undefined")]
    NoRecords,
    #[error("record value '{value}' for {} is outside the schema domain", .feature.name())]
    ValueOutsideSchema { feature: FeatureId, value: String },
}

/// How categorical features are branched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CategoricalGrouping {
    /// One branch per declared value.
    #[serde(rename = "per_value")]
    PerValue,
    /// Greedy merging of value groups while the gain ratio improves.
    #[serde(rename = "subset_search")]
    SubsetSearch,
}

/// How the winning split is selected among scored candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GainRestriction {
    /// Best gain ratio among candidates whose gain is at least the mean
    /// gain of all positive-gain candidates.
    #[serde(rename = "gain_ratio_over_average_gain")]
    GainRatioOverAverageGain,
    /// Best gain ratio among all positive-gain candidates.
    #[serde(rename = "pure_gain_ratio")]
    PureGainRatio,
}

/// Learner options. The defaults reproduce a stock configuration of the
/// classic induction setup: at least two branches with two records each,
/// pruning at confidence 0.25, one branch per categorical value, and the
/// average-gain restriction on the gain-ratio criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub min_instances: usize,
    pub confidence_factor: f64,
    pub categorical_grouping: CategoricalGrouping,
    pub gain_restriction: GainRestriction,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            min_instances: 2,
            confidence_factor: 0.25,
            categorical_grouping: CategoricalGrouping::PerValue,
            gain_restriction: GainRestriction::GainRatioOverAverageGain,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_instances < 1 {
            return Err("min_instances must be at least 1".into());
        }
        if !(self.confidence_factor > 0.0 && self.confidence_factor <= 1.0) {
            return Err("confidence_factor must lie in (0, 1]".into());
        }
        Ok(())
    }
}

/// Declared value domains for the categorical features. Word domains come
/// from the cue lexicon (sorted) plus `NA`; everything else is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    word_values: Vec<String>,
}

impl FeatureSchema {
    pub fn with_lexicon(lexicon: &CueLexicon) -> Self {
        let mut word_values: Vec<String> = lexicon.words().map(|w| w.to_string()).collect();
        word_values.push("NA".to_string());
        FeatureSchema { word_values }
    }

    /// The declared values of a categorical feature, in canonical order;
    /// `None` for the continuous duration feature.
    pub fn declared_values(&self, feature: FeatureId) -> Option<Vec<&str>> {
        let fixed: &[&str] = match feature {
            FeatureId::Before | FeatureId::After => &["+sfc", "-sfc"],
            FeatureId::Pause | FeatureId::Cue1 | FeatureId::Cue2 => &["true", "false"],
            FeatureId::Word1 | FeatureId::Word2 => {
                return Some(self.word_values.iter().map(|s| s.as_str()).collect())
            }
            FeatureId::Coref => &["+coref", "-coref", "NA"],
            FeatureId::Infer => &["+infer", "-infer", "NA"],
            FeatureId::GlobalPro => &["+gp", "-gp", "NA"],
            FeatureId::CueProsody => &["complex", "true", "false"],
            FeatureId::Duration => return None,
        };
        Some(fixed.to_vec())
    }
}

impl Default for FeatureSchema {
    fn default() -> Self {
        FeatureSchema::with_lexicon(&CueLexicon::builtin())
    }
}

/// A labelled training set plus the schema its values are drawn from.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub records: Vec<SiteRecord>,
    pub schema: FeatureSchema,
}

impl TrainingSet {
    /// Validates that the set is non-empty and every categorical value is
    /// inside the schema's declared domain.
    pub fn new(records: Vec<SiteRecord>, schema: FeatureSchema) -> Result<Self, InduceError> {
        if records.is_empty() {
            return Err(InduceError::EmptyTrainingSet);
        }
        for r in &records {
            for feature in FeatureId::ALL {
                let Some(domain) = schema.declared_values(feature) else {
                    continue;
                };
                let value = r.features.categorical(feature).unwrap();
                if !domain.contains(&value.as_ref()) {
                    return Err(InduceError::ValueOutsideSchema {
                        feature,
                        value: value.into_owned(),
                    });
                }
            }
        }
        Ok(TrainingSet { records, schema })
    }
}

/// Two-class entropy in bits.
pub fn entropy(boundary: usize, non_boundary: usize) -> Result<f64, InduceError> {
    let total = boundary + non_boundary;
    if total == 0 {
        return Err(InduceError::NoRecords);
    }
    let mut bits = 0.0;
    for count in [boundary, non_boundary] {
        if count > 0 {
            let p = count as f64 / total as f64;
            bits -= p * p.log2();
        }
    }
    Ok(bits)
}

/// A candidate test at a node.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitTest {
    Categorical {
        feature: FeatureId,
        groups: Vec<Vec<String>>,
    },
    Threshold {
        threshold: f64,
    },
}

/// Result of scoring a candidate split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitScore {
    Scored {
        gain: f64,
        gain_ratio: f64,
    },
    /// The split puts every record in one branch (split information zero)
    /// or cannot route some record.
    Rejected,
}

fn class_counts(records: &[&SiteRecord]) -> (usize, usize) {
    let boundary = records
        .iter()
        .filter(|r| r.label == Label::Boundary)
        .count();
    (boundary, records.len() - boundary)
}

fn majority_label(boundary: usize, non_boundary: usize) -> Label {
    // Ties go to non-boundary, by far the more common class.
    if boundary > non_boundary {
        Label::Boundary
    } else {
        Label::NonBoundary
    }
}

fn branch_index(record: &SiteRecord, test: &SplitTest) -> Option<usize> {
    match test {
        SplitTest::Categorical { feature, groups } => {
            let value = record.features.categorical(*feature)?;
            groups
                .iter()
                .position(|g| g.iter().any(|v| v == value.as_ref()))
        }
        SplitTest::Threshold { threshold } => Some(if record.features.duration <= *threshold {
            0
        } else {
            1
        }),
    }
}

/// Scores a candidate split by information gain and gain ratio.
pub fn evaluate_split(records: &[&SiteRecord], test: &SplitTest) -> SplitScore {
    let branch_count = match test {
        SplitTest::Categorical { groups, .. } => groups.len(),
        SplitTest::Threshold { .. } => 2,
    };
    let mut per_branch = vec![(0usize, 0usize); branch_count];
    for r in records {
        let Some(i) = branch_index(r, test) else {
            return SplitScore::Rejected;
        };
        if r.label == Label::Boundary {
            per_branch[i].0 += 1;
        } else {
            per_branch[i].1 += 1;
        }
    }

    let total = records.len() as f64;
    let (b, n) = class_counts(records);
    let parent = match entropy(b, n) {
        Ok(e) => e,
        Err(_) => return SplitScore::Rejected,
    };

    let mut weighted_child = 0.0;
    let mut split_info = 0.0;
    let mut nonempty = 0;
    for &(bb, bn) in &per_branch {
        let size = bb + bn;
        if size == 0 {
            continue;
        }
        nonempty += 1;
        let weight = size as f64 / total;
        weighted_child += weight * entropy(bb, bn).expect("non-empty branch");
        split_info -= weight * weight.log2();
    }
    if nonempty < 2 || split_info <= 0.0 {
        return SplitScore::Rejected;
    }
    let gain = parent - weighted_child;
    SplitScore::Scored {
        gain,
        gain_ratio: gain / split_info,
    }
}

/// Gains below this are treated as zero to keep float dust from driving
/// tree growth.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Candidate {
    test: SplitTest,
    gain: f64,
    gain_ratio: f64,
}

fn satisfies_min_instances(
    records: &[&SiteRecord],
    test: &SplitTest,
    min_instances: usize,
) -> bool {
    let branch_count = match test {
        SplitTest::Categorical { groups, .. } => groups.len(),
        SplitTest::Threshold { .. } => 2,
    };
    let mut sizes = vec![0usize; branch_count];
    for r in records {
        if let Some(i) = branch_index(r, test) {
            sizes[i] += 1;
        }
    }
    sizes.iter().filter(|&&s| s >= min_instances).count() >= 2
}

fn threshold_candidates(records: &[&SiteRecord]) -> Vec<f64> {
    let mut values: Vec<f64> = records.iter().map(|r| r.features.duration).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    // Thresholds sit at observed values: for each midpoint between adjacent
    // distinct values the largest observation not exceeding it is the lower
    // value, so every distinct value except the maximum is a candidate.
    values.pop();
    values
}

fn subset_search_groups(
    records: &[&SiteRecord],
    feature: FeatureId,
    declared: &[&str],
) -> Vec<Vec<String>> {
    let mut groups: Vec<Vec<String>> = declared.iter().map(|v| vec![v.to_string()]).collect();
    let score_of = |groups: &[Vec<String>]| -> Option<f64> {
        let test = SplitTest::Categorical {
            feature,
            groups: groups.to_vec(),
        };
        match evaluate_split(records, &test) {
            SplitScore::Scored { gain_ratio, .. } => Some(gain_ratio),
            SplitScore::Rejected => None,
        }
    };
    let mut current = score_of(&groups);
    while groups.len() > 2 {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let mut merged = groups.clone();
                let moved = merged.remove(j);
                merged[i].extend(moved);
                if let Some(ratio) = score_of(&merged) {
                    let better = match best {
                        None => true,
                        Some((_, _, r)) => ratio > r,
                    };
                    if better {
                        best = Some((i, j, ratio));
                    }
                }
            }
        }
        match best {
            Some((i, j, ratio)) if current.is_none() || ratio > current.unwrap() => {
                let moved = groups.remove(j);
                groups[i].extend(moved);
                current = Some(ratio);
            }
            _ => break,
        }
    }
    groups
}

fn enumerate_candidates(
    records: &[&SiteRecord],
    schema: &FeatureSchema,
    config: &LearnerConfig,
) -> Vec<Candidate> {
    let mut out = Vec::new();
    for feature in FeatureId::ALL {
        match schema.declared_values(feature) {
            None => {
                for threshold in threshold_candidates(records) {
                    let test = SplitTest::Threshold { threshold };
                    consider(records, test, config, &mut out);
                }
            }
            Some(declared) => {
                let groups: Vec<Vec<String>> = match config.categorical_grouping {
                    CategoricalGrouping::PerValue => {
                        declared.iter().map(|v| vec![v.to_string()]).collect()
                    }
                    CategoricalGrouping::SubsetSearch => {
                        subset_search_groups(records, feature, &declared)
                    }
                };
                let test = SplitTest::Categorical { feature, groups };
                consider(records, test, config, &mut out);
            }
        }
    }
    out
}

fn consider(
    records: &[&SiteRecord],
    test: SplitTest,
    config: &LearnerConfig,
    out: &mut Vec<Candidate>,
) {
    if !satisfies_min_instances(records, &test, config.min_instances) {
        return;
    }
    if let SplitScore::Scored { gain, gain_ratio } = evaluate_split(records, &test) {
        if gain > MIN_GAIN {
            out.push(Candidate {
                test,
                gain,
                gain_ratio,
            });
        }
    }
}

fn select_candidate(candidates: Vec<Candidate>, restriction: GainRestriction) -> Option<Candidate> {
    if candidates.is_empty() {
        return None;
    }
    let eligible: Vec<Candidate> = match restriction {
        GainRestriction::PureGainRatio => candidates,
        GainRestriction::GainRatioOverAverageGain => {
            let mean = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
            candidates
                .into_iter()
                .filter(|c| c.gain + 1e-12 >= mean)
                .collect()
        }
    };
    // Strictly-greater keeps the earliest candidate on ties, preserving
    // schema order and the low-threshold-first enumeration.
    eligible.into_iter().reduce(|best, c| {
        if c.gain_ratio > best.gain_ratio {
            c
        } else {
            best
        }
    })
}

/// Grows an unpruned tree.
///
/// Growth stops at pure nodes, when no candidate leaves at least two
/// branches with `min_instances` records, or when no candidate has
/// positive gain. Leaf classes are the majority label with ties broken
/// toward non-boundary. Every categorical split covers its declared
/// domain, with a default branch (the most populated) absorbing values
/// unseen at application time.
pub fn grow_tree(training: &TrainingSet, config: &LearnerConfig) -> DecisionTree {
    assert!(
        config.min_instances >= 1,
        "min_instances must be at least 1"
    );
    let refs: Vec<&SiteRecord> = training.records.iter().collect();
    DecisionTree {
        root: grow_node(&refs, &training.schema, config),
    }
}

fn grow_node(records: &[&SiteRecord], schema: &FeatureSchema, config: &LearnerConfig) -> TreeNode {
    let (b, n) = class_counts(records);
    let majority = majority_label(b, n);
    if b == 0 || n == 0 {
        return TreeNode::Leaf { class: majority };
    }
    let candidates = enumerate_candidates(records, schema, config);
    let Some(chosen) = select_candidate(candidates, config.gain_restriction) else {
        return TreeNode::Leaf { class: majority };
    };
    match chosen.test {
        SplitTest::Threshold { threshold } => {
            let (le, gt): (Vec<&SiteRecord>, Vec<&SiteRecord>) = records
                .iter()
                .partition(|r| r.features.duration <= threshold);
            TreeNode::Threshold {
                feature: FeatureId::Duration,
                threshold,
                le: Box::new(grow_node(&le, schema, config)),
                gt: Box::new(grow_node(&gt, schema, config)),
            }
        }
        SplitTest::Categorical { feature, groups } => {
            let test = SplitTest::Categorical {
                feature,
                groups: groups.clone(),
            };
            let mut partitions: Vec<Vec<&SiteRecord>> = vec![Vec::new(); groups.len()];
            for r in records {
                let i = branch_index(r, &test).expect("training values lie in the schema domain");
                partitions[i].push(r);
            }
            let default_branch = partitions
                .iter()
                .enumerate()
                .max_by(|(ai, a), (bi, b)| a.len().cmp(&b.len()).then(bi.cmp(ai)))
                .map(|(i, _)| i);
            let branches = groups
                .into_iter()
                .zip(&partitions)
                .map(|(values, part)| Branch {
                    values: values.into_iter().collect(),
                    child: if part.is_empty() {
                        TreeNode::Leaf { class: majority }
                    } else {
                        grow_node(part, schema, config)
                    },
                })
                .collect();
            TreeNode::Categorical {
                feature,
                branches,
                default_branch,
            }
        }
    }
}

/// Upper confidence bound on the true error rate after observing `errors`
/// misclassifications in `n` records.
///
/// This inverts the binomial tail: the returned rate `p` satisfies
/// `P[Bin(n, p) <= errors] = cf`, clamped below at the observed rate so
/// the estimate is never optimistic. At `cf = 1.0` the bound equals the
/// observed rate exactly, which disables pruning pressure.
pub fn upper_error_bound(errors: usize, n: usize, cf: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let observed = errors as f64 / n as f64;
    if cf >= 1.0 || errors >= n {
        return observed.min(1.0);
    }
    if errors == 0 {
        // Closed form: (1 - p)^n = cf.
        return 1.0 - cf.powf(1.0 / n as f64);
    }
    if binomial_cdf(errors, n, observed) <= cf {
        return observed;
    }
    let mut lo = observed;
    let mut hi = 1.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if binomial_cdf(errors, n, mid) > cf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// P[Bin(n, p) <= k] by direct summation.
fn binomial_cdf(k: usize, n: usize, p: f64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    let q = 1.0 - p;
    let mut term = q.powi(n as i32);
    let mut sum = term;
    for i in 0..k {
        term *= (n - i) as f64 / (i + 1) as f64 * (p / q);
        sum += term;
    }
    sum.min(1.0)
}

fn pessimistic_errors(errors: usize, n: usize, cf: f64) -> f64 {
    n as f64 * upper_error_bound(errors, n, cf)
}

fn misclassified(records: &[&SiteRecord], class: Label) -> usize {
    records.iter().filter(|r| r.label != class).count()
}

/// Prunes a grown tree bottom-up.
///
/// Each subtree is compared against replacing it with a majority leaf or
/// with its most-used branch (re-pruned over all of the node's records);
/// the replacement with the smallest pessimistic error estimate wins, with
/// ties preferring the simpler form.
pub fn prune_tree(
    tree: DecisionTree,
    training: &TrainingSet,
    config: &LearnerConfig,
) -> DecisionTree {
    let refs: Vec<&SiteRecord> = training.records.iter().collect();
    let (root, _) = prune_node(tree.root, &refs, config.confidence_factor);
    DecisionTree { root }
}

fn prune_node(node: TreeNode, records: &[&SiteRecord], cf: f64) -> (TreeNode, f64) {
    if records.is_empty() {
        return (node, 0.0);
    }
    match node {
        TreeNode::Leaf { class } => {
            let est = pessimistic_errors(misclassified(records, class), records.len(), cf);
            (TreeNode::Leaf { class }, est)
        }
        TreeNode::Threshold {
            feature,
            threshold,
            le,
            gt,
        } => {
            let (le_recs, gt_recs): (Vec<&SiteRecord>, Vec<&SiteRecord>) = records
                .iter()
                .partition(|r| r.features.duration <= threshold);
            let (le_node, le_est) = prune_node(*le, &le_recs, cf);
            let (gt_node, gt_est) = prune_node(*gt, &gt_recs, cf);
            let kept = TreeNode::Threshold {
                feature,
                threshold,
                le: Box::new(le_node),
                gt: Box::new(gt_node),
            };
            let larger = if le_recs.len() >= gt_recs.len() { 0 } else { 1 };
            finish_prune(kept, le_est + gt_est, larger, records, cf)
        }
        TreeNode::Categorical {
            feature,
            branches,
            default_branch,
        } => {
            let mut partitions: Vec<Vec<&SiteRecord>> = vec![Vec::new(); branches.len()];
            for r in records {
                let value = r.features.categorical(feature).unwrap();
                let i = branches
                    .iter()
                    .position(|b| b.values.contains(value.as_ref()))
                    .or(default_branch)
                    .unwrap_or(0);
                partitions[i].push(r);
            }
            let mut subtree_est = 0.0;
            let mut pruned_branches = Vec::with_capacity(branches.len());
            for (b, part) in branches.into_iter().zip(&partitions) {
                let (child, est) = prune_node(b.child, part, cf);
                subtree_est += est;
                pruned_branches.push(Branch {
                    values: b.values,
                    child,
                });
            }
            let largest = partitions
                .iter()
                .enumerate()
                .max_by(|(ai, a), (bi, b)| a.len().cmp(&b.len()).then(bi.cmp(ai)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let kept = TreeNode::Categorical {
                feature,
                branches: pruned_branches,
                default_branch,
            };
            finish_prune(kept, subtree_est, largest, records, cf)
        }
    }
}

/// Compares keeping the subtree against a majority leaf and against raising
/// the most-used branch.
fn finish_prune(
    kept: TreeNode,
    kept_est: f64,
    largest_branch: usize,
    records: &[&SiteRecord],
    cf: f64,
) -> (TreeNode, f64) {
    let (b, n) = class_counts(records);
    let majority = majority_label(b, n);
    let leaf_est = pessimistic_errors(misclassified(records, majority), records.len(), cf);

    let raised_child = match &kept {
        TreeNode::Threshold { le, gt, .. } => {
            if largest_branch == 0 {
                (**le).clone()
            } else {
                (**gt).clone()
            }
        }
        TreeNode::Categorical { branches, .. } => branches[largest_branch].child.clone(),
        TreeNode::Leaf { .. } => unreachable!(),
    };
    let (raised, raised_est) = match raised_child {
        TreeNode::Leaf { .. } => (None, f64::INFINITY),
        child => {
            let (node, est) = prune_node(child, records, cf);
            (Some(node), est)
        }
    };

    if leaf_est <= kept_est && leaf_est <= raised_est {
        (TreeNode::Leaf { class: majority }, leaf_est)
    } else if raised_est <= kept_est {
        (raised.expect("raised estimate is finite"), raised_est)
    } else {
        (kept, kept_est)
    }
}

/// Grows and prunes in one step.
pub fn learn(training: &TrainingSet, config: &LearnerConfig) -> DecisionTree {
    prune_tree(grow_tree(training, config), training, config)
}
