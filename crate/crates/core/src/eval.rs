//! Scoring segmentations against subject-derived gold labels.
//!
//! Every comparison reduces to the four-cell table of algorithm decisions
//! against gold labels, from which the information-retrieval metrics are
//! derived. Aggregation across narratives is macro by default (unweighted
//! mean of per-narrative scores, with a sample standard deviation), which
//! is how the per-narrative spread is reported; a pooled micro mode is
//! available for callers who want site-weighted totals.
//!
//! Cross-validation folds are whole narratives, so a fold's training and
//! test sites are disjoint by construction; each fold learns its tree from
//! scratch. Folds are independent and results are reduced with
//! permutation-invariant aggregation, so they may be computed in any order
//! or concurrently.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coder::{
    code_narrative, label_sites, CoderError, CueLexicon, GlobalProMode, Label, SiteRecord,
};
use crate::corpus::Narrative;
use crate::induce::{learn, FeatureSchema, InduceError, LearnerConfig, TrainingSet};
use crate::segmenter::{apply_tree, ApplyError, DecisionTree, Segmentation};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction has {predicted} sites but gold has {gold}")]
    LengthMismatch { predicted: usize, gold: usize },
    #[error("cannot score an empty confusion table")]
    EmptyCounts,
    #[error("no narratives to aggregate")]
    NoNarratives,
    #[error("cross-validation needs at least 2 folds, got {k}")]
    TooFewFolds { k: usize },
    #[error("{k} folds exceed the {n} available narratives")]
    FoldsExceedNarratives { k: usize, n: usize },
    #[error("narrative '{narrative}' has no per-subject boundary data")]
    PerSubjectDataMissing { narrative: String },
    #[error("narrative '{narrative}' has no sites to score")]
    EmptyNarrative { narrative: String },
    #[error(transparent)]
    Coder(#[from] CoderError),
    #[error(transparent)]
    Induce(#[from] InduceError),
    #[error(transparent)]
    Apply(#[from] ApplyError),
}

/// Site counts cross-tabulating algorithm decisions against gold labels:
/// `a` both boundary, `b` algorithm-only, `c` gold-only, `d` neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.a + self.b + self.c + self.d
    }

    /// Cell-wise sum, for pooled (micro) scoring.
    pub fn plus(&self, other: &ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            a: self.a + other.a,
            b: self.b + other.b,
            c: self.c + other.c,
            d: self.d + other.d,
        }
    }
}

/// Tabulates one predicted segmentation against gold labels.
pub fn confusion(predicted: &Segmentation, gold: &[Label]) -> Result<ConfusionCounts, EvalError> {
    if predicted.decisions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predicted: predicted.decisions.len(),
            gold: gold.len(),
        });
    }
    let mut counts = ConfusionCounts::default();
    for (p, g) in predicted.decisions.iter().zip(gold) {
        match (p, g) {
            (Label::Boundary, Label::Boundary) => counts.a += 1,
            (Label::Boundary, Label::NonBoundary) => counts.b += 1,
            (Label::NonBoundary, Label::Boundary) => counts.c += 1,
            (Label::NonBoundary, Label::NonBoundary) => counts.d += 1,
        }
    }
    Ok(counts)
}

/// The five evaluation metrics. Ideal values are recall 1, precision 1,
/// fallout 0, error 0, and summed deviation 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrScores {
    pub recall: f64,
    pub precision: f64,
    pub fallout: f64,
    pub error: f64,
    /// `(1 - recall) + (1 - precision) + fallout + error`, exactly.
    pub summed_deviation: f64,
}

pub const METRIC_NAMES: [&str; 5] = ["Recall", "Prec", "Fall", "Error", "SumDev"];

impl IrScores {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.recall,
            self.precision,
            self.fallout,
            self.error,
            self.summed_deviation,
        ]
    }

    pub fn from_array(values: [f64; 5]) -> IrScores {
        IrScores {
            recall: values[0],
            precision: values[1],
            fallout: values[2],
            error: values[3],
            summed_deviation: values[4],
        }
    }
}

/// Derives the metrics from a confusion table.
///
/// Zero-denominator conventions: recall is 1 when there are no gold
/// boundaries, precision is 1 when nothing was predicted, and fallout is 0
/// when there are no gold non-boundaries, so a correct empty prediction on
/// an empty gold set scores ideally.
pub fn metrics(counts: &ConfusionCounts) -> Result<IrScores, EvalError> {
    let ConfusionCounts { a, b, c, d } = *counts;
    let total = a + b + c + d;
    if total == 0 {
        return Err(EvalError::EmptyCounts);
    }
    let ratio = |num: usize, den: usize, empty: f64| {
        if den == 0 {
            empty
        } else {
            num as f64 / den as f64
        }
    };
    let recall = ratio(a, a + c, 1.0);
    let precision = ratio(a, a + b, 1.0);
    let fallout = ratio(b, b + d, 0.0);
    let error = (b + c) as f64 / total as f64;
    Ok(IrScores {
        recall,
        precision,
        fallout,
        error,
        summed_deviation: (1.0 - recall) + (1.0 - precision) + fallout + error,
    })
}

/// Per-narrative scores with their macro average and sample standard
/// deviation.
///
/// `mean` averages each metric over narratives; by linearity its summed
/// deviation still satisfies the defining identity. `std_dev` is a row of
/// per-metric spreads (n-1 denominator, 0 for a single narrative), matching
/// how per-narrative variability is conventionally reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub per_narrative: Vec<(String, IrScores)>,
    pub mean: IrScores,
    pub std_dev: IrScores,
}

/// Sums in sorted order so aggregation is exactly permutation-invariant.
fn stable_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Macro-averages per-narrative scores.
pub fn aggregate(scores: &[(String, IrScores)]) -> Result<AggregateReport, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::NoNarratives);
    }
    let n = scores.len();
    let mut mean = [0.0; 5];
    let mut std_dev = [0.0; 5];
    for m in 0..5 {
        let mut values: Vec<f64> = scores.iter().map(|(_, s)| s.as_array()[m]).collect();
        mean[m] = stable_mean(&mut values);
        if n > 1 {
            let mut squares: Vec<f64> = values.iter().map(|v| (v - mean[m]).powi(2)).collect();
            squares.sort_by(f64::total_cmp);
            std_dev[m] = (squares.iter().sum::<f64>() / (n - 1) as f64).sqrt();
        }
    }
    Ok(AggregateReport {
        per_narrative: scores.to_vec(),
        mean: IrScores::from_array(mean),
        std_dev: IrScores::from_array(std_dev),
    })
}

/// Pooled (micro) scoring: sums the confusion cells over narratives and
/// derives one set of metrics from the totals.
pub fn pooled_metrics<'a, I>(counts: I) -> Result<IrScores, EvalError>
where
    I: IntoIterator<Item = &'a ConfusionCounts>,
{
    let total = counts
        .into_iter()
        .fold(ConfusionCounts::default(), |acc, c| acc.plus(c));
    metrics(&total)
}

/// Scores every segmentation against its narrative's gold labels and
/// macro-aggregates the result. Segmentations are matched to narratives by
/// id, in segmentation order.
pub fn score_segmentations(
    segmentations: &[Segmentation],
    narratives: &[Narrative],
    threshold: u32,
) -> Result<AggregateReport, EvalError> {
    let mut scores = Vec::new();
    for seg in segmentations {
        let narrative = narratives
            .iter()
            .find(|n| n.id == seg.narrative_id)
            .ok_or_else(|| EvalError::EmptyNarrative {
                narrative: seg.narrative_id.clone(),
            })?;
        let gold = label_sites(&narrative.subjects, threshold)?;
        let counts = confusion(seg, &gold)?;
        scores.push((seg.narrative_id.clone(), metrics(&counts)?));
    }
    aggregate(&scores)
}

/// Per-subject scoring of the humans against the majority gold labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanPerformance {
    /// For each narrative, one score row per subject.
    pub per_subject: Vec<(String, Vec<IrScores>)>,
    /// Per-narrative subject averages, aggregated across narratives.
    pub report: AggregateReport,
}

/// Treats each subject's marks as a predicted segmentation against the
/// majority gold labels, scores every subject, and averages over subjects
/// and narratives. Requires sidecars with per-subject boundary sets.
pub fn human_performance(
    narratives: &[Narrative],
    threshold: u32,
) -> Result<HumanPerformance, EvalError> {
    if narratives.is_empty() {
        return Err(EvalError::NoNarratives);
    }
    let mut per_subject = Vec::new();
    let mut per_narrative = Vec::new();
    for narrative in narratives {
        let sets = narrative.subjects.per_subject.as_ref().ok_or_else(|| {
            EvalError::PerSubjectDataMissing {
                narrative: narrative.id.clone(),
            }
        })?;
        let gold = label_sites(&narrative.subjects, threshold)?;
        let mut subject_scores = Vec::with_capacity(sets.len());
        for marks in sets {
            let sites: Vec<usize> = marks.iter().copied().collect();
            let seg =
                Segmentation::from_boundary_sites(&narrative.id, narrative.site_count(), &sites);
            subject_scores.push(metrics(&confusion(&seg, &gold)?)?);
        }
        let mut averaged = [0.0; 5];
        for (m, slot) in averaged.iter_mut().enumerate() {
            let mut values: Vec<f64> = subject_scores.iter().map(|s| s.as_array()[m]).collect();
            *slot = stable_mean(&mut values);
        }
        per_narrative.push((narrative.id.clone(), IrScores::from_array(averaged)));
        per_subject.push((narrative.id.clone(), subject_scores));
    }
    Ok(HumanPerformance {
        per_subject,
        report: aggregate(&per_narrative)?,
    })
}

/// One cross-validation fold: the tree learned from the training
/// narratives and the scores of the held-out narratives.
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub tree: DecisionTree,
    pub scores: Vec<(String, IrScores)>,
}

#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub folds: Vec<FoldResult>,
    /// Macro aggregation of every held-out narrative's scores.
    pub report: AggregateReport,
}

/// Splits indices into `k` contiguous groups, the first `len % k` groups
/// one larger.
fn fold_groups(len: usize, k: usize) -> Vec<Vec<usize>> {
    let base = len / k;
    let extra = len % k;
    let mut groups = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        groups.push((start..start + size).collect());
        start += size;
    }
    groups
}

/// Grouped cross-validation: folds are whole narratives, each fold trains
/// a fresh tree on the remaining narratives and scores the held-out ones.
/// With `k` equal to the narrative count this is leave-one-narrative-out.
pub fn cross_validate(
    narratives: &[Narrative],
    lexicon: &CueLexicon,
    threshold: u32,
    global_pro_mode: GlobalProMode,
    learner: &LearnerConfig,
    k: usize,
) -> Result<CrossValidation, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds { k });
    }
    if k > narratives.len() {
        return Err(EvalError::FoldsExceedNarratives {
            k,
            n: narratives.len(),
        });
    }
    for n in narratives {
        if n.site_count() == 0 {
            return Err(EvalError::EmptyNarrative {
                narrative: n.id.clone(),
            });
        }
    }

    let schema = FeatureSchema::with_lexicon(lexicon);
    let coded: Vec<Vec<SiteRecord>> = narratives
        .iter()
        .map(|n| code_narrative(n, lexicon, threshold, global_pro_mode))
        .collect::<Result<_, _>>()?;

    let groups = fold_groups(narratives.len(), k);
    let mut folds = Vec::with_capacity(k);
    let mut all_scores = Vec::new();
    for (fold_no, test_group) in groups.iter().enumerate() {
        let is_test = |i: usize| test_group.contains(&i);
        let train_ids: Vec<String> = (0..narratives.len())
            .filter(|&i| !is_test(i))
            .map(|i| narratives[i].id.clone())
            .collect();
        let test_ids: Vec<String> = test_group
            .iter()
            .map(|&i| narratives[i].id.clone())
            .collect();
        debug_assert!(train_ids.iter().all(|id| !test_ids.contains(id)));

        let train_records: Vec<SiteRecord> = (0..narratives.len())
            .filter(|&i| !is_test(i))
            .flat_map(|i| coded[i].iter().cloned())
            .collect();
        let training = TrainingSet::new(train_records, schema.clone())?;
        let tree = learn(&training, learner);

        let mut scores = Vec::new();
        for &i in test_group {
            let gold = label_sites(&narratives[i].subjects, threshold)?;
            let seg = apply_tree(&tree, &coded[i])?;
            scores.push((narratives[i].id.clone(), metrics(&confusion(&seg, &gold)?)?));
        }
        all_scores.extend(scores.iter().cloned());
        folds.push(FoldResult {
            fold: fold_no + 1,
            train_ids,
            test_ids,
            tree,
            scores,
        });
    }

    Ok(CrossValidation {
        folds,
        report: aggregate(&all_scores)?,
    })
}

/// Formats a metric the way the result tables print them: two decimals,
/// no leading zero.
pub fn format_metric(v: f64) -> String {
    let s = format!("{v:.2}");
    match s.strip_prefix("0.") {
        Some(frac) => format!(".{frac}"),
        None => s,
    }
}

/// Renders rows of metric values as an aligned text table with the
/// standard column order.
pub fn render_metric_table(title: &str, rows: &[(String, IrScores)]) -> String {
    let label_width = rows
        .iter()
        .map(|(l, _)| l.len())
        .chain(std::iter::once(title.len()))
        .max()
        .unwrap_or(0)
        .max(12);
    let mut out = format!("{title:<label_width$}");
    for name in METRIC_NAMES {
        out.push_str(&format!(" {name:>7}"));
    }
    out.push('\n');
    for (label, scores) in rows {
        out.push_str(&format!("{label:<label_width$}"));
        for v in scores.as_array() {
            out.push_str(&format!(" {:>7}", format_metric(v)));
        }
        out.push('\n');
    }
    out
}
