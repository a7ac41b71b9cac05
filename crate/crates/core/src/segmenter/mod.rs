//! Segmentation algorithms: the two hand-built noun-phrase rules and
//! decision-tree classification.
//!
//! The rule algorithms are sequential within a narrative because
//! `global.pro` is judged against the last boundary the algorithm itself
//! assigned; distinct narratives are independent. Trees are immutable once
//! built and classification is a pure function, so tree application can be
//! parallelized across narratives freely.

mod fig7;
mod text;
mod tree;

pub use fig7::builtin_fig7_tree;
pub use text::{
    parse_tree_canonical, parse_tree_text, serialize_tree_canonical, serialize_tree_text,
    TreeFormatError,
};
pub use tree::{Branch, DecisionTree, DomainError, TreeError, TreeNode};

use thiserror::Error;

use crate::coder::{scan_sites, CueLexicon, CueProsody, FeatureVector, Label, NpValue, SiteRecord};
use crate::corpus::Narrative;

/// A boundary/non-boundary decision for every site of one narrative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub narrative_id: String,
    pub decisions: Vec<Label>,
}

impl Segmentation {
    /// 1-based indices of the sites classified as boundaries.
    pub fn boundary_sites(&self) -> Vec<usize> {
        self.decisions
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == Label::Boundary)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Builds a segmentation from boundary site indices.
    pub fn from_boundary_sites(
        narrative_id: impl Into<String>,
        site_count: usize,
        boundaries: &[usize],
    ) -> Self {
        let mut decisions = vec![Label::NonBoundary; site_count];
        for &s in boundaries {
            if s >= 1 && s <= site_count {
                decisions[s - 1] = Label::Boundary;
            }
        }
        Segmentation {
            narrative_id: narrative_id.into(),
            decisions,
        }
    }
}

/// The baseline noun-phrase condition: boundary iff all three NP features
/// are the minus value. `NA` never fires the rule.
pub fn np_rule1(features: &FeatureVector) -> Label {
    if features.coref == NpValue::Minus
        && features.infer == NpValue::Minus
        && features.global_pro == NpValue::Minus
    {
        Label::Boundary
    } else {
        Label::NonBoundary
    }
}

/// The tuned condition: as the baseline, but a `complex` cue-prosody value
/// also assigns a boundary.
pub fn np_rule2(features: &FeatureVector) -> Label {
    if np_rule1(features) == Label::Boundary || features.cue_prosody == CueProsody::Complex {
        Label::Boundary
    } else {
        Label::NonBoundary
    }
}

/// Runs the baseline noun-phrase algorithm over a narrative.
///
/// Sites are processed left to right; `global.pro` at each site is judged
/// against the last boundary this run has assigned so far.
pub fn np_condition1(narrative: &Narrative) -> Segmentation {
    run_rule(narrative, &CueLexicon::builtin(), np_rule1)
}

/// Runs the tuned algorithm. The sequential `global.pro` state advances on
/// every assigned boundary, whichever branch of the rule fired.
pub fn np_condition2(narrative: &Narrative, lexicon: &CueLexicon) -> Segmentation {
    run_rule(narrative, lexicon, np_rule2)
}

fn run_rule(
    narrative: &Narrative,
    lexicon: &CueLexicon,
    rule: fn(&FeatureVector) -> Label,
) -> Segmentation {
    let mut decisions = Vec::with_capacity(narrative.site_count());
    scan_sites(narrative, lexicon, |_, fv| {
        let d = rule(fv);
        decisions.push(d);
        d
    });
    Segmentation {
        narrative_id: narrative.id.clone(),
        decisions,
    }
}

#[derive(Debug, Error)]
pub enum ApplyError {
    #[error("no site records to classify")]
    Empty,
    #[error("records mix narratives '{first}' and '{second}'")]
    MixedNarratives { first: String, second: String },
    #[error("narrative '{narrative}' site {site}: {source}")]
    Domain {
        narrative: String,
        site: usize,
        #[source]
        source: DomainError,
    },
}

/// Classifies every record of one narrative with a decision tree.
pub fn apply_tree(tree: &DecisionTree, records: &[SiteRecord]) -> Result<Segmentation, ApplyError> {
    let first = records.first().ok_or(ApplyError::Empty)?;
    let narrative_id = first.narrative_id.clone();
    let mut decisions = Vec::with_capacity(records.len());
    for r in records {
        if r.narrative_id != narrative_id {
            return Err(ApplyError::MixedNarratives {
                first: narrative_id,
                second: r.narrative_id.clone(),
            });
        }
        let class = tree
            .classify(&r.features)
            .map_err(|source| ApplyError::Domain {
                narrative: r.narrative_id.clone(),
                site: r.site_index,
                source,
            })?;
        decisions.push(class);
    }
    Ok(Segmentation {
        narrative_id,
        decisions,
    })
}

/// Classifies records spanning several narratives, grouping by id in input
/// order.
pub fn apply_tree_grouped(
    tree: &DecisionTree,
    records: &[SiteRecord],
) -> Result<Vec<Segmentation>, ApplyError> {
    let mut out: Vec<Segmentation> = Vec::new();
    let mut start = 0;
    for i in 0..=records.len() {
        let split = i == records.len()
            || (i > start && records[i].narrative_id != records[start].narrative_id);
        if split {
            if i > start {
                out.push(apply_tree(tree, &records[start..i])?);
            }
            start = i;
        }
    }
    Ok(out)
}

/// Writes segmentations in the per-narrative boundary-index format.
pub fn write_segmentations(segmentations: &[Segmentation], header: &[(String, String)]) -> String {
    let mut out = String::from("# disseg segmentation\n");
    for (k, v) in header {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    for s in segmentations {
        out.push_str(&format!(
            "NARRATIVE {} {}\n",
            s.narrative_id,
            s.decisions.len()
        ));
        let sites: Vec<String> = s.boundary_sites().iter().map(|i| i.to_string()).collect();
        out.push_str("BOUNDARIES");
        if !sites.is_empty() {
            out.push(' ');
            out.push_str(&sites.join(" "));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum SegmentationFormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// Reads segmentations written by [`write_segmentations`].
pub fn read_segmentations(source: &str) -> Result<Vec<Segmentation>, SegmentationFormatError> {
    let syntax = |line: usize, msg: &str| SegmentationFormatError::Syntax {
        line,
        msg: msg.to_string(),
    };
    let mut out = Vec::new();
    let mut current: Option<(String, usize, usize)> = None; // id, sites, line
    for (line_no, raw) in source.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "NARRATIVE" => {
                if current.is_some() {
                    return Err(syntax(
                        line_no,
                        "NARRATIVE without BOUNDARIES for the previous one",
                    ));
                }
                if fields.len() != 3 {
                    return Err(syntax(line_no, "expected: NARRATIVE <id> <n_sites>"));
                }
                let n: usize = fields[2]
                    .parse()
                    .map_err(|_| syntax(line_no, "site count must be an integer"))?;
                current = Some((fields[1].to_string(), n, line_no));
            }
            "BOUNDARIES" => {
                let (id, n, _) = current
                    .take()
                    .ok_or_else(|| syntax(line_no, "BOUNDARIES before NARRATIVE"))?;
                let mut sites = Vec::new();
                for f in &fields[1..] {
                    let s: usize = f
                        .parse()
                        .map_err(|_| syntax(line_no, "boundary sites must be integers"))?;
                    if s < 1 || s > n {
                        return Err(syntax(line_no, "boundary site out of range"));
                    }
                    sites.push(s);
                }
                out.push(Segmentation::from_boundary_sites(id, n, &sites));
            }
            other => {
                return Err(SegmentationFormatError::Syntax {
                    line: line_no,
                    msg: format!("unrecognized record '{other}'"),
                })
            }
        }
    }
    if current.is_some() {
        return Err(syntax(0, "NARRATIVE record without BOUNDARIES"));
    }
    Ok(out)
}
