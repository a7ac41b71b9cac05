//! Decision-tree representation shared by the builtin classifier, learned
//! trees, and the tree file formats.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coder::{FeatureId, FeatureVector, Label};

/// One branch of a categorical split: the set of feature values it covers
/// and the subtree they descend into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub values: BTreeSet<String>,
    pub child: TreeNode,
}

/// A node: a class leaf, a categorical test with one branch per value
/// group, or a threshold test on the continuous duration feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    #[serde(rename = "leaf")]
    Leaf { class: Label },
    #[serde(rename = "categorical")]
    Categorical {
        feature: FeatureId,
        branches: Vec<Branch>,
        /// Branch taken for values outside every branch set (typically the
        /// majority branch of the training data). `None` makes such values
        /// a classification error.
        default_branch: Option<usize>,
    },
    #[serde(rename = "threshold")]
    Threshold {
        feature: FeatureId,
        threshold: f64,
        le: Box<TreeNode>,
        gt: Box<TreeNode>,
    },
}

/// A decision tree over site feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
}

/// A feature value the tree has no branch for.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("feature {feature} has value '{value}' outside the tree's declared domain", feature = .feature.name())]
pub struct DomainError {
    pub feature: FeatureId,
    pub value: String,
}

/// Structural problems found by [`DecisionTree::validate`].
#[derive(Debug, Error)]
pub enum TreeError {
    #[error("threshold tests are only defined for duration, not {}", .0.name())]
    ThresholdOnCategorical(FeatureId),
    #[error("categorical test on the continuous feature duration")]
    CategoricalOnContinuous,
    #[error("threshold {0} is not finite")]
    NonFiniteThreshold(f64),
    #[error("categorical split on {} has no branches", .0.name())]
    NoBranches(FeatureId),
    #[error("branch value sets on {} overlap at '{1}'", .0.name())]
    OverlappingBranches(FeatureId, String),
    #[error("empty value set in a branch on {}", .0.name())]
    EmptyBranch(FeatureId),
    #[error("default branch index {index} out of range for {} ({count} branches)", .feature.name())]
    BadDefaultIndex {
        feature: FeatureId,
        index: usize,
        count: usize,
    },
    #[error("feature {} tested twice with an identical test on one path", .0.name())]
    RepeatedTest(FeatureId),
}

impl DecisionTree {
    pub fn leaf(class: Label) -> Self {
        DecisionTree {
            root: TreeNode::Leaf { class },
        }
    }

    /// Classifies one feature vector by root-to-leaf descent.
    pub fn classify(&self, features: &FeatureVector) -> Result<Label, DomainError> {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { class } => return Ok(*class),
                TreeNode::Categorical {
                    feature,
                    branches,
                    default_branch,
                } => {
                    let value = features
                        .categorical(*feature)
                        .expect("categorical test on continuous feature");
                    let hit = branches.iter().find(|b| b.values.contains(value.as_ref()));
                    node = match hit {
                        Some(branch) => &branch.child,
                        None => match default_branch.and_then(|i| branches.get(i)) {
                            Some(branch) => &branch.child,
                            None => {
                                return Err(DomainError {
                                    feature: *feature,
                                    value: value.into_owned(),
                                })
                            }
                        },
                    };
                }
                TreeNode::Threshold {
                    feature,
                    threshold,
                    le,
                    gt,
                } => {
                    let value = features
                        .numeric(*feature)
                        .expect("threshold test on categorical feature");
                    node = if value <= *threshold { le } else { gt };
                }
            }
        }
    }

    /// Checks the structural invariants: thresholds only on duration and
    /// finite, branch sets non-empty and disjoint, default indices valid,
    /// and no identical test repeated along a root-to-leaf path.
    pub fn validate(&self) -> Result<(), TreeError> {
        fn walk(node: &TreeNode, path: &mut Vec<String>) -> Result<(), TreeError> {
            match node {
                TreeNode::Leaf { .. } => Ok(()),
                TreeNode::Categorical {
                    feature,
                    branches,
                    default_branch,
                } => {
                    if feature.is_continuous() {
                        return Err(TreeError::CategoricalOnContinuous);
                    }
                    if branches.is_empty() {
                        return Err(TreeError::NoBranches(*feature));
                    }
                    let mut seen = BTreeSet::new();
                    for b in branches {
                        if b.values.is_empty() {
                            return Err(TreeError::EmptyBranch(*feature));
                        }
                        for v in &b.values {
                            if !seen.insert(v.clone()) {
                                return Err(TreeError::OverlappingBranches(*feature, v.clone()));
                            }
                        }
                    }
                    if let Some(i) = default_branch {
                        if *i >= branches.len() {
                            return Err(TreeError::BadDefaultIndex {
                                feature: *feature,
                                index: *i,
                                count: branches.len(),
                            });
                        }
                    }
                    let signature = format!(
                        "{}:{}",
                        feature.name(),
                        branches
                            .iter()
                            .map(|b| b.values.iter().cloned().collect::<Vec<_>>().join(","))
                            .collect::<Vec<_>>()
                            .join("|")
                    );
                    if path.contains(&signature) {
                        return Err(TreeError::RepeatedTest(*feature));
                    }
                    path.push(signature);
                    for b in branches {
                        walk(&b.child, path)?;
                    }
                    path.pop();
                    Ok(())
                }
                TreeNode::Threshold {
                    feature,
                    threshold,
                    le,
                    gt,
                } => {
                    if !feature.is_continuous() {
                        return Err(TreeError::ThresholdOnCategorical(*feature));
                    }
                    if !threshold.is_finite() {
                        return Err(TreeError::NonFiniteThreshold(*threshold));
                    }
                    let signature = format!("{}<={}", feature.name(), threshold);
                    if path.contains(&signature) {
                        return Err(TreeError::RepeatedTest(*feature));
                    }
                    path.push(signature);
                    walk(le, path)?;
                    walk(gt, path)?;
                    path.pop();
                    Ok(())
                }
            }
        }
        walk(&self.root, &mut Vec::new())
    }

    pub fn node_count(&self) -> usize {
        fn count(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Categorical { branches, .. } => {
                    1 + branches.iter().map(|b| count(&b.child)).sum::<usize>()
                }
                TreeNode::Threshold { le, gt, .. } => 1 + count(le) + count(gt),
            }
        }
        count(&self.root)
    }

    /// Every feature tested anywhere in the tree.
    pub fn features_used(&self) -> BTreeSet<FeatureId> {
        fn collect(node: &TreeNode, acc: &mut BTreeSet<FeatureId>) {
            match node {
                TreeNode::Leaf { .. } => {}
                TreeNode::Categorical {
                    feature, branches, ..
                } => {
                    acc.insert(*feature);
                    for b in branches {
                        collect(&b.child, acc);
                    }
                }
                TreeNode::Threshold {
                    feature, le, gt, ..
                } => {
                    acc.insert(*feature);
                    collect(le, acc);
                    collect(gt, acc);
                }
            }
        }
        let mut acc = BTreeSet::new();
        collect(&self.root, &mut acc);
        acc
    }

    /// Rewrites every grouped categorical branch into one branch per value,
    /// duplicating subtrees. Classification behaviour is unchanged; the
    /// default branch follows the group it belonged to.
    pub fn expand_grouped(&self) -> DecisionTree {
        fn expand(node: &TreeNode) -> TreeNode {
            match node {
                TreeNode::Leaf { class } => TreeNode::Leaf { class: *class },
                TreeNode::Threshold {
                    feature,
                    threshold,
                    le,
                    gt,
                } => TreeNode::Threshold {
                    feature: *feature,
                    threshold: *threshold,
                    le: Box::new(expand(le)),
                    gt: Box::new(expand(gt)),
                },
                TreeNode::Categorical {
                    feature,
                    branches,
                    default_branch,
                } => {
                    let mut expanded = Vec::new();
                    let mut new_default = None;
                    for (i, b) in branches.iter().enumerate() {
                        let child = expand(&b.child);
                        let first_of_group = expanded.len();
                        for v in &b.values {
                            expanded.push(Branch {
                                values: BTreeSet::from([v.clone()]),
                                child: child.clone(),
                            });
                        }
                        if *default_branch == Some(i) {
                            new_default = Some(first_of_group);
                        }
                    }
                    TreeNode::Categorical {
                        feature: *feature,
                        branches: expanded,
                        default_branch: new_default,
                    }
                }
            }
        }
        DecisionTree {
            root: expand(&self.root),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(class: Label) -> TreeNode {
        TreeNode::Leaf { class }
    }

    fn two_way(
        feature: FeatureId,
        a: &str,
        a_child: TreeNode,
        b: &str,
        b_child: TreeNode,
    ) -> TreeNode {
        TreeNode::Categorical {
            feature,
            branches: vec![
                Branch {
                    values: BTreeSet::from([a.to_string()]),
                    child: a_child,
                },
                Branch {
                    values: BTreeSet::from([b.to_string()]),
                    child: b_child,
                },
            ],
            default_branch: Some(0),
        }
    }

    #[test]
    fn validate_rejects_overlapping_branches() {
        let tree = DecisionTree {
            root: two_way(
                FeatureId::Pause,
                "true",
                leaf(Label::Boundary),
                "true",
                leaf(Label::NonBoundary),
            ),
        };
        assert!(matches!(
            tree.validate(),
            Err(TreeError::OverlappingBranches(FeatureId::Pause, _))
        ));
    }

    #[test]
    fn validate_rejects_threshold_on_categorical() {
        let tree = DecisionTree {
            root: TreeNode::Threshold {
                feature: FeatureId::Pause,
                threshold: 0.5,
                le: Box::new(leaf(Label::Boundary)),
                gt: Box::new(leaf(Label::NonBoundary)),
            },
        };
        assert!(matches!(
            tree.validate(),
            Err(TreeError::ThresholdOnCategorical(FeatureId::Pause))
        ));
    }

    #[test]
    fn expand_preserves_classification() {
        let tree = DecisionTree {
            root: TreeNode::Categorical {
                feature: FeatureId::Word1,
                branches: vec![
                    Branch {
                        values: BTreeSet::from(["and".to_string(), "but".to_string()]),
                        child: leaf(Label::Boundary),
                    },
                    Branch {
                        values: BTreeSet::from(["NA".to_string()]),
                        child: leaf(Label::NonBoundary),
                    },
                ],
                default_branch: Some(1),
            },
        };
        let expanded = tree.expand_grouped();
        expanded.validate().unwrap();
        if let TreeNode::Categorical {
            branches,
            default_branch,
            ..
        } = &expanded.root
        {
            assert_eq!(branches.len(), 3);
            assert!(branches.iter().all(|b| b.values.len() == 1));
            assert_eq!(*default_branch, Some(2));
        } else {
            panic!("expected categorical root");
        }
    }
}
