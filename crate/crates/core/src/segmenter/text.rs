//! Tree file formats.
//!
//! Two representations round-trip losslessly:
//!
//! * an indented `if`/`elseif` text format meant for human eyes, one branch
//!   per line, two spaces of indentation per level;
//! * a canonical JSON encoding of the tree structure for tools.
//!
//! ```text
//! if before = -sfc then non-boundary
//! elseif before = +sfc then
//!   if coref = NA then non-boundary
//!   elseif coref = +coref then
//!     if duration <= 1.3 then non-boundary
//!     elseif duration > 1.3 then boundary
//!   elseif coref = -coref then
//!     if word1 in {anyway,but,now,or,then} (default) then boundary
//!     elseif word1 = and then non-boundary
//! ```
//!
//! `(default)` marks the branch that absorbs feature values not listed in
//! any branch of the split.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::coder::{FeatureId, Label};
use crate::segmenter::tree::{Branch, DecisionTree, TreeNode};

#[derive(Debug, Error)]
pub enum TreeFormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("tree text is empty")]
    Empty,
    #[error("canonical tree: {0}")]
    Json(#[from] serde_json::Error),
}

fn err(line: usize, msg: impl Into<String>) -> TreeFormatError {
    TreeFormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

const INDENT: usize = 2;

/// Serializes a tree in the indented text format.
pub fn serialize_tree_text(tree: &DecisionTree) -> String {
    let mut out = String::new();
    match &tree.root {
        TreeNode::Leaf { class } => {
            out.push_str(class.as_str());
            out.push('\n');
        }
        node => write_node(node, 0, &mut out),
    }
    out
}

fn write_node(node: &TreeNode, depth: usize, out: &mut String) {
    let pad = " ".repeat(depth * INDENT);
    match node {
        TreeNode::Leaf { .. } => unreachable!("leaves are written inline"),
        TreeNode::Categorical {
            feature,
            branches,
            default_branch,
        } => {
            for (i, b) in branches.iter().enumerate() {
                let keyword = if i == 0 { "if" } else { "elseif" };
                let condition = if b.values.len() == 1 {
                    format!("{} = {}", feature.name(), b.values.iter().next().unwrap())
                } else {
                    let values: Vec<&str> = b.values.iter().map(|s| s.as_str()).collect();
                    format!("{} in {{{}}}", feature.name(), values.join(","))
                };
                let marker = if *default_branch == Some(i) {
                    " (default)"
                } else {
                    ""
                };
                write_branch_tail(out, &pad, keyword, &condition, marker, &b.child, depth);
            }
        }
        TreeNode::Threshold {
            feature,
            threshold,
            le,
            gt,
        } => {
            write_branch_tail(
                out,
                &pad,
                "if",
                &format!("{} <= {}", feature.name(), threshold),
                "",
                le,
                depth,
            );
            write_branch_tail(
                out,
                &pad,
                "elseif",
                &format!("{} > {}", feature.name(), threshold),
                "",
                gt,
                depth,
            );
        }
    }
}

fn write_branch_tail(
    out: &mut String,
    pad: &str,
    keyword: &str,
    condition: &str,
    marker: &str,
    child: &TreeNode,
    depth: usize,
) {
    match child {
        TreeNode::Leaf { class } => {
            out.push_str(&format!(
                "{pad}{keyword} {condition}{marker} then {}\n",
                class.as_str()
            ));
        }
        _ => {
            out.push_str(&format!("{pad}{keyword} {condition}{marker} then\n"));
            write_node(child, depth + 1, out);
        }
    }
}

#[derive(Debug)]
struct SourceLine {
    number: usize,
    indent: usize,
    text: String,
}

#[derive(Debug, PartialEq)]
enum Condition {
    Values(BTreeSet<String>),
    Le(f64),
    Gt(f64),
}

#[derive(Debug)]
struct ParsedBranch {
    feature: FeatureId,
    condition: Condition,
    default: bool,
    child: TreeNode,
}

/// Parses the indented text format back into a tree.
pub fn parse_tree_text(source: &str) -> Result<DecisionTree, TreeFormatError> {
    let lines: Vec<SourceLine> = source
        .lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let text = raw.trim_end();
            let trimmed = text.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                return None;
            }
            Some(SourceLine {
                number: i + 1,
                indent: text.len() - trimmed.len(),
                text: trimmed.to_string(),
            })
        })
        .collect();
    if lines.is_empty() {
        return Err(TreeFormatError::Empty);
    }
    // A lone class name is a single-leaf tree.
    if lines.len() == 1 {
        if let Some(class) = Label::parse(&lines[0].text) {
            return Ok(DecisionTree::leaf(class));
        }
    }
    let mut pos = 0;
    let root = parse_node(&lines, &mut pos, lines[0].indent)?;
    if pos != lines.len() {
        return Err(err(lines[pos].number, "trailing content after the tree"));
    }
    let tree = DecisionTree { root };
    tree.validate()
        .map_err(|e| err(0, format!("invalid tree: {e}")))?;
    Ok(tree)
}

fn parse_node(
    lines: &[SourceLine],
    pos: &mut usize,
    indent: usize,
) -> Result<TreeNode, TreeFormatError> {
    let mut branches: Vec<ParsedBranch> = Vec::new();
    while *pos < lines.len() && lines[*pos].indent == indent {
        let line = &lines[*pos];
        let expected_keyword = if branches.is_empty() { "if" } else { "elseif" };
        let rest = match line.text.split_once(' ') {
            Some((kw, rest)) if kw == expected_keyword => rest,
            Some((kw, _)) if kw == "if" || kw == "elseif" => {
                if branches.is_empty() {
                    return Err(err(line.number, "branch list must start with 'if'"));
                }
                break; // an 'if' at this indent would start a sibling node, which has no parent branch
            }
            _ => {
                return Err(err(
                    line.number,
                    format!("expected '{expected_keyword} ...'"),
                ))
            }
        };
        *pos += 1;
        let branch = parse_branch_line(rest, line.number)?;
        let branch = match branch {
            (feature, condition, default, Some(class)) => ParsedBranch {
                feature,
                condition,
                default,
                child: TreeNode::Leaf { class },
            },
            (feature, condition, default, None) => {
                if *pos >= lines.len() || lines[*pos].indent <= indent {
                    return Err(err(
                        line.number,
                        "expected an indented subtree after 'then'",
                    ));
                }
                let child_indent = lines[*pos].indent;
                let child = parse_node(lines, pos, child_indent)?;
                ParsedBranch {
                    feature,
                    condition,
                    default,
                    child,
                }
            }
        };
        branches.push(branch);
    }
    assemble_node(branches, lines, *pos)
}

type BranchParts = (FeatureId, Condition, bool, Option<Label>);

fn parse_branch_line(rest: &str, line: usize) -> Result<BranchParts, TreeFormatError> {
    let rest = rest.trim();
    let (feature_name, rest) = rest
        .split_once(' ')
        .ok_or_else(|| err(line, "expected a feature name"))?;
    let feature = FeatureId::parse(feature_name)
        .ok_or_else(|| err(line, format!("unknown feature '{feature_name}'")))?;
    let rest = rest.trim_start();

    let (condition, tail) = if let Some(body) = rest.strip_prefix("in") {
        let body = body.trim_start();
        if !body.starts_with('{') {
            return Err(err(line, "expected '{' after 'in'"));
        }
        let close = body
            .find('}')
            .ok_or_else(|| err(line, "unterminated value set"))?;
        let values: BTreeSet<String> = body[1..close]
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(err(line, "empty value set"));
        }
        (Condition::Values(values), body[close + 1..].trim_start())
    } else if let Some(body) = rest.strip_prefix("<=") {
        let (value, tail) = take_token(body.trim_start());
        let t: f64 = value
            .parse()
            .map_err(|_| err(line, format!("bad threshold '{value}'")))?;
        (Condition::Le(t), tail)
    } else if let Some(body) = rest.strip_prefix('>') {
        let (value, tail) = take_token(body.trim_start());
        let t: f64 = value
            .parse()
            .map_err(|_| err(line, format!("bad threshold '{value}'")))?;
        (Condition::Gt(t), tail)
    } else if let Some(body) = rest.strip_prefix('=') {
        let (value, tail) = take_token(body.trim_start());
        if value.is_empty() {
            return Err(err(line, "expected a value after '='"));
        }
        (Condition::Values(BTreeSet::from([value.to_string()])), tail)
    } else {
        return Err(err(line, "expected '=', 'in', '<=' or '>'"));
    };

    if matches!(condition, Condition::Le(_) | Condition::Gt(_)) && !feature.is_continuous() {
        return Err(err(line, "thresholds are only defined for duration"));
    }
    if matches!(condition, Condition::Values(_)) && feature.is_continuous() {
        return Err(err(line, "duration requires a threshold test"));
    }

    let mut tail = tail.trim_start();
    let default = if let Some(after) = tail.strip_prefix("(default)") {
        tail = after.trim_start();
        true
    } else {
        false
    };
    let tail = tail
        .strip_prefix("then")
        .ok_or_else(|| err(line, "expected 'then'"))?
        .trim();
    let class = if tail.is_empty() {
        None
    } else {
        Some(Label::parse(tail).ok_or_else(|| err(line, format!("unknown class '{tail}'")))?)
    };
    Ok((feature, condition, default, class))
}

fn take_token(s: &str) -> (&str, &str) {
    match s.split_once(char::is_whitespace) {
        Some((tok, rest)) => (tok, rest),
        None => (s, ""),
    }
}

fn assemble_node(
    branches: Vec<ParsedBranch>,
    lines: &[SourceLine],
    pos: usize,
) -> Result<TreeNode, TreeFormatError> {
    let last_line = if pos > 0 && pos <= lines.len() {
        lines[pos - 1].number
    } else {
        0
    };
    if branches.is_empty() {
        return Err(err(last_line, "empty branch list"));
    }
    let feature = branches[0].feature;
    if branches.iter().any(|b| b.feature != feature) {
        return Err(err(
            last_line,
            "all branches of a node must test one feature",
        ));
    }

    let thresholds = branches
        .iter()
        .all(|b| matches!(b.condition, Condition::Le(_) | Condition::Gt(_)));
    if thresholds {
        if branches.len() != 2 {
            return Err(err(
                last_line,
                "a threshold test needs exactly two branches",
            ));
        }
        let mut le = None;
        let mut gt = None;
        let mut t_le = f64::NAN;
        let mut t_gt = f64::NAN;
        for b in branches {
            match b.condition {
                Condition::Le(t) => {
                    t_le = t;
                    le = Some(b.child);
                }
                Condition::Gt(t) => {
                    t_gt = t;
                    gt = Some(b.child);
                }
                Condition::Values(_) => unreachable!(),
            }
        }
        let (le, gt) = match (le, gt) {
            (Some(le), Some(gt)) => (le, gt),
            _ => return Err(err(last_line, "need one '<=' and one '>' branch")),
        };
        if t_le != t_gt {
            return Err(err(
                last_line,
                format!("branch thresholds disagree: {t_le} vs {t_gt}"),
            ));
        }
        return Ok(TreeNode::Threshold {
            feature,
            threshold: t_le,
            le: Box::new(le),
            gt: Box::new(gt),
        });
    }

    let mut out = Vec::new();
    let mut default_branch = None;
    for (i, b) in branches.into_iter().enumerate() {
        let values = match b.condition {
            Condition::Values(v) => v,
            _ => return Err(err(last_line, "cannot mix value and threshold tests")),
        };
        if b.default {
            if default_branch.is_some() {
                return Err(err(last_line, "more than one (default) branch"));
            }
            default_branch = Some(i);
        }
        out.push(Branch {
            values,
            child: b.child,
        });
    }
    Ok(TreeNode::Categorical {
        feature,
        branches: out,
        default_branch,
    })
}

/// Serializes a tree in the canonical structured format.
pub fn serialize_tree_canonical(tree: &DecisionTree) -> String {
    let mut s = serde_json::to_string_pretty(tree).expect("trees always serialize");
    s.push('\n');
    s
}

/// Parses the canonical structured format.
pub fn parse_tree_canonical(source: &str) -> Result<DecisionTree, TreeFormatError> {
    let tree: DecisionTree = serde_json::from_str(source)?;
    tree.validate()
        .map_err(|e| err(0, format!("invalid tree: {e}")))?;
    Ok(tree)
}
