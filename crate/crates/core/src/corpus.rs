//! Transcript and annotation parsing for spoken-narrative corpora.
//!
//! A narrative arrives as two files: a transcript with one prosodic phrase
//! per line, marked up with the transcription conventions used throughout
//! (terminal `.`/`?`/`,` for intonation contour, a leading `[X]` for a
//! measured pause of X seconds, a leading `..` for a break too short to
//! measure), and an annotation sidecar carrying the hand-coded clause and
//! subject data that cannot be recovered from the text alone.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while parsing transcripts or annotation sidecars.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: phrase has no recognized terminator (expected '.', '?' or ',')")]
    MissingTerminator { line: usize },
    #[error("line {line}: malformed pause bracket")]
    MalformedBracket { line: usize },
    #[error("narrative '{id}' has {count} phrase(s); at least 2 are required")]
    TooFewPhrases { id: String, count: usize },
    #[error("line {line}: {msg}")]
    AnnotationSyntax { line: usize, msg: String },
    #[error("annotation declares {declared} phrases but the transcript has {expected}")]
    PhraseCountMismatch { declared: usize, expected: usize },
    #[error("expected {expected} subject marks (one per site), found {found}")]
    SiteCountMismatch { expected: usize, found: usize },
    #[error("line {line}: subject mark {value} exceeds the subject count {max}")]
    MarkOutOfRange { line: usize, value: u32, max: u32 },
    #[error("line {line}: clause start phrase {value} is outside 1..={max}")]
    StartPhraseOutOfRange {
        line: usize,
        value: usize,
        max: usize,
    },
    #[error("line {line}: clause start phrases must be non-decreasing")]
    ClauseOrder { line: usize },
    #[error("line {line}: pronoun antecedent must name an earlier clause")]
    AntecedentOrder { line: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Non-fatal observations recorded while parsing in lenient mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// How strictly to treat transcript lines that deviate from the conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    /// Abort on the first unrecognized terminator or malformed bracket.
    Strict,
    /// Repair what can be repaired and record a warning for each repair.
    Lenient,
}

/// Phrase-final intonation as marked by the transcript terminator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FinalContour {
    /// `.` or `?` — sentence-final contour.
    SentenceFinal,
    /// `,` — phrase-final but not sentence-final.
    NonSentenceFinal,
}

/// A measured pause duration, keeping the digits exactly as written so the
/// emitter can reproduce the transcript's decimal precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauseDuration {
    seconds: f64,
    literal: String,
}

impl PauseDuration {
    /// Builds a pause from a duration in seconds, choosing a literal form
    /// that parses back to the same value.
    pub fn from_seconds(seconds: f64) -> Self {
        assert!(
            seconds.is_finite() && seconds >= 0.0,
            "pause duration must be finite and non-negative"
        );
        let literal = if seconds.fract() == 0.0 {
            format!("{seconds:.1}")
        } else {
            format!("{seconds}")
        };
        PauseDuration { seconds, literal }
    }

    fn from_literal(literal: &str) -> Option<Self> {
        let trimmed = literal.trim();
        let body = trimmed.strip_suffix('?').unwrap_or(trimmed).trim();
        if body.is_empty() {
            return None;
        }
        // Transcripts write sub-second pauses without a leading zero (".75").
        let parsed: f64 = if let Some(rest) = body.strip_prefix('.') {
            format!("0.{rest}").parse().ok()?
        } else {
            body.parse().ok()?
        };
        if !parsed.is_finite() || parsed < 0.0 {
            return None;
        }
        Some(PauseDuration {
            seconds: parsed,
            literal: body.to_string(),
        })
    }

    pub fn seconds(&self) -> f64 {
        self.seconds
    }

    /// The duration exactly as written in the source, minus any trailing `?`
    /// uncertainty mark.
    pub fn literal(&self) -> &str {
        &self.literal
    }
}

/// One transcript line: the unit between which segment boundaries may fall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsodicPhrase {
    /// 1-based position within the narrative.
    pub index: usize,
    /// The phrase body with leading markers and the terminator stripped.
    /// Internal pause brackets and `..` breaks stay in place.
    pub text: String,
    /// Present iff the line began with a bracketed duration `[X]`.
    pub initial_pause: Option<PauseDuration>,
    /// True iff the line (after any pause bracket) began with `..`.
    pub initial_short_break: bool,
    pub final_contour: FinalContour,
}

/// Whether an annotated relation to the preceding clause holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Plus,
    Minus,
}

/// A definite pronoun in a clause, linked to the clause containing its
/// antecedent when the annotator resolved one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounLink {
    pub token: String,
    /// 1-based index of the antecedent's clause; `None` when the referent
    /// was not mentioned in any earlier clause of the narrative.
    pub antecedent: Option<usize>,
}

/// Hand-coded record of one functionally independent clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseAnnotation {
    /// 1-based ordinal over the narrative's clauses.
    pub clause_index: usize,
    /// 1-based index of the phrase in which the clause begins.
    pub start_phrase: usize,
    /// Does the clause contain an NP coreferring with one in the previous clause?
    pub coref: Polarity,
    /// Does the clause contain an NP inferentially linked to one in the previous clause?
    pub infer: Polarity,
    pub pronouns: Vec<PronounLink>,
}

/// Subject responses at every potential boundary site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectAnnotation {
    /// Total number of subjects who segmented the narrative.
    pub subject_count: u32,
    /// For each site, how many subjects placed a boundary there.
    pub marks_per_site: Vec<u32>,
    /// Per-subject boundary sets when the sidecar used the per-subject
    /// variant; required for scoring individual subjects.
    pub per_subject: Option<Vec<BTreeSet<usize>>>,
}

/// A parsed narrative: phrases plus the annotations coded against them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Narrative {
    pub id: String,
    pub phrases: Vec<ProsodicPhrase>,
    pub clauses: Vec<ClauseAnnotation>,
    pub subjects: SubjectAnnotation,
}

impl Narrative {
    /// Assembles and validates a narrative.
    pub fn new(
        id: impl Into<String>,
        phrases: Vec<ProsodicPhrase>,
        clauses: Vec<ClauseAnnotation>,
        subjects: SubjectAnnotation,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let n = phrases.len();
        if n < 2 {
            return Err(CorpusError::TooFewPhrases { id, count: n });
        }
        if subjects.marks_per_site.len() != n - 1 {
            return Err(CorpusError::SiteCountMismatch {
                expected: n - 1,
                found: subjects.marks_per_site.len(),
            });
        }
        for &m in &subjects.marks_per_site {
            if m > subjects.subject_count {
                return Err(CorpusError::MarkOutOfRange {
                    line: 0,
                    value: m,
                    max: subjects.subject_count,
                });
            }
        }
        let mut prev_start = 0;
        for c in &clauses {
            if c.start_phrase < 1 || c.start_phrase > n {
                return Err(CorpusError::StartPhraseOutOfRange {
                    line: 0,
                    value: c.start_phrase,
                    max: n,
                });
            }
            if c.start_phrase < prev_start {
                return Err(CorpusError::ClauseOrder { line: 0 });
            }
            prev_start = c.start_phrase;
            for p in &c.pronouns {
                if let Some(a) = p.antecedent {
                    if a >= c.clause_index {
                        return Err(CorpusError::AntecedentOrder { line: 0 });
                    }
                }
            }
        }
        Ok(Narrative {
            id,
            phrases,
            clauses,
            subjects,
        })
    }

    /// Number of potential boundary sites: one between each adjacent pair of
    /// phrases.
    pub fn site_count(&self) -> usize {
        self.phrases.len() - 1
    }
}

/// Parses a transcript into its prosodic phrases.
///
/// Each non-blank line is one phrase. A line-initial `[X]` becomes the
/// phrase's measured pause (an uncertainty `?` inside the bracket is
/// dropped, the value kept); a following `..` marks an unmeasured break.
/// Pause brackets and `..` anywhere else in the line are ordinary text.
/// The final `.`/`?`/`,` determines the contour and is stripped from the
/// text.
pub fn parse_transcript(
    source: &str,
    mode: ParseMode,
) -> Result<(Vec<ProsodicPhrase>, Vec<ParseWarning>), CorpusError> {
    let mut phrases = Vec::new();
    let mut warnings = Vec::new();

    for (line_no, raw) in source.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }

        let mut rest = line;
        let mut initial_pause = None;
        if rest.starts_with('[') {
            match rest.find(']') {
                Some(close) => match PauseDuration::from_literal(&rest[1..close]) {
                    Some(p) => {
                        initial_pause = Some(p);
                        rest = rest[close + 1..].trim_start();
                    }
                    None => {
                        if mode == ParseMode::Strict {
                            return Err(CorpusError::MalformedBracket { line: line_no });
                        }
                        warnings.push(ParseWarning {
                            line: line_no,
                            message: "unparseable pause bracket kept as text".into(),
                        });
                    }
                },
                None => {
                    if mode == ParseMode::Strict {
                        return Err(CorpusError::MalformedBracket { line: line_no });
                    }
                    warnings.push(ParseWarning {
                        line: line_no,
                        message: "unclosed pause bracket kept as text".into(),
                    });
                }
            }
        }

        let initial_short_break = rest.starts_with("..");
        if initial_short_break {
            rest = &rest[2..];
        }

        let (text, final_contour) = match rest.chars().last() {
            Some('.') | Some('?') => (&rest[..rest.len() - 1], FinalContour::SentenceFinal),
            Some(',') => (&rest[..rest.len() - 1], FinalContour::NonSentenceFinal),
            _ => {
                if mode == ParseMode::Strict {
                    return Err(CorpusError::MissingTerminator { line: line_no });
                }
                warnings.push(ParseWarning {
                    line: line_no,
                    message: "missing terminator; assuming non-sentence-final contour".into(),
                });
                (rest, FinalContour::NonSentenceFinal)
            }
        };

        phrases.push(ProsodicPhrase {
            index: phrases.len() + 1,
            text: text.trim_end().to_string(),
            initial_pause,
            initial_short_break,
            final_contour,
        });
    }

    Ok((phrases, warnings))
}

/// Renders a narrative's phrases back to transcript text.
///
/// Parsing the result reproduces every structured field: pause literals are
/// written exactly as parsed, and the contour is rendered as `.` or `,`.
pub fn emit_transcript(narrative: &Narrative) -> String {
    let mut out = String::new();
    for p in &narrative.phrases {
        if let Some(pause) = &p.initial_pause {
            out.push('[');
            out.push_str(pause.literal());
            out.push_str("] ");
        }
        if p.initial_short_break {
            out.push_str("..");
        }
        out.push_str(&p.text);
        out.push(match p.final_contour {
            FinalContour::SentenceFinal => '.',
            FinalContour::NonSentenceFinal => ',',
        });
        out.push('\n');
    }
    out
}

/// Contents of an annotation sidecar file.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationFile {
    pub narrative_id: String,
    pub n_phrases: usize,
    pub clauses: Vec<ClauseAnnotation>,
    pub subjects: SubjectAnnotation,
}

fn syntax(line: usize, msg: impl Into<String>) -> CorpusError {
    CorpusError::AnnotationSyntax {
        line,
        msg: msg.into(),
    }
}

/// Parses an annotation sidecar and cross-checks it against the phrase
/// count of the transcript it was coded for.
///
/// The grammar (documented in full in the repository README):
///
/// ```text
/// NARRATIVE <id> <n_phrases>
/// SUBJECTS <count>
/// <mark> <mark> ...                      aggregate counts, one per site
/// SUBJECT <k> [<site> ...]               or per-subject boundary sites
/// CLAUSE <j> <start_phrase> <+|-> <+|->  coref then infer
/// PRONOUN <token> <antecedent|NONE>      attached to the preceding CLAUSE
/// ```
pub fn parse_annotations(source: &str, n_phrases: usize) -> Result<AnnotationFile, CorpusError> {
    let mut narrative_id: Option<String> = None;
    let mut declared_phrases = 0usize;
    let mut subject_count: Option<u32> = None;
    let mut aggregate_marks: Vec<(usize, u32)> = Vec::new();
    let mut per_subject: Vec<(usize, u32, BTreeSet<usize>)> = Vec::new();
    let mut clauses: Vec<ClauseAnnotation> = Vec::new();

    for (line_no, raw) in source.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "NARRATIVE" => {
                if narrative_id.is_some() {
                    return Err(syntax(line_no, "duplicate NARRATIVE record"));
                }
                if fields.len() != 3 {
                    return Err(syntax(line_no, "expected: NARRATIVE <id> <n_phrases>"));
                }
                declared_phrases = fields[2]
                    .parse()
                    .map_err(|_| syntax(line_no, "phrase count must be an integer"))?;
                narrative_id = Some(fields[1].to_string());
            }
            "SUBJECTS" => {
                if subject_count.is_some() {
                    return Err(syntax(line_no, "duplicate SUBJECTS record"));
                }
                if fields.len() != 2 {
                    return Err(syntax(line_no, "expected: SUBJECTS <count>"));
                }
                let count: u32 = fields[1]
                    .parse()
                    .map_err(|_| syntax(line_no, "subject count must be an integer"))?;
                if count == 0 {
                    return Err(syntax(line_no, "subject count must be at least 1"));
                }
                subject_count = Some(count);
            }
            "SUBJECT" => {
                if fields.len() < 2 {
                    return Err(syntax(line_no, "expected: SUBJECT <k> [<site> ...]"));
                }
                let k: u32 = fields[1]
                    .parse()
                    .map_err(|_| syntax(line_no, "subject id must be an integer"))?;
                let mut sites = BTreeSet::new();
                for f in &fields[2..] {
                    let s: usize = f
                        .parse()
                        .map_err(|_| syntax(line_no, "site indices must be integers"))?;
                    if !sites.insert(s) {
                        return Err(syntax(line_no, format!("duplicate site {s}")));
                    }
                }
                per_subject.push((line_no, k, sites));
            }
            "CLAUSE" => {
                if fields.len() != 5 {
                    return Err(syntax(
                        line_no,
                        "expected: CLAUSE <j> <start_phrase> <+|-> <+|->",
                    ));
                }
                let j: usize = fields[1]
                    .parse()
                    .map_err(|_| syntax(line_no, "clause index must be an integer"))?;
                if j != clauses.len() + 1 {
                    return Err(syntax(
                        line_no,
                        format!(
                            "clause indices must be consecutive; expected {}",
                            clauses.len() + 1
                        ),
                    ));
                }
                let start_phrase: usize = fields[2]
                    .parse()
                    .map_err(|_| syntax(line_no, "start phrase must be an integer"))?;
                let parse_pol = |s: &str| match s {
                    "+" => Ok(Polarity::Plus),
                    "-" => Ok(Polarity::Minus),
                    other => Err(syntax(
                        line_no,
                        format!("expected '+' or '-', found '{other}'"),
                    )),
                };
                let coref = parse_pol(fields[3])?;
                let infer = parse_pol(fields[4])?;
                if let Some(prev) = clauses.last() {
                    if start_phrase < prev.start_phrase {
                        return Err(CorpusError::ClauseOrder { line: line_no });
                    }
                }
                clauses.push(ClauseAnnotation {
                    clause_index: j,
                    start_phrase,
                    coref,
                    infer,
                    pronouns: Vec::new(),
                });
            }
            "PRONOUN" => {
                if fields.len() != 3 {
                    return Err(syntax(
                        line_no,
                        "expected: PRONOUN <token> <antecedent|NONE>",
                    ));
                }
                let clause = clauses
                    .last_mut()
                    .ok_or_else(|| syntax(line_no, "PRONOUN before any CLAUSE"))?;
                let antecedent = if fields[2] == "NONE" {
                    None
                } else {
                    let a: usize = fields[2].parse().map_err(|_| {
                        syntax(line_no, "antecedent must be a clause index or NONE")
                    })?;
                    if a >= clause.clause_index {
                        return Err(CorpusError::AntecedentOrder { line: line_no });
                    }
                    Some(a)
                };
                clause.pronouns.push(PronounLink {
                    token: fields[1].to_string(),
                    antecedent,
                });
            }
            // Bare integers continue the aggregate subject-mark list.
            _ if fields.iter().all(|f| f.chars().all(|c| c.is_ascii_digit())) => {
                for f in &fields {
                    let v: u32 = f
                        .parse()
                        .map_err(|_| syntax(line_no, "subject marks must be integers"))?;
                    aggregate_marks.push((line_no, v));
                }
            }
            other => {
                return Err(syntax(line_no, format!("unrecognized record '{other}'")));
            }
        }
    }

    let narrative_id = narrative_id.ok_or_else(|| syntax(0, "missing NARRATIVE record"))?;
    if declared_phrases != n_phrases {
        return Err(CorpusError::PhraseCountMismatch {
            declared: declared_phrases,
            expected: n_phrases,
        });
    }
    let subject_count = subject_count.ok_or_else(|| syntax(0, "missing SUBJECTS record"))?;
    let n_sites = n_phrases.saturating_sub(1);

    let subjects = if !per_subject.is_empty() {
        if !aggregate_marks.is_empty() {
            return Err(syntax(
                0,
                "SUBJECT lines and aggregate mark lists cannot be mixed",
            ));
        }
        let mut seen = BTreeSet::new();
        let mut sets = vec![BTreeSet::new(); subject_count as usize];
        for (line_no, k, sites) in per_subject {
            if k < 1 || k > subject_count {
                return Err(syntax(
                    line_no,
                    format!("subject id {k} outside 1..={subject_count}"),
                ));
            }
            if !seen.insert(k) {
                return Err(syntax(line_no, format!("duplicate SUBJECT {k}")));
            }
            for &s in &sites {
                if s < 1 || s > n_sites {
                    return Err(syntax(line_no, format!("site {s} outside 1..={n_sites}")));
                }
            }
            sets[(k - 1) as usize] = sites;
        }
        if seen.len() != subject_count as usize {
            return Err(syntax(
                0,
                format!("expected one SUBJECT line per subject (1..={subject_count})"),
            ));
        }
        let mut marks = vec![0u32; n_sites];
        for set in &sets {
            for &s in set {
                marks[s - 1] += 1;
            }
        }
        SubjectAnnotation {
            subject_count,
            marks_per_site: marks,
            per_subject: Some(sets),
        }
    } else {
        if aggregate_marks.len() != n_sites {
            return Err(CorpusError::SiteCountMismatch {
                expected: n_sites,
                found: aggregate_marks.len(),
            });
        }
        let mut marks = Vec::with_capacity(n_sites);
        for (line_no, v) in aggregate_marks {
            if v > subject_count {
                return Err(CorpusError::MarkOutOfRange {
                    line: line_no,
                    value: v,
                    max: subject_count,
                });
            }
            marks.push(v);
        }
        SubjectAnnotation {
            subject_count,
            marks_per_site: marks,
            per_subject: None,
        }
    };

    for c in &clauses {
        if c.start_phrase < 1 || c.start_phrase > n_phrases {
            return Err(CorpusError::StartPhraseOutOfRange {
                line: 0,
                value: c.start_phrase,
                max: n_phrases,
            });
        }
    }

    Ok(AnnotationFile {
        narrative_id,
        n_phrases,
        clauses,
        subjects,
    })
}

/// Renders a narrative's annotations in the sidecar format.
pub fn emit_annotations(narrative: &Narrative) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "NARRATIVE {} {}\n",
        narrative.id,
        narrative.phrases.len()
    ));
    out.push_str(&format!("SUBJECTS {}\n", narrative.subjects.subject_count));
    match &narrative.subjects.per_subject {
        Some(sets) => {
            for (k, set) in sets.iter().enumerate() {
                out.push_str(&format!("SUBJECT {}", k + 1));
                for s in set {
                    out.push_str(&format!(" {s}"));
                }
                out.push('\n');
            }
        }
        None => {
            let marks: Vec<String> = narrative
                .subjects
                .marks_per_site
                .iter()
                .map(|m| m.to_string())
                .collect();
            out.push_str(&marks.join(" "));
            out.push('\n');
        }
    }
    for c in &narrative.clauses {
        let pol = |p: Polarity| match p {
            Polarity::Plus => "+",
            Polarity::Minus => "-",
        };
        out.push_str(&format!(
            "CLAUSE {} {} {} {}\n",
            c.clause_index,
            c.start_phrase,
            pol(c.coref),
            pol(c.infer)
        ));
        for p in &c.pronouns {
            match p.antecedent {
                Some(a) => out.push_str(&format!("PRONOUN {} {}\n", p.token, a)),
                None => out.push_str(&format!("PRONOUN {} NONE\n", p.token)),
            }
        }
    }
    out
}

fn read_file(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads one narrative from a transcript file and its annotation sidecar.
pub fn load_narrative(
    transcript: &Path,
    annotations: &Path,
    mode: ParseMode,
) -> Result<(Narrative, Vec<ParseWarning>), CorpusError> {
    let (phrases, warnings) = parse_transcript(&read_file(transcript)?, mode)?;
    let ann = parse_annotations(&read_file(annotations)?, phrases.len())?;
    let narrative = Narrative::new(ann.narrative_id, phrases, ann.clauses, ann.subjects)?;
    Ok((narrative, warnings))
}

/// Loads every `<stem>.txt` / `<stem>.ann` pair under a corpus directory,
/// sorted by file stem for reproducible ordering.
pub fn load_corpus_dir(
    dir: &Path,
    mode: ParseMode,
) -> Result<(Vec<Narrative>, Vec<ParseWarning>), CorpusError> {
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut stems: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            stems.push(path);
        }
    }
    stems.sort();
    let mut narratives = Vec::new();
    let mut warnings = Vec::new();
    for transcript in stems {
        let sidecar = transcript.with_extension("ann");
        let (n, mut w) = load_narrative(&transcript, &sidecar, mode)?;
        narratives.push(n);
        warnings.append(&mut w);
    }
    Ok((narratives, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXCERPT: &str = "\
..Because he's looking at the girl.
[.75] Falls over,
[1.35] uh there's no conversation in this movie.
[.6] There's sounds,
you know,
like the birds and stuff,
but there.. the humans beings in it don't say anything.
[1.0] He falls over,
";

    #[test]
    fn parses_pause_and_contour() {
        let (phrases, warnings) = parse_transcript(EXCERPT, ParseMode::Strict).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(phrases.len(), 8);

        let p2 = &phrases[1];
        assert_eq!(p2.initial_pause.as_ref().unwrap().seconds(), 0.75);
        assert_eq!(p2.final_contour, FinalContour::NonSentenceFinal);
        assert_eq!(p2.text, "Falls over");
        assert!(!p2.initial_short_break);

        let p1 = &phrases[0];
        assert!(p1.initial_short_break);
        assert!(p1.initial_pause.is_none());
        assert_eq!(p1.final_contour, FinalContour::SentenceFinal);
        assert_eq!(p1.text, "Because he's looking at the girl");
    }

    #[test]
    fn internal_break_and_bracket_stay_in_text() {
        let (phrases, _) = parse_transcript(
            "but there.. the humans beings in it don't say anything.\n",
            ParseMode::Strict,
        )
        .unwrap();
        assert_eq!(
            phrases[0].text,
            "but there.. the humans beings in it don't say anything"
        );
        assert!(phrases[0].initial_pause.is_none());
        assert_eq!(phrases[0].final_contour, FinalContour::SentenceFinal);

        let (phrases, _) = parse_transcript(
            "and [.55? because [.45]] you know the pears fall,\n",
            ParseMode::Strict,
        )
        .unwrap();
        assert!(phrases[0].initial_pause.is_none());
        assert!(phrases[0].text.contains("[.55? because [.45]]"));
    }

    #[test]
    fn uncertain_pause_value_is_kept() {
        let (phrases, _) =
            parse_transcript("[.55?] because you know,\n", ParseMode::Strict).unwrap();
        assert_eq!(phrases[0].initial_pause.as_ref().unwrap().seconds(), 0.55);
    }

    #[test]
    fn question_mark_is_sentence_final() {
        let (phrases, _) = parse_transcript("what did he do?\n", ParseMode::Strict).unwrap();
        assert_eq!(phrases[0].final_contour, FinalContour::SentenceFinal);
        assert_eq!(phrases[0].text, "what did he do");
    }

    #[test]
    fn strict_rejects_missing_terminator() {
        let err = parse_transcript("no terminator here\n", ParseMode::Strict).unwrap_err();
        assert!(matches!(err, CorpusError::MissingTerminator { line: 1 }));
    }

    #[test]
    fn lenient_repairs_missing_terminator() {
        let (phrases, warnings) =
            parse_transcript("no terminator here\n", ParseMode::Lenient).unwrap();
        assert_eq!(phrases[0].final_contour, FinalContour::NonSentenceFinal);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].line, 1);
    }

    #[test]
    fn strict_rejects_malformed_bracket() {
        let err = parse_transcript("[abc] words here.\n", ParseMode::Strict).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedBracket { line: 1 }));
        let err = parse_transcript("[1.5 words here.\n", ParseMode::Strict).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedBracket { line: 1 }));
    }

    #[test]
    fn zero_pause_round_trips_as_present() {
        let phrase = ProsodicPhrase {
            index: 1,
            text: "he waits".into(),
            initial_pause: Some(PauseDuration::from_seconds(0.0)),
            initial_short_break: false,
            final_contour: FinalContour::NonSentenceFinal,
        };
        let narrative = Narrative::new(
            "n",
            vec![phrase.clone(), phrase.clone()],
            vec![],
            SubjectAnnotation {
                subject_count: 7,
                marks_per_site: vec![0],
                per_subject: None,
            },
        )
        .unwrap();
        let text = emit_transcript(&narrative);
        assert!(text.starts_with("[0.0] "));
        let (reparsed, _) = parse_transcript(&text, ParseMode::Strict).unwrap();
        let pause = reparsed[0].initial_pause.as_ref().unwrap();
        assert_eq!(pause.seconds(), 0.0);
    }

    #[test]
    fn excerpt_round_trips() {
        let (phrases, _) = parse_transcript(EXCERPT, ParseMode::Strict).unwrap();
        let narrative = Narrative::new(
            "excerpt",
            phrases.clone(),
            vec![],
            SubjectAnnotation {
                subject_count: 7,
                marks_per_site: vec![0; 7],
                per_subject: None,
            },
        )
        .unwrap();
        let emitted = emit_transcript(&narrative);
        let (reparsed, _) = parse_transcript(&emitted, ParseMode::Strict).unwrap();
        assert_eq!(phrases, reparsed);
    }

    #[test]
    fn single_phrase_narrative_is_rejected() {
        let (phrases, _) = parse_transcript("one phrase only.\n", ParseMode::Strict).unwrap();
        let err = Narrative::new(
            "tiny",
            phrases,
            vec![],
            SubjectAnnotation {
                subject_count: 7,
                marks_per_site: vec![],
                per_subject: None,
            },
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::TooFewPhrases { .. }));
    }

    const EXCERPT_ANN: &str = "\
NARRATIVE excerpt-06 8
SUBJECTS 7
1 5 0 0 0 0 7
CLAUSE 1 1 - -
PRONOUN he NONE
CLAUSE 2 2 + -
PRONOUN zero 1
CLAUSE 3 3 - -
CLAUSE 4 4 - +
CLAUSE 5 7 - -
CLAUSE 6 8 - -
PRONOUN he 2
";

    #[test]
    fn parses_annotation_sidecar() {
        let ann = parse_annotations(EXCERPT_ANN, 8).unwrap();
        assert_eq!(ann.narrative_id, "excerpt-06");
        assert_eq!(ann.subjects.marks_per_site, vec![1, 5, 0, 0, 0, 0, 7]);
        assert_eq!(ann.clauses.len(), 6);
        assert_eq!(ann.clauses[1].pronouns[0].antecedent, Some(1));
        assert!(ann.subjects.per_subject.is_none());
    }

    #[test]
    fn rejects_phrase_count_mismatch() {
        let err = parse_annotations(EXCERPT_ANN, 9).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::PhraseCountMismatch {
                declared: 8,
                expected: 9
            }
        ));
    }

    #[test]
    fn rejects_forward_antecedent() {
        let src = "\
NARRATIVE x 3
SUBJECTS 7
0 0
CLAUSE 1 1 - -
PRONOUN he 1
";
        let err = parse_annotations(src, 3).unwrap_err();
        assert!(matches!(err, CorpusError::AntecedentOrder { line: 5 }));
    }

    #[test]
    fn rejects_mark_above_subject_count() {
        let src = "\
NARRATIVE x 3
SUBJECTS 7
8 0
";
        let err = parse_annotations(src, 3).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::MarkOutOfRange {
                value: 8,
                max: 7,
                ..
            }
        ));
    }

    #[test]
    fn empty_clause_section_is_valid() {
        let src = "\
NARRATIVE x 3
SUBJECTS 7
0 3
";
        let ann = parse_annotations(src, 3).unwrap();
        assert!(ann.clauses.is_empty());
    }

    #[test]
    fn per_subject_marks_are_aggregated() {
        let src = "\
NARRATIVE x 8
SUBJECTS 7
SUBJECT 1 2 7
SUBJECT 2 2 7
SUBJECT 3 2 7
SUBJECT 4 7
SUBJECT 5 7
SUBJECT 6 7
SUBJECT 7 7
";
        let ann = parse_annotations(src, 8).unwrap();
        assert_eq!(ann.subjects.marks_per_site, vec![0, 3, 0, 0, 0, 0, 7]);
        assert_eq!(ann.subjects.per_subject.as_ref().unwrap().len(), 7);
    }

    #[test]
    fn annotation_round_trips() {
        let ann = parse_annotations(EXCERPT_ANN, 8).unwrap();
        let (phrases, _) = parse_transcript(EXCERPT, ParseMode::Strict).unwrap();
        let narrative =
            Narrative::new(ann.narrative_id, phrases, ann.clauses, ann.subjects).unwrap();
        let emitted = emit_annotations(&narrative);
        let reparsed = parse_annotations(&emitted, 8).unwrap();
        assert_eq!(reparsed.clauses, narrative.clauses);
        assert_eq!(reparsed.subjects, narrative.subjects);
    }
}
