//! Feature coding: turns a narrative into one labelled feature vector per
//! potential boundary site.
//!
//! Twelve features are coded per site, in four groups:
//!
//! * prosodic — `before`, `after` (contour of the flanking phrases),
//!   `pause`, `duration`;
//! * cue phrase — `cue1`/`word1` for the first lexical item of the
//!   following phrase, `cue2`/`word2` for the second;
//! * noun phrase — `coref`, `infer` (read from the hand-coded clause
//!   annotations), `global.pro` (computed from the annotated pronoun
//!   links relative to the last boundary a sequential algorithm assigned);
//! * combined — `cue-prosody`.
//!
//! Coding is a pure function of the narrative, the cue lexicon and the
//! boundary threshold, so coded records are safe to share and to cache.

use std::borrow::Cow;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    ClauseAnnotation, FinalContour, Narrative, Polarity, ProsodicPhrase, SubjectAnnotation,
};

#[derive(Debug, Error)]
pub enum CoderError {
    #[error("threshold {t} outside 1..={max}")]
    ThresholdOutOfRange { t: u32, max: u32 },
    #[error("feature table line {line}: {msg}")]
    Table { line: usize, msg: String },
}

/// Gold classification of a potential boundary site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "boundary")]
    Boundary,
    #[serde(rename = "non-boundary")]
    NonBoundary,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Boundary => "boundary",
            Label::NonBoundary => "non-boundary",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "boundary" => Some(Label::Boundary),
            "non-boundary" | "non_boundary" => Some(Label::NonBoundary),
            _ => None,
        }
    }
}

/// Value of a noun-phrase feature: the annotated judgment, or `NA` when no
/// new clause begins in the following phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NpValue {
    Plus,
    Minus,
    Na,
}

impl NpValue {
    fn from_polarity(p: Polarity) -> Self {
        match p {
            Polarity::Plus => NpValue::Plus,
            Polarity::Minus => NpValue::Minus,
        }
    }
}

/// The combined cue/prosody feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CueProsody {
    Complex,
    True,
    False,
}

/// The twelve feature values coded for one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub before: FinalContour,
    pub after: FinalContour,
    pub pause: bool,
    pub duration: f64,
    pub cue1: bool,
    pub word1: Option<String>,
    pub cue2: bool,
    pub word2: Option<String>,
    pub coref: NpValue,
    pub infer: NpValue,
    pub global_pro: NpValue,
    pub cue_prosody: CueProsody,
}

impl FeatureVector {
    /// Checks the structural invariants that hold for every coded site.
    pub fn validate(&self) -> Result<(), String> {
        if self.duration > 0.0 && !self.pause {
            return Err("positive duration without a pause".into());
        }
        if !self.pause && self.duration != 0.0 {
            return Err("duration must be 0 when pause is false".into());
        }
        if self.cue1 != self.word1.is_some() {
            return Err("word1 must be present exactly when cue1 is true".into());
        }
        if self.cue2 != self.word2.is_some() {
            return Err("word2 must be present exactly when cue2 is true".into());
        }
        if self.cue2 && !self.cue1 {
            return Err("cue2 implies cue1".into());
        }
        let nas = [self.coref, self.infer, self.global_pro]
            .iter()
            .filter(|v| **v == NpValue::Na)
            .count();
        if nas != 0 && nas != 3 {
            return Err("coref, infer and global.pro must be all NA or all coded".into());
        }
        match self.cue_prosody {
            CueProsody::Complex => {
                if self.before != FinalContour::SentenceFinal || !self.pause {
                    return Err("complex cue-prosody requires +sfc before and a pause".into());
                }
            }
            CueProsody::True => {
                if !self.pause {
                    return Err("cue-prosody true requires a pause".into());
                }
            }
            CueProsody::False => {
                if self.pause {
                    return Err("cue-prosody false requires no pause".into());
                }
            }
        }
        Ok(())
    }
}

/// One coded potential boundary site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub narrative_id: String,
    /// 1-based site index; site i lies between phrases i and i+1.
    pub site_index: usize,
    pub features: FeatureVector,
    pub label: Label,
}

/// Identifies one of the twelve features, in schema order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureId {
    #[serde(rename = "before")]
    Before,
    #[serde(rename = "after")]
    After,
    #[serde(rename = "pause")]
    Pause,
    #[serde(rename = "duration")]
    Duration,
    #[serde(rename = "cue1")]
    Cue1,
    #[serde(rename = "word1")]
    Word1,
    #[serde(rename = "cue2")]
    Cue2,
    #[serde(rename = "word2")]
    Word2,
    #[serde(rename = "coref")]
    Coref,
    #[serde(rename = "infer")]
    Infer,
    #[serde(rename = "global.pro")]
    GlobalPro,
    #[serde(rename = "cue-prosody")]
    CueProsody,
}

impl FeatureId {
    pub const ALL: [FeatureId; 12] = [
        FeatureId::Before,
        FeatureId::After,
        FeatureId::Pause,
        FeatureId::Duration,
        FeatureId::Cue1,
        FeatureId::Word1,
        FeatureId::Cue2,
        FeatureId::Word2,
        FeatureId::Coref,
        FeatureId::Infer,
        FeatureId::GlobalPro,
        FeatureId::CueProsody,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureId::Before => "before",
            FeatureId::After => "after",
            FeatureId::Pause => "pause",
            FeatureId::Duration => "duration",
            FeatureId::Cue1 => "cue1",
            FeatureId::Word1 => "word1",
            FeatureId::Cue2 => "cue2",
            FeatureId::Word2 => "word2",
            FeatureId::Coref => "coref",
            FeatureId::Infer => "infer",
            FeatureId::GlobalPro => "global.pro",
            FeatureId::CueProsody => "cue-prosody",
        }
    }

    pub fn parse(s: &str) -> Option<FeatureId> {
        FeatureId::ALL.iter().copied().find(|f| f.name() == s)
    }

    pub fn is_continuous(self) -> bool {
        self == FeatureId::Duration
    }
}

pub const CONTOUR_SF: &str = "+sfc";
pub const CONTOUR_NSF: &str = "-sfc";
pub const NA: &str = "NA";

fn contour_str(c: FinalContour) -> &'static str {
    match c {
        FinalContour::SentenceFinal => CONTOUR_SF,
        FinalContour::NonSentenceFinal => CONTOUR_NSF,
    }
}

fn np_str(prefix: &'static str, v: NpValue) -> Cow<'static, str> {
    match v {
        NpValue::Plus => Cow::Owned(format!("+{prefix}")),
        NpValue::Minus => Cow::Owned(format!("-{prefix}")),
        NpValue::Na => Cow::Borrowed(NA),
    }
}

fn bool_str(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

impl FeatureVector {
    /// The categorical rendering of a feature value, or `None` for the
    /// continuous `duration` feature.
    pub fn categorical(&self, feature: FeatureId) -> Option<Cow<'_, str>> {
        Some(match feature {
            FeatureId::Before => Cow::Borrowed(contour_str(self.before)),
            FeatureId::After => Cow::Borrowed(contour_str(self.after)),
            FeatureId::Pause => Cow::Borrowed(bool_str(self.pause)),
            FeatureId::Duration => return None,
            FeatureId::Cue1 => Cow::Borrowed(bool_str(self.cue1)),
            FeatureId::Word1 => match &self.word1 {
                Some(w) => Cow::Borrowed(w.as_str()),
                None => Cow::Borrowed(NA),
            },
            FeatureId::Cue2 => Cow::Borrowed(bool_str(self.cue2)),
            FeatureId::Word2 => match &self.word2 {
                Some(w) => Cow::Borrowed(w.as_str()),
                None => Cow::Borrowed(NA),
            },
            FeatureId::Coref => np_str("coref", self.coref),
            FeatureId::Infer => np_str("infer", self.infer),
            FeatureId::GlobalPro => np_str("gp", self.global_pro),
            FeatureId::CueProsody => Cow::Borrowed(match self.cue_prosody {
                CueProsody::Complex => "complex",
                CueProsody::True => "true",
                CueProsody::False => "false",
            }),
        })
    }

    /// The numeric value of a feature; only `duration` is continuous.
    pub fn numeric(&self, feature: FeatureId) -> Option<f64> {
        (feature == FeatureId::Duration).then_some(self.duration)
    }
}

/// The set of cue words tested at phrase-initial positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueLexicon {
    words: BTreeSet<String>,
}

impl CueLexicon {
    /// The lexicon shipped with the toolkit.
    pub fn builtin() -> Self {
        CueLexicon::parse(include_str!("../data/cue_words.txt"))
            .expect("builtin lexicon is non-empty")
    }

    /// Parses a lexicon file: one lowercase token per line, `#` comments.
    pub fn parse(source: &str) -> Option<Self> {
        let words: BTreeSet<String> = source
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.to_lowercase())
            .collect();
        if words.is_empty() {
            None
        } else {
            Some(CueLexicon { words })
        }
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Option<Self> {
        let words: BTreeSet<String> = words.into_iter().map(|w| w.into().to_lowercase()).collect();
        if words.is_empty() {
            None
        } else {
            Some(CueLexicon { words })
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    /// Tokens in sorted order; this is the declared domain of the word
    /// features (plus `NA`).
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for CueLexicon {
    fn default() -> Self {
        CueLexicon::builtin()
    }
}

/// Lexical tokens of a phrase, normalized for cue-word comparison:
/// bracketed pause material is dropped, surrounding punctuation stripped,
/// intra-word hyphens (lengthening like "A-nd") removed, and everything
/// lowercased. Tokens without an alphabetic character are discarded.
pub fn lexical_tokens(text: &str) -> Vec<String> {
    let unbracketed: String = text
        .chars()
        .map(|c| if c == '[' || c == ']' { ' ' } else { c })
        .collect();
    unbracketed
        .split_whitespace()
        .filter_map(normalize_token)
        .collect()
}

fn normalize_token(raw: &str) -> Option<String> {
    let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() || !trimmed.chars().any(|c| c.is_alphabetic()) {
        return None;
    }
    Some(
        trimmed
            .chars()
            .filter(|&c| c != '-')
            .flat_map(char::to_lowercase)
            .collect(),
    )
}

/// Codes the prosodic features of the site between two adjacent phrases.
///
/// Returns `(before, after, pause, duration)`. Only a measured `[X]` pause
/// counts; a leading `..` break is not a pause and contributes duration 0.
pub fn code_prosody(
    phrase_before: &ProsodicPhrase,
    phrase_after: &ProsodicPhrase,
) -> (FinalContour, FinalContour, bool, f64) {
    let pause = phrase_after.initial_pause.is_some();
    let duration = phrase_after
        .initial_pause
        .as_ref()
        .map_or(0.0, |p| p.seconds());
    (
        phrase_before.final_contour,
        phrase_after.final_contour,
        pause,
        duration,
    )
}

/// Codes the cue-phrase features from the first two lexical items of the
/// following phrase.
pub fn code_cues(
    phrase_after: &ProsodicPhrase,
    lexicon: &CueLexicon,
) -> (bool, Option<String>, bool, Option<String>) {
    let tokens = lexical_tokens(&phrase_after.text);
    let first = tokens.first();
    let cue1 = first.is_some_and(|t| lexicon.contains(t));
    if !cue1 {
        return (false, None, false, None);
    }
    let word1 = first.cloned();
    let second = tokens.get(1);
    let cue2 = second.is_some_and(|t| lexicon.contains(t));
    let word2 = if cue2 { second.cloned() } else { None };
    (true, word1, cue2, word2)
}

/// Codes the noun-phrase features for a site.
///
/// All three are `NA` unless a new clause begins in the following phrase;
/// when several clauses begin there the first grounds the features, since
/// at most one boundary decision is made per site. `global.pro` is `+` iff
/// some pronoun of that clause has an antecedent clause lying inside the
/// current segment, i.e. starting after the site of the last boundary the
/// consuming algorithm assigned (`last_boundary`; `None` at the start of a
/// narrative, when every earlier clause counts).
pub fn code_np(
    site_index: usize,
    clauses: &[ClauseAnnotation],
    last_boundary: Option<usize>,
) -> (NpValue, NpValue, NpValue) {
    let clause = clauses.iter().find(|c| c.start_phrase == site_index + 1);
    let Some(clause) = clause else {
        return (NpValue::Na, NpValue::Na, NpValue::Na);
    };
    let in_segment = |antecedent_index: usize| -> bool {
        let Some(ante) = clauses.get(antecedent_index - 1) else {
            return false;
        };
        match last_boundary {
            None => true,
            Some(site) => ante.start_phrase > site,
        }
    };
    let global_pro = clause
        .pronouns
        .iter()
        .any(|p| p.antecedent.is_some_and(in_segment));
    (
        NpValue::from_polarity(clause.coref),
        NpValue::from_polarity(clause.infer),
        if global_pro {
            NpValue::Plus
        } else {
            NpValue::Minus
        },
    )
}

/// Codes the combined cue/prosody feature.
///
/// The value is `complex` when the preceding phrase carries a
/// sentence-final contour, the site has a measured pause, and the cue
/// configuration is either a non-"and" cue word or "and" followed by a
/// second cue word other than "and". Otherwise it mirrors `pause`.
pub fn code_cue_prosody(
    before: FinalContour,
    pause: bool,
    cue1: bool,
    word1: Option<&str>,
    cue2: bool,
    word2: Option<&str>,
) -> CueProsody {
    let non_and_cue = cue1 && word1.is_some_and(|w| w != "and");
    let and_then_other = cue1 && word1 == Some("and") && cue2 && word2.is_some_and(|w| w != "and");
    if before == FinalContour::SentenceFinal && pause && (non_and_cue || and_then_other) {
        CueProsody::Complex
    } else if pause {
        CueProsody::True
    } else {
        CueProsody::False
    }
}

/// Derives gold labels from subject marks: a site is a boundary iff at
/// least `threshold` subjects marked it.
pub fn label_sites(subjects: &SubjectAnnotation, threshold: u32) -> Result<Vec<Label>, CoderError> {
    if threshold < 1 || threshold > subjects.subject_count {
        return Err(CoderError::ThresholdOutOfRange {
            t: threshold,
            max: subjects.subject_count,
        });
    }
    Ok(subjects
        .marks_per_site
        .iter()
        .map(|&m| {
            if m >= threshold {
                Label::Boundary
            } else {
                Label::NonBoundary
            }
        })
        .collect())
}

/// Default boundary threshold: at least 3 of the 7 subjects.
pub const DEFAULT_THRESHOLD: u32 = 3;

/// How the `global.pro` feature in a flat feature table is grounded.
///
/// `global.pro` depends on the segment structure built so far, so its value
/// is only fully defined inside a sequential algorithm. A flat table cannot
/// carry that state, so both modes emit the value observed while running
/// the baseline noun-phrase rule left to right; the mode is recorded in the
/// table metadata so downstream consumers know what they are reading.
/// Sequential algorithms always recompute it against their own state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlobalProMode {
    #[serde(rename = "dynamic")]
    Dynamic,
    #[serde(rename = "static")]
    Static,
}

impl GlobalProMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GlobalProMode::Dynamic => "dynamic",
            GlobalProMode::Static => "static",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dynamic" => Some(GlobalProMode::Dynamic),
            "static" => Some(GlobalProMode::Static),
            _ => None,
        }
    }
}

/// Codes the feature vector for one site given the sequential state.
pub(crate) fn code_site(
    narrative: &Narrative,
    lexicon: &CueLexicon,
    site_index: usize,
    last_boundary: Option<usize>,
) -> FeatureVector {
    let phrase_before = &narrative.phrases[site_index - 1];
    let phrase_after = &narrative.phrases[site_index];
    let (before, after, pause, duration) = code_prosody(phrase_before, phrase_after);
    let (cue1, word1, cue2, word2) = code_cues(phrase_after, lexicon);
    let (coref, infer, global_pro) = code_np(site_index, &narrative.clauses, last_boundary);
    let cue_prosody = code_cue_prosody(
        before,
        pause,
        cue1,
        word1.as_deref(),
        cue2,
        word2.as_deref(),
    );
    FeatureVector {
        before,
        after,
        pause,
        duration,
        cue1,
        word1,
        cue2,
        word2,
        coref,
        infer,
        global_pro,
        cue_prosody,
    }
}

/// Walks a narrative's sites in order, coding each with `global.pro`
/// relative to the boundaries the callback has assigned so far.
pub(crate) fn scan_sites<F>(
    narrative: &Narrative,
    lexicon: &CueLexicon,
    mut decide: F,
) -> Vec<FeatureVector>
where
    F: FnMut(usize, &FeatureVector) -> Label,
{
    let mut vectors = Vec::with_capacity(narrative.site_count());
    let mut last_boundary = None;
    for site in 1..=narrative.site_count() {
        let fv = code_site(narrative, lexicon, site, last_boundary);
        if decide(site, &fv) == Label::Boundary {
            last_boundary = Some(site);
        }
        vectors.push(fv);
    }
    vectors
}

/// Codes every site of a narrative, pairing features with gold labels.
///
/// The `global.pro` values are those observed by the baseline noun-phrase
/// rule running left to right (see [`GlobalProMode`]); `mode` only controls
/// what is recorded in exported metadata.
pub fn code_narrative(
    narrative: &Narrative,
    lexicon: &CueLexicon,
    threshold: u32,
    mode: GlobalProMode,
) -> Result<Vec<SiteRecord>, CoderError> {
    let _ = mode;
    let labels = label_sites(&narrative.subjects, threshold)?;
    let vectors = scan_sites(narrative, lexicon, |_, fv| crate::segmenter::np_rule1(fv));
    Ok(vectors
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (features, label))| SiteRecord {
            narrative_id: narrative.id.clone(),
            site_index: i + 1,
            features,
            label,
        })
        .collect())
}

/// Renders a duration with at least two decimal places without losing
/// precision.
pub fn format_duration(d: f64) -> String {
    let shortest = format!("{d}");
    match shortest.split_once('.') {
        Some((_, frac)) if frac.len() >= 2 => shortest,
        _ => format!("{d:.2}"),
    }
}

/// Metadata carried at the head of a feature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub global_pro_mode: GlobalProMode,
    pub threshold: u32,
}

const TABLE_COLUMNS: &str = "narrative_id,site_index,before,after,pause,duration,cue1,word1,cue2,word2,coref,infer,global.pro,cue-prosody,label";

/// Writes site records as delimited text: comment metadata, a header row,
/// then one row per site with the feature columns in schema order.
pub fn write_feature_table(records: &[SiteRecord], meta: &TableMeta) -> String {
    let mut out = String::new();
    out.push_str("# disseg feature table\n");
    out.push_str(&format!(
        "# global.pro mode: {}\n",
        meta.global_pro_mode.as_str()
    ));
    out.push_str(&format!("# threshold: {}\n", meta.threshold));
    out.push_str(TABLE_COLUMNS);
    out.push('\n');
    for r in records {
        let f = &r.features;
        let cat = |id| f.categorical(id).unwrap().into_owned();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.narrative_id,
            r.site_index,
            cat(FeatureId::Before),
            cat(FeatureId::After),
            cat(FeatureId::Pause),
            format_duration(f.duration),
            cat(FeatureId::Cue1),
            cat(FeatureId::Word1),
            cat(FeatureId::Cue2),
            cat(FeatureId::Word2),
            cat(FeatureId::Coref),
            cat(FeatureId::Infer),
            cat(FeatureId::GlobalPro),
            cat(FeatureId::CueProsody),
            r.label.as_str(),
        ));
    }
    out
}

fn parse_contour(s: &str, line: usize) -> Result<FinalContour, CoderError> {
    match s {
        CONTOUR_SF => Ok(FinalContour::SentenceFinal),
        CONTOUR_NSF => Ok(FinalContour::NonSentenceFinal),
        other => Err(CoderError::Table {
            line,
            msg: format!("expected +sfc or -sfc, found '{other}'"),
        }),
    }
}

fn parse_bool(s: &str, line: usize) -> Result<bool, CoderError> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(CoderError::Table {
            line,
            msg: format!("expected true or false, found '{other}'"),
        }),
    }
}

fn parse_np(s: &str, prefix: &str, line: usize) -> Result<NpValue, CoderError> {
    if s == NA {
        Ok(NpValue::Na)
    } else if s == format!("+{prefix}") {
        Ok(NpValue::Plus)
    } else if s == format!("-{prefix}") {
        Ok(NpValue::Minus)
    } else {
        Err(CoderError::Table {
            line,
            msg: format!("expected +{prefix}, -{prefix} or NA, found '{s}'"),
        })
    }
}

/// Reads a feature table written by [`write_feature_table`].
pub fn read_feature_table(source: &str) -> Result<(Vec<SiteRecord>, TableMeta), CoderError> {
    let mut mode = GlobalProMode::Static;
    let mut threshold = DEFAULT_THRESHOLD;
    let mut records = Vec::new();
    let mut header_seen = false;

    for (line_no, raw) in source.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("global.pro mode:") {
                mode = GlobalProMode::parse(v.trim()).ok_or_else(|| CoderError::Table {
                    line: line_no,
                    msg: format!("unknown global.pro mode '{}'", v.trim()),
                })?;
            } else if let Some(v) = comment.strip_prefix("threshold:") {
                threshold = v.trim().parse().map_err(|_| CoderError::Table {
                    line: line_no,
                    msg: "threshold must be an integer".into(),
                })?;
            }
            continue;
        }
        if !header_seen {
            if line != TABLE_COLUMNS {
                return Err(CoderError::Table {
                    line: line_no,
                    msg: "unexpected header row".into(),
                });
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 15 {
            return Err(CoderError::Table {
                line: line_no,
                msg: format!("expected 15 columns, found {}", cols.len()),
            });
        }
        let site_index: usize = cols[1].parse().map_err(|_| CoderError::Table {
            line: line_no,
            msg: "site_index must be an integer".into(),
        })?;
        let duration: f64 = cols[5].parse().map_err(|_| CoderError::Table {
            line: line_no,
            msg: "duration must be a number".into(),
        })?;
        let word = |s: &str| {
            if s == NA {
                None
            } else {
                Some(s.to_string())
            }
        };
        let features = FeatureVector {
            before: parse_contour(cols[2], line_no)?,
            after: parse_contour(cols[3], line_no)?,
            pause: parse_bool(cols[4], line_no)?,
            duration,
            cue1: parse_bool(cols[6], line_no)?,
            word1: word(cols[7]),
            cue2: parse_bool(cols[8], line_no)?,
            word2: word(cols[9]),
            coref: parse_np(cols[10], "coref", line_no)?,
            infer: parse_np(cols[11], "infer", line_no)?,
            global_pro: parse_np(cols[12], "gp", line_no)?,
            cue_prosody: match cols[13] {
                "complex" => CueProsody::Complex,
                "true" => CueProsody::True,
                "false" => CueProsody::False,
                other => {
                    return Err(CoderError::Table {
                        line: line_no,
                        msg: format!("expected complex, true or false, found '{other}'"),
                    })
                }
            },
        };
        if let Err(msg) = features.validate() {
            return Err(CoderError::Table { line: line_no, msg });
        }
        let label = Label::parse(cols[14]).ok_or_else(|| CoderError::Table {
            line: line_no,
            msg: format!("unknown label '{}'", cols[14]),
        })?;
        records.push(SiteRecord {
            narrative_id: cols[0].to_string(),
            site_index,
            features,
            label,
        });
    }

    if !header_seen {
        return Err(CoderError::Table {
            line: 0,
            msg: "missing header row".into(),
        });
    }
    Ok((
        records,
        TableMeta {
            global_pro_mode: mode,
            threshold,
        },
    ))
}
