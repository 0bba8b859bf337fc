//! One subject's reconciled leaf scores, with rationale, evidence and published aggregates.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rubric::{CriterionId, Rubric, ScoreScale, Severity};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subject {
    pub company: String,
    pub framework_title: String,
    pub framework_version: String,
    pub assessment_date: NaiveDate,
    pub source_url: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceItem {
    pub quote: String,
    pub location: String,
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Draft,
    Reviewed,
    #[default]
    Reconciled,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafEntry {
    pub score: u32,
    pub rationale: String,
    /// Empty means no relevant quotes were found.
    pub evidence: Vec<EvidenceItem>,
    pub improvements: Option<String>,
    pub status: EntryStatus,
}

impl LeafEntry {
    pub fn scored(score: u32, rationale: impl Into<String>) -> Self {
        LeafEntry {
            score,
            rationale: rationale.into(),
            evidence: Vec::new(),
            improvements: None,
            status: EntryStatus::Reconciled,
        }
    }
}

/// Key of a published aggregate: the overall total or a rubric node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PublishedKey {
    Total,
    Node(CriterionId),
}

impl Ord for PublishedKey {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PublishedKey::Total, PublishedKey::Total) => Ordering::Equal,
            (PublishedKey::Total, _) => Ordering::Less,
            (_, PublishedKey::Total) => Ordering::Greater,
            (PublishedKey::Node(a), PublishedKey::Node(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for PublishedKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PublishedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PublishedKey::Total => f.write_str("total"),
            PublishedKey::Node(id) => id.fmt(f),
        }
    }
}

impl Serialize for PublishedKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PublishedKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for PublishedKey {
    type Err = crate::rubric::InvalidId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "total" {
            Ok(PublishedKey::Total)
        } else {
            s.parse().map(PublishedKey::Node)
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AssessmentError {
    #[error("malformed assessment document at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("score {score} for {id} is not a point on the scale")]
    OffScale { id: CriterionId, score: u32 },
    #[error("criterion {0} has more than one entry")]
    DuplicateEntry(CriterionId),
    #[error("published value for `{0}` appears more than once")]
    DuplicatePublished(PublishedKey),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assessment {
    pub subject: Subject,
    pub rubric_version: String,
    /// Loadable with missing leaves; scoring rejects it unless missing scores count as zero.
    pub partial: bool,
    pub entries: BTreeMap<CriterionId, LeafEntry>,
    /// Aggregates as printed. Lint input only, never used for scoring.
    pub published: Option<BTreeMap<PublishedKey, i64>>,
}

impl Assessment {
    pub fn new(subject: Subject, rubric_version: impl Into<String>) -> Self {
        Assessment {
            subject,
            rubric_version: rubric_version.into(),
            partial: false,
            entries: BTreeMap::new(),
            published: None,
        }
    }

    /// Parses a document and checks every score against `scale`.
    pub fn parse(document: &str, scale: &ScoreScale) -> Result<Self, AssessmentError> {
        let doc: AssessmentDoc = serde_json::from_str(document).map_err(|e| AssessmentError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut entries = BTreeMap::new();
        for e in doc.entries {
            if !scale.contains(e.score) {
                return Err(AssessmentError::OffScale { id: e.id, score: e.score });
            }
            let entry = LeafEntry {
                score: e.score,
                rationale: e.rationale,
                evidence: e.evidence,
                improvements: e.improvements,
                status: e.status,
            };
            if entries.insert(e.id.clone(), entry).is_some() {
                return Err(AssessmentError::DuplicateEntry(e.id));
            }
        }
        let published = match doc.published {
            None => None,
            Some(pairs) => {
                let mut map = BTreeMap::new();
                for (k, v) in pairs.0 {
                    if map.insert(k.clone(), v).is_some() {
                        return Err(AssessmentError::DuplicatePublished(k));
                    }
                }
                Some(map)
            }
        };
        Ok(Assessment {
            subject: doc.subject,
            rubric_version: doc.rubric_version,
            partial: doc.partial,
            entries,
            published,
        })
    }

    /// Canonical document: fixed key order, entries by id, two-space indent, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let doc = AssessmentDocRef {
            subject: &self.subject,
            rubric_version: &self.rubric_version,
            partial: self.partial,
            entries: self
                .entries
                .iter()
                .map(|(id, e)| EntryDocRef {
                    id,
                    score: e.score,
                    rationale: &e.rationale,
                    evidence: &e.evidence,
                    improvements: &e.improvements,
                    status: e.status,
                })
                .collect(),
            published: self.published.as_ref(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("assessment serializes");
        out.push('\n');
        out
    }

    pub fn score(&self, id: &CriterionId) -> Option<u32> {
        self.entries.get(id).map(|e| e.score)
    }

    pub fn name(&self) -> &str {
        &self.subject.company
    }

    /// Copy with the given leaf scores replaced. Rationale and evidence are kept.
    pub fn with_scores<'a>(&self, scores: impl IntoIterator<Item = (&'a CriterionId, u32)>) -> Assessment {
        let mut out = self.clone();
        for (id, score) in scores {
            match out.entries.get_mut(id) {
                Some(e) => e.score = score,
                None => {
                    out.entries.insert(id.clone(), LeafEntry::scored(score, "Hypothetical score."));
                }
            }
        }
        out
    }

    pub fn published_value(&self, key: &PublishedKey) -> Option<i64> {
        self.published.as_ref()?.get(key).copied()
    }

    /// Reports missing leaves, unknown or interior ids, off-scale scores,
    /// empty rationales and a rubric version mismatch.
    pub fn validate(&self, rubric: &Rubric) -> Vec<AssessmentIssue> {
        let mut out = Vec::new();
        let issue = |severity, node: Option<&CriterionId>, kind| AssessmentIssue {
            severity,
            node: node.cloned(),
            kind,
        };
        if self.rubric_version != rubric.version() {
            out.push(issue(
                Severity::Error,
                None,
                AssessmentIssueKind::RubricVersionMismatch {
                    expected: rubric.version().to_string(),
                    found: self.rubric_version.clone(),
                },
            ));
        }
        for (field, value) in [
            ("company", &self.subject.company),
            ("framework_title", &self.subject.framework_title),
        ] {
            if value.trim().is_empty() {
                out.push(issue(Severity::Error, None, AssessmentIssueKind::EmptySubjectField(field)));
            }
        }
        for leaf in rubric.leaves() {
            if !self.entries.contains_key(&leaf.id) {
                let severity = if self.partial { Severity::Notice } else { Severity::Error };
                out.push(issue(severity, Some(&leaf.id), AssessmentIssueKind::MissingLeaf));
            }
        }
        for (id, entry) in &self.entries {
            match rubric.node(id) {
                None => out.push(issue(Severity::Error, Some(id), AssessmentIssueKind::UnknownId)),
                Some(node) if !node.is_leaf() => {
                    out.push(issue(Severity::Error, Some(id), AssessmentIssueKind::NonLeafEntry))
                }
                Some(_) => {}
            }
            if !rubric.scale().contains(entry.score) {
                out.push(issue(Severity::Error, Some(id), AssessmentIssueKind::OffScale(entry.score)));
            }
            if entry.rationale.trim().is_empty() {
                let severity = if entry.evidence.is_empty() { Severity::Error } else { Severity::Notice };
                out.push(issue(severity, Some(id), AssessmentIssueKind::EmptyRationale));
            }
            if entry
                .evidence
                .iter()
                .any(|e| e.quote.trim().is_empty() || e.location.trim().is_empty())
            {
                out.push(issue(Severity::Error, Some(id), AssessmentIssueKind::IncompleteEvidence));
            }
        }
        if let Some(published) = &self.published {
            for key in published.keys() {
                if let PublishedKey::Node(id) = key {
                    if !rubric.contains(id) {
                        out.push(issue(Severity::Notice, Some(id), AssessmentIssueKind::PublishedUnknownNode));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssessmentIssueKind {
    MissingLeaf,
    UnknownId,
    NonLeafEntry,
    OffScale(u32),
    EmptyRationale,
    IncompleteEvidence,
    EmptySubjectField(&'static str),
    RubricVersionMismatch { expected: String, found: String },
    PublishedUnknownNode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssessmentIssue {
    pub severity: Severity,
    pub node: Option<CriterionId>,
    pub kind: AssessmentIssueKind,
}

impl fmt::Display for AssessmentIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Notice => "notice",
        };
        let at = self.node.as_ref().map_or_else(|| "assessment".to_string(), |n| n.to_string());
        write!(f, "{sev}: {at}: ")?;
        match &self.kind {
            AssessmentIssueKind::MissingLeaf => write!(f, "no entry for this rubric leaf"),
            AssessmentIssueKind::UnknownId => write!(f, "id is not in the rubric"),
            AssessmentIssueKind::NonLeafEntry => write!(f, "entry given for an interior node"),
            AssessmentIssueKind::OffScale(s) => write!(f, "score {s} is not a scale point"),
            AssessmentIssueKind::EmptyRationale => write!(f, "rationale is empty"),
            AssessmentIssueKind::IncompleteEvidence => write!(f, "an evidence item lacks a quote or location"),
            AssessmentIssueKind::EmptySubjectField(field) => write!(f, "subject {field} is empty"),
            AssessmentIssueKind::RubricVersionMismatch { expected, found } => {
                write!(f, "rubric version `{found}` does not match `{expected}`")
            }
            AssessmentIssueKind::PublishedUnknownNode => write!(f, "published value for a node not in the rubric"),
        }
    }
}

pub fn has_errors(issues: &[AssessmentIssue]) -> bool {
    issues.iter().any(|i| i.severity == Severity::Error)
}

// Wire format

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AssessmentDoc {
    subject: Subject,
    rubric_version: String,
    #[serde(default)]
    partial: bool,
    entries: Vec<EntryDoc>,
    #[serde(default)]
    published: Option<PublishedPairs>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    id: CriterionId,
    score: u32,
    rationale: String,
    evidence: Vec<EvidenceItem>,
    improvements: Option<String>,
    status: EntryStatus,
}

/// Keeps duplicate keys visible instead of letting the last one win.
struct PublishedPairs(Vec<(PublishedKey, i64)>);

impl<'de> Deserialize<'de> for PublishedPairs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visit;
        impl<'de> serde::de::Visitor<'de> for Visit {
            type Value = PublishedPairs;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of node id to integer percent")
            }
            fn visit_map<A: serde::de::MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry()? {
                    out.push((k, v));
                }
                Ok(PublishedPairs(out))
            }
        }
        deserializer.deserialize_map(Visit)
    }
}

#[derive(Serialize)]
struct AssessmentDocRef<'a> {
    subject: &'a Subject,
    rubric_version: &'a str,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    partial: bool,
    entries: Vec<EntryDocRef<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    published: Option<&'a BTreeMap<PublishedKey, i64>>,
}

#[derive(Serialize)]
struct EntryDocRef<'a> {
    id: &'a CriterionId,
    score: u32,
    rationale: &'a str,
    evidence: &'a [EvidenceItem],
    improvements: &'a Option<String>,
    status: EntryStatus,
}
