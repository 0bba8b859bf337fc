//! Inter-rater comparison. Disagreements are reported, never resolved.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::rubric::{CriterionId, Rubric};

/// One rater's independent leaf scores.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaterSheet {
    pub rater_id: String,
    pub scores: BTreeMap<CriterionId, u32>,
}

impl RaterSheet {
    pub fn parse(document: &str) -> Result<Self, ReconcileError> {
        serde_json::from_str(document).map_err(|e| ReconcileError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RaterScore {
    pub rater_id: String,
    pub score: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub criterion_id: CriterionId,
    /// Sorted by rater id.
    pub scores: Vec<RaterScore>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Reconciliation {
    pub disagreements: Vec<Disagreement>,
    /// Draft scores for unanimous leaves only.
    pub merged: BTreeMap<CriterionId, u32>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReconcileError {
    #[error("malformed rater sheet at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("at least one rater sheet is required")]
    NoSheets,
    #[error("rater `{rater}` scores {id}, which is not a rubric leaf")]
    NotALeaf { rater: String, id: CriterionId },
    #[error("rater `{rater}` gives {id} the off-scale score {score}")]
    OffScale { rater: String, id: CriterionId, score: u32 },
    #[error("rater `{rater}` covers a different leaf set than rater `{reference}`")]
    Coverage { rater: String, reference: String },
}

/// Compares sheets leaf by leaf. Any two differing scale points make a
/// disagreement, whatever the majority.
pub fn reconcile(sheets: &[RaterSheet], rubric: &Rubric) -> Result<Reconciliation, ReconcileError> {
    let mut sorted: Vec<&RaterSheet> = sheets.iter().collect();
    sorted.sort_by(|a, b| (&a.rater_id, &a.scores).cmp(&(&b.rater_id, &b.scores)));
    let reference = *sorted.first().ok_or(ReconcileError::NoSheets)?;

    for sheet in &sorted {
        for (id, &score) in &sheet.scores {
            if !rubric.is_leaf(id) {
                return Err(ReconcileError::NotALeaf {
                    rater: sheet.rater_id.clone(),
                    id: id.clone(),
                });
            }
            if !rubric.scale().contains(score) {
                return Err(ReconcileError::OffScale {
                    rater: sheet.rater_id.clone(),
                    id: id.clone(),
                    score,
                });
            }
        }
    }
    let leaf_set: BTreeSet<&CriterionId> = reference.scores.keys().collect();
    for sheet in &sorted[1..] {
        if sheet.scores.keys().collect::<BTreeSet<_>>() != leaf_set {
            return Err(ReconcileError::Coverage {
                rater: sheet.rater_id.clone(),
                reference: reference.rater_id.clone(),
            });
        }
    }

    let mut out = Reconciliation::default();
    for id in leaf_set {
        let first = reference.scores[id];
        if sorted.iter().all(|s| s.scores[id] == first) {
            out.merged.insert(id.clone(), first);
        } else {
            out.disagreements.push(Disagreement {
                criterion_id: id.clone(),
                scores: sorted
                    .iter()
                    .map(|s| RaterScore {
                        rater_id: s.rater_id.clone(),
                        score: s.scores[id],
                    })
                    .collect(),
            });
        }
    }
    Ok(out)
}
