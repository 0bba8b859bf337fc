//! Exact aggregation of leaf scores up the rubric tree.
//!
//! Every node is computed on rationals. Rounding to a display percent happens
//! once per node, after the exact value is known, and never feeds back.

use num_traits::Zero;
use serde::Serialize;

use crate::assessment::{Assessment, Subject};
use crate::exact::{self, serialize_exact, Exact};
use crate::rubric::{AggregationRule, CriterionId, CriterionNode, Rubric, RubricError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScoringOptions {
    /// Treat leaves without an entry as 0 instead of failing.
    pub missing_as_zero: bool,
}

impl ScoringOptions {
    pub fn missing_as_zero() -> Self {
        ScoringOptions { missing_as_zero: true }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScoringError {
    #[error("no entry for leaf {0}")]
    MissingEntry(CriterionId),
    #[error("{0} is not a rubric leaf")]
    NotALeaf(CriterionId),
    #[error("unknown criterion id {0}")]
    UnknownId(CriterionId),
    #[error("score {score} for {id} is not a scale point")]
    OffScale { id: CriterionId, score: u32 },
    #[error("assessment is marked partial; score it with missing leaves counted as zero")]
    Partial,
    #[error("assessment targets rubric `{found}` but the rubric is `{expected}`")]
    RubricVersion { expected: String, found: String },
    #[error(transparent)]
    Rubric(#[from] RubricError),
    #[error("verifier {verifier} named by {node} is not one of its children")]
    MissingVerifier { node: CriterionId, verifier: CriterionId },
}

/// Nearest integer percent, ties rounding up.
pub fn display_round(value: &Exact) -> i64 {
    exact::round_half_up(value)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeScore {
    pub node_id: CriterionId,
    #[serde(serialize_with = "serialize_exact")]
    pub exact: Exact,
    pub display: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AggregateReport {
    pub subject: Subject,
    pub rubric_version: String,
    #[serde(serialize_with = "serialize_exact")]
    pub total_exact: Exact,
    pub total_display: i64,
    /// Depth-first rubric order.
    pub nodes: Vec<NodeScore>,
}

impl AggregateReport {
    pub fn node(&self, id: &CriterionId) -> Option<&NodeScore> {
        self.nodes.iter().find(|n| &n.node_id == id)
    }

    pub fn exact(&self, id: &CriterionId) -> Option<&Exact> {
        self.node(id).map(|n| &n.exact)
    }

    pub fn display(&self, id: &CriterionId) -> Option<i64> {
        self.node(id).map(|n| n.display)
    }

    pub fn name(&self) -> &str {
        &self.subject.company
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

/// The entry's score, unchanged. With `missing_as_zero`, an absent entry reads as 0.
pub fn leaf_score(
    rubric: &Rubric,
    assessment: &Assessment,
    id: &CriterionId,
    options: ScoringOptions,
) -> Result<u32, ScoringError> {
    let node = rubric.node(id).ok_or_else(|| ScoringError::UnknownId(id.clone()))?;
    if !node.is_leaf() {
        return Err(ScoringError::NotALeaf(id.clone()));
    }
    match assessment.score(id) {
        Some(score) if rubric.scale().contains(score) => Ok(score),
        Some(score) => Err(ScoringError::OffScale { id: id.clone(), score }),
        None if options.missing_as_zero => Ok(0),
        None => Err(ScoringError::MissingEntry(id.clone())),
    }
}

/// Exact score of any node: leaf score, weighted mean, or verified override.
pub fn node_score(
    rubric: &Rubric,
    assessment: &Assessment,
    id: &CriterionId,
    options: ScoringOptions,
) -> Result<Exact, ScoringError> {
    check_partial(assessment, options)?;
    let node = rubric.node(id).ok_or_else(|| ScoringError::UnknownId(id.clone()))?;
    Scorer { rubric, assessment, options, out: None }.score(node)
}

/// Scores every node plus the total.
pub fn score_tree(
    rubric: &Rubric,
    assessment: &Assessment,
    options: ScoringOptions,
) -> Result<AggregateReport, ScoringError> {
    check_partial(assessment, options)?;
    if assessment.rubric_version != rubric.version() {
        return Err(ScoringError::RubricVersion {
            expected: rubric.version().to_string(),
            found: assessment.rubric_version.clone(),
        });
    }
    let mut nodes = Vec::with_capacity(rubric.node_count());
    let mut scorer = Scorer {
        rubric,
        assessment,
        options,
        out: Some(&mut nodes),
    };
    let dims = rubric
        .dimensions()
        .iter()
        .map(|d| scorer.score(d))
        .collect::<Result<Vec<_>, _>>()?;
    let total = rubric
        .dimension_weights()?
        .iter()
        .zip(&dims)
        .fold(Exact::zero(), |acc, (w, s)| acc + w * s);
    Ok(AggregateReport {
        subject: assessment.subject.clone(),
        rubric_version: rubric.version().to_string(),
        total_display: display_round(&total),
        total_exact: total,
        nodes,
    })
}

fn check_partial(assessment: &Assessment, options: ScoringOptions) -> Result<(), ScoringError> {
    if assessment.partial && !options.missing_as_zero {
        return Err(ScoringError::Partial);
    }
    Ok(())
}

struct Scorer<'a, 'o> {
    rubric: &'a Rubric,
    assessment: &'a Assessment,
    options: ScoringOptions,
    /// When present, every visited node is appended in pre-order.
    out: Option<&'o mut Vec<NodeScore>>,
}

impl Scorer<'_, '_> {
    fn score(&mut self, node: &CriterionNode) -> Result<Exact, ScoringError> {
        let slot = self.out.as_mut().map(|out| {
            out.push(NodeScore {
                node_id: node.id.clone(),
                exact: Exact::zero(),
                display: 0,
            });
            out.len() - 1
        });
        let value = if node.is_leaf() {
            exact::from_int(leaf_score(self.rubric, self.assessment, &node.id, self.options)?.into())
        } else {
            let mut mean = Exact::zero();
            for (child_id, weight) in self.rubric.normalized_weights(node)? {
                let child = node.children.iter().find(|c| c.id == child_id).expect("weighted child");
                mean += weight * self.score(child)?;
            }
            match &node.rule {
                AggregationRule::WeightedMean => mean,
                AggregationRule::VerifiedOverride { verifier } => {
                    let child = node.verifier_child().ok_or_else(|| ScoringError::MissingVerifier {
                        node: node.id.clone(),
                        verifier: verifier.clone(),
                    })?;
                    let verified = self.score(child)?;
                    if verified > mean {
                        verified
                    } else {
                        mean
                    }
                }
            }
        };
        if let (Some(out), Some(i)) = (self.out.as_mut(), slot) {
            out[i].display = display_round(&value);
            out[i].exact = value.clone();
        }
        Ok(value)
    }
}
