//! Cross-assessment computations: best-in-class composite, ranking, version
//! diffs, what-if scenarios, the improvement frontier and consistency lint.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::assessment::{Assessment, EntryStatus, LeafEntry, PublishedKey, Subject};
use crate::exact::{serialize_exact, Exact};
use crate::rubric::{AggregationRule, CriterionId, Rubric};
use crate::scoring::{leaf_score, score_tree, AggregateReport, ScoringError, ScoringOptions};

pub const BEST_IN_CLASS: &str = "Best in class";

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("at least one assessment is required")]
    Empty,
    #[error("assessments target different rubric versions (`{0}` and `{1}`)")]
    MixedVersions(String, String),
    #[error("{0} is not a rubric leaf")]
    UnknownLeaf(CriterionId),
    #[error("override score {score} for {id} is not a scale point")]
    OffScale { id: CriterionId, score: u32 },
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

fn same_version<'a>(mut versions: impl Iterator<Item = &'a str>) -> Result<(), AnalyticsError> {
    let Some(first) = versions.next() else {
        return Err(AnalyticsError::Empty);
    };
    for v in versions {
        if v != first {
            return Err(AnalyticsError::MixedVersions(first.to_string(), v.to_string()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BestInClass {
    /// Leafwise maximum, as a synthetic assessment.
    #[serde(skip)]
    pub composite: Assessment,
    /// Companies holding the maximum at each leaf.
    pub sources: BTreeMap<CriterionId, Vec<String>>,
    pub report: AggregateReport,
}

impl BestInClass {
    pub fn leaf_scores(&self) -> BTreeMap<CriterionId, u32> {
        self.composite.entries.iter().map(|(id, e)| (id.clone(), e.score)).collect()
    }
}

/// Leafwise maximum across `assessments`, scored through the rubric.
pub fn best_in_class(
    rubric: &Rubric,
    assessments: &[Assessment],
    options: ScoringOptions,
) -> Result<BestInClass, AnalyticsError> {
    same_version(assessments.iter().map(|a| a.rubric_version.as_str()))?;
    let mut entries = BTreeMap::new();
    let mut sources = BTreeMap::new();
    for leaf in rubric.leaves() {
        let mut best = 0;
        let mut holders: Vec<String> = Vec::new();
        for a in assessments {
            let score = leaf_score(rubric, a, &leaf.id, options)?;
            if score > best || holders.is_empty() {
                best = score;
                holders.clear();
            }
            if score == best {
                holders.push(a.name().to_string());
            }
        }
        holders.sort();
        holders.dedup();
        let entry = LeafEntry {
            score: best,
            rationale: format!("Highest score among: {}.", holders.join(", ")),
            evidence: Vec::new(),
            improvements: None,
            status: EntryStatus::Reconciled,
        };
        entries.insert(leaf.id.clone(), entry);
        sources.insert(leaf.id.clone(), holders);
    }
    let composite = Assessment {
        subject: Subject {
            company: BEST_IN_CLASS.to_string(),
            framework_title: "Leafwise maximum across assessments".to_string(),
            framework_version: String::new(),
            assessment_date: assessments.iter().map(|a| a.subject.assessment_date).max().expect("nonempty"),
            source_url: None,
        },
        rubric_version: assessments[0].rubric_version.clone(),
        partial: false,
        entries,
        published: None,
    };
    let report = score_tree(rubric, &composite, options)?;
    Ok(BestInClass {
        composite,
        sources,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankedEntry {
    pub rank: usize,
    pub name: String,
    #[serde(serialize_with = "serialize_exact")]
    pub total_exact: Exact,
    pub total_display: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionLeader {
    pub dimension: CriterionId,
    pub leader: String,
    #[serde(serialize_with = "serialize_exact")]
    pub exact: Exact,
    pub display: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ranking {
    pub ordering: Vec<RankedEntry>,
    /// Median of the display totals.
    #[serde(serialize_with = "serialize_exact")]
    pub median: Exact,
    pub dimension_leaders: Vec<DimensionLeader>,
}

/// Orders by exact total descending, then name ascending.
pub fn rank_and_stats(reports: &[AggregateReport]) -> Result<Ranking, AnalyticsError> {
    if reports.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let mut sorted: Vec<&AggregateReport> = reports.iter().collect();
    sorted.sort_by(|a, b| b.total_exact.cmp(&a.total_exact).then_with(|| a.name().cmp(b.name())));
    let ordering = sorted
        .iter()
        .enumerate()
        .map(|(i, r)| RankedEntry {
            rank: i + 1,
            name: r.name().to_string(),
            total_exact: r.total_exact.clone(),
            total_display: r.total_display,
        })
        .collect();

    let mut displays: Vec<i64> = reports.iter().map(|r| r.total_display).collect();
    displays.sort_unstable();
    let n = displays.len();
    let median = if n % 2 == 1 {
        BigRational::from_integer(BigInt::from(displays[n / 2]))
    } else {
        BigRational::new(BigInt::from(displays[n / 2 - 1] + displays[n / 2]), BigInt::from(2))
    };

    // Dimensions are the depth-one nodes of the first report, in order.
    let dimensions: Vec<CriterionId> = reports[0]
        .nodes
        .iter()
        .filter(|n| n.node_id.depth() == 1)
        .map(|n| n.node_id.clone())
        .collect();
    let dimension_leaders = dimensions
        .into_iter()
        .filter_map(|dim| {
            sorted
                .iter()
                .filter_map(|r| r.node(&dim).map(|n| (r, n)))
                .min_by(|(ra, a), (rb, b)| b.exact.cmp(&a.exact).then_with(|| ra.name().cmp(rb.name())))
                .map(|(r, n)| DimensionLeader {
                    dimension: dim.clone(),
                    leader: r.name().to_string(),
                    exact: n.exact.clone(),
                    display: n.display,
                })
        })
        .collect();
    Ok(Ranking {
        ordering,
        median,
        dimension_leaders,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeafDelta {
    pub criterion_id: CriterionId,
    pub base: u32,
    pub head: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeDelta {
    pub node_id: CriterionId,
    #[serde(serialize_with = "serialize_exact")]
    pub delta: Exact,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Attribution {
    pub criterion_id: CriterionId,
    /// Change in the total when only this leaf is applied to the base.
    #[serde(serialize_with = "serialize_exact")]
    pub contribution: Exact,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub base: String,
    pub head: String,
    pub leaf_deltas: Vec<LeafDelta>,
    /// Nodes whose exact score changed, in rubric order.
    pub node_deltas: Vec<NodeDelta>,
    #[serde(serialize_with = "serialize_exact")]
    pub total_delta: Exact,
    pub attributions: Vec<Attribution>,
    /// Override nodes whose winning branch differs between base and head
    /// or under any single-leaf substitution.
    pub branch_switches: Vec<CriterionId>,
    /// True when attributions need not sum to `total_delta`.
    pub nonadditive: bool,
}

impl DiffReport {
    pub fn attribution_sum(&self) -> Exact {
        self.attributions.iter().fold(Exact::zero(), |acc, a| acc + &a.contribution)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Branch {
    Mean,
    Verifier,
}

/// Which branch wins at each override node. A tie counts as the weighted mean.
fn winning_branches(rubric: &Rubric, report: &AggregateReport) -> BTreeMap<CriterionId, Branch> {
    let mut out = BTreeMap::new();
    for node in rubric.nodes() {
        if let AggregationRule::VerifiedOverride { verifier } = &node.rule {
            let Some(v) = report.exact(verifier) else {
                continue;
            };
            let mean_won = rubric
                .normalized_weights(node)
                .ok()
                .map(|ws| {
                    ws.iter().fold(Exact::zero(), |acc, (id, w)| {
                        acc + w * report.exact(id).cloned().unwrap_or_else(Exact::zero)
                    })
                })
                .is_some_and(|mean| &mean >= v);
            out.insert(node.id.clone(), if mean_won { Branch::Mean } else { Branch::Verifier });
        }
    }
    out
}

/// Leaf-level changes from `base` to `head` with single-leaf attribution.
pub fn diff(
    rubric: &Rubric,
    base: &Assessment,
    head: &Assessment,
    options: ScoringOptions,
) -> Result<DiffReport, AnalyticsError> {
    same_version([base.rubric_version.as_str(), head.rubric_version.as_str()].into_iter())?;
    let base_report = score_tree(rubric, base, options)?;
    let head_report = score_tree(rubric, head, options)?;
    let base_branches = winning_branches(rubric, &base_report);

    let mut leaf_deltas = Vec::new();
    for leaf in rubric.leaves() {
        let b = leaf_score(rubric, base, &leaf.id, options)?;
        let h = leaf_score(rubric, head, &leaf.id, options)?;
        if b != h {
            leaf_deltas.push(LeafDelta {
                criterion_id: leaf.id.clone(),
                base: b,
                head: h,
            });
        }
    }

    let mut switched = std::collections::BTreeSet::new();
    let mut note_switches = |report: &AggregateReport| {
        for (id, branch) in winning_branches(rubric, report) {
            if base_branches.get(&id) != Some(&branch) {
                switched.insert(id);
            }
        }
    };
    note_switches(&head_report);

    let mut attributions = Vec::new();
    for d in &leaf_deltas {
        let single = base.with_scores([(&d.criterion_id, d.head)]);
        let report = score_tree(rubric, &single, options)?;
        note_switches(&report);
        attributions.push(Attribution {
            criterion_id: d.criterion_id.clone(),
            contribution: &report.total_exact - &base_report.total_exact,
        });
    }

    let node_deltas = base_report
        .nodes
        .iter()
        .zip(&head_report.nodes)
        .filter(|(b, h)| b.exact != h.exact)
        .map(|(b, h)| NodeDelta {
            node_id: b.node_id.clone(),
            delta: &h.exact - &b.exact,
        })
        .collect();
    let total_delta = &head_report.total_exact - &base_report.total_exact;
    let sum = attributions.iter().fold(Exact::zero(), |acc, a| acc + &a.contribution);
    let branch_switches: Vec<CriterionId> = switched.into_iter().collect();
    Ok(DiffReport {
        base: base.name().to_string(),
        head: head.name().to_string(),
        leaf_deltas,
        node_deltas,
        nonadditive: !branch_switches.is_empty() || sum != total_delta,
        total_delta,
        attributions,
        branch_switches,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WhatIfResult {
    pub overrides: BTreeMap<CriterionId, u32>,
    pub report: AggregateReport,
    #[serde(serialize_with = "serialize_exact")]
    pub total_delta: Exact,
}

fn check_overrides(rubric: &Rubric, overrides: &BTreeMap<CriterionId, u32>) -> Result<(), AnalyticsError> {
    for (id, &score) in overrides {
        if !rubric.is_leaf(id) {
            return Err(AnalyticsError::UnknownLeaf(id.clone()));
        }
        if !rubric.scale().contains(score) {
            return Err(AnalyticsError::OffScale { id: id.clone(), score });
        }
    }
    Ok(())
}

/// Scores `assessment` with the given leaves replaced.
pub fn what_if(
    rubric: &Rubric,
    assessment: &Assessment,
    overrides: &BTreeMap<CriterionId, u32>,
    options: ScoringOptions,
) -> Result<WhatIfResult, AnalyticsError> {
    check_overrides(rubric, overrides)?;
    let before = score_tree(rubric, assessment, options)?;
    let mutated = assessment.with_scores(overrides.iter().map(|(id, s)| (id, *s)));
    let report = score_tree(rubric, &mutated, options)?;
    Ok(WhatIfResult {
        overrides: overrides.clone(),
        total_delta: &report.total_exact - &before.total_exact,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrontierCandidate {
    pub criterion_id: CriterionId,
    pub current: u32,
    pub target: u32,
    /// Total-score gain from raising only this leaf to its target.
    #[serde(serialize_with = "serialize_exact")]
    pub gain: Exact,
    /// Peers that already reach the target.
    pub exemplars: Vec<String>,
}

/// Leaves where some peer scores higher, ranked by total gain.
pub fn improvement_frontier(
    rubric: &Rubric,
    assessment: &Assessment,
    peers: &[Assessment],
    options: ScoringOptions,
) -> Result<Vec<FrontierCandidate>, AnalyticsError> {
    let bic = best_in_class(rubric, peers, options)?;
    same_version([assessment.rubric_version.as_str(), bic.composite.rubric_version.as_str()].into_iter())?;
    let base = score_tree(rubric, assessment, options)?;
    let mut out = Vec::new();
    for (id, entry) in &bic.composite.entries {
        let current = leaf_score(rubric, assessment, id, options)?;
        if entry.score > current {
            let raised = assessment.with_scores([(id, entry.score)]);
            let report = score_tree(rubric, &raised, options)?;
            out.push(FrontierCandidate {
                criterion_id: id.clone(),
                current,
                target: entry.score,
                gain: &report.total_exact - &base.total_exact,
                exemplars: bic.sources[id].clone(),
            });
        }
    }
    out.sort_by(|a, b| b.gain.cmp(&a.gain).then_with(|| a.criterion_id.cmp(&b.criterion_id)));
    Ok(out)
}

/// Every frontier target applied at once.
pub fn frontier_overrides(candidates: &[FrontierCandidate]) -> BTreeMap<CriterionId, u32> {
    candidates.iter().map(|c| (c.criterion_id.clone(), c.target)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LintFinding {
    pub node_id: PublishedKey,
    pub published: i64,
    pub recomputed_display: i64,
    #[serde(serialize_with = "serialize_exact")]
    pub recomputed_exact: Exact,
    pub excess: i64,
}

pub const DEFAULT_TOLERANCE: i64 = 1;

/// Published aggregates of `assessment` that differ from recomputation by more than `tolerance`.
pub fn lint_consistency(
    rubric: &Rubric,
    assessment: &Assessment,
    tolerance: i64,
    options: ScoringOptions,
) -> Result<Vec<LintFinding>, AnalyticsError> {
    let report = score_tree(rubric, assessment, options)?;
    Ok(match &assessment.published {
        Some(published) => lint_against(&report, published, tolerance),
        None => Vec::new(),
    })
}

/// Compares a report with any set of printed values. Keys absent from the report are skipped.
pub fn lint_against(
    report: &AggregateReport,
    published: &BTreeMap<PublishedKey, i64>,
    tolerance: i64,
) -> Vec<LintFinding> {
    let mut out = Vec::new();
    for (key, &value) in published {
        let (exact, display) = match key {
            PublishedKey::Total => (&report.total_exact, report.total_display),
            PublishedKey::Node(id) => match report.node(id) {
                Some(n) => (&n.exact, n.display),
                None => continue,
            },
        };
        let excess = (value - display).abs();
        if excess > tolerance {
            out.push(LintFinding {
                node_id: key.clone(),
                published: value,
                recomputed_display: display,
                recomputed_exact: exact.clone(),
                excess,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::rubric::cid;

    fn q(n: i64, d: i64) -> Exact {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn all() -> (Rubric, Vec<Assessment>) {
        let r = bundled::rubric().unwrap();
        let a = bundled::assessments(&r).unwrap().into_iter().map(|(_, a)| a).collect();
        (r, a)
    }

    fn one(r: &Rubric, slug: &str) -> Assessment {
        bundled::assessment(r, slug).unwrap().unwrap()
    }

    #[test]
    fn best_in_class_takes_leafwise_max() {
        let (r, all) = all();
        let bic = best_in_class(&r, &all, Default::default()).unwrap();
        assert_eq!(bic.composite.score(&cid("3.2.1.2")), Some(100));
        assert!(bic.sources[&cid("3.2.1.2")].contains(&"Anthropic".to_string()));
        let single = best_in_class(&r, &all[..1], Default::default()).unwrap();
        let own = score_tree(&r, &all[0], Default::default()).unwrap();
        assert_eq!(single.report.nodes, own.nodes);
        assert_eq!(single.report.total_exact, own.total_exact);
        assert!(matches!(best_in_class(&r, &[], Default::default()), Err(AnalyticsError::Empty)));
    }

    #[test]
    fn mixed_versions_are_rejected() {
        let (r, mut all) = all();
        all[1].rubric_version = "other".into();
        assert!(matches!(
            best_in_class(&r, &all, Default::default()),
            Err(AnalyticsError::MixedVersions(..))
        ));
    }

    #[test]
    fn ranking_and_median() {
        let (r, all) = all();
        let reports: Vec<_> = all.iter().map(|a| score_tree(&r, a, Default::default()).unwrap()).collect();
        let ranking = rank_and_stats(&reports).unwrap();
        assert_eq!(ranking.ordering[0].name, "Anthropic");
        assert_eq!(ranking.ordering[1].name, "OpenAI");
        assert_eq!(ranking.median, q(37, 2));
        assert_eq!(ranking.dimension_leaders[3].leader, "Anthropic");
        let single = rank_and_stats(&reports[..1]).unwrap();
        assert_eq!(single.median, q(reports[0].total_display, 1));
    }

    #[test]
    fn ranking_ties_break_by_name() {
        let r = bundled::rubric().unwrap();
        let a = one(&r, "naver");
        let mut b = a.clone();
        b.subject.company = "Aardvark".into();
        let ra = score_tree(&r, &a, Default::default()).unwrap();
        let rb = score_tree(&r, &b, Default::default()).unwrap();
        let ranking = rank_and_stats(&[ra, rb]).unwrap();
        assert_eq!(ranking.ordering[0].name, "Aardvark");
    }

    #[test]
    fn diff_single_leaf_attribution() {
        let r = bundled::rubric().unwrap();
        let base = one(&r, "anthropic");
        let head = base.with_scores([(&cid("3.2.1.2"), 0)]);
        let d = diff(&r, &base, &head, Default::default()).unwrap();
        assert_eq!(d.leaf_deltas.len(), 1);
        assert_eq!(d.attributions[0].contribution, q(-5, 4));
        assert_eq!(d.total_delta, q(-5, 4));
        assert!(!d.nonadditive);
        let same = diff(&r, &base, &base, Default::default()).unwrap();
        assert!(same.leaf_deltas.is_empty() && same.node_deltas.is_empty());
        assert!(same.total_delta.is_zero());
    }

    #[test]
    fn diff_flags_override_branch_switch() {
        let r = bundled::rubric().unwrap();
        let base = one(&r, "amazon");
        let head = base.with_scores([(&cid("3.1.1.3"), 75)]);
        let d = diff(&r, &base, &head, Default::default()).unwrap();
        assert_eq!(d.branch_switches, vec![cid("3.1.1")]);
        assert!(d.nonadditive);
        let node = d.node_deltas.iter().find(|n| n.node_id == cid("3.1.1")).unwrap();
        assert_eq!(node.delta, q(1, 1));
    }

    #[test]
    fn what_if_amazon() {
        let r = bundled::rubric().unwrap();
        let a = one(&r, "amazon");
        let o: BTreeMap<_, _> = [(cid("2.2.4"), 75)].into();
        let w = what_if(&r, &a, &o, Default::default()).unwrap();
        assert_eq!(w.total_delta, q(13, 8));
        assert!(what_if(&r, &a, &BTreeMap::new(), Default::default()).unwrap().total_delta.is_zero());
        let bad: BTreeMap<_, _> = [(cid("2.2.4"), 37)].into();
        assert!(matches!(what_if(&r, &a, &bad, Default::default()), Err(AnalyticsError::OffScale { .. })));
        let interior: BTreeMap<_, _> = [(cid("2.2"), 50)].into();
        assert!(matches!(
            what_if(&r, &a, &interior, Default::default()),
            Err(AnalyticsError::UnknownLeaf(_))
        ));
    }

    #[test]
    fn frontier_is_sorted_and_empty_at_the_top() {
        let (r, all) = all();
        let cohere = one(&r, "cohere");
        let f = improvement_frontier(&r, &cohere, &all, Default::default()).unwrap();
        assert!(!f.is_empty());
        assert!(f.windows(2).all(|w| w[0].gain >= w[1].gain));
        let bic = best_in_class(&r, &all, Default::default()).unwrap();
        assert!(improvement_frontier(&r, &bic.composite, &all, Default::default()).unwrap().is_empty());
    }

    #[test]
    fn lint_fixtures() {
        let r = bundled::rubric().unwrap();
        let anthropic = lint_consistency(&r, &one(&r, "anthropic"), 1, Default::default()).unwrap();
        let f = anthropic.iter().find(|f| f.node_id == PublishedKey::Node(cid("3.1.3"))).unwrap();
        assert_eq!((f.published, f.recomputed_display), (14, 16));
        let amazon = lint_consistency(&r, &one(&r, "amazon"), 1, Default::default()).unwrap();
        let f = amazon.iter().find(|f| f.node_id == PublishedKey::Node(cid("4.5"))).unwrap();
        assert_eq!((f.published, f.recomputed_display), (20, 17));
        assert!(!amazon.iter().any(|f| f.node_id == PublishedKey::Node(cid("3.1.1"))));
    }

    #[test]
    fn lint_tolerance_extremes() {
        let r = bundled::rubric().unwrap();
        let a = one(&r, "meta");
        assert!(lint_consistency(&r, &a, i64::MAX, Default::default()).unwrap().is_empty());
        let all = lint_consistency(&r, &a, -1, Default::default()).unwrap();
        assert_eq!(all.len(), a.published.as_ref().unwrap().len());
    }
}
