//! Library results checked against independent recomputation from the raw JSON.

mod common;

use std::collections::BTreeMap;

use common::*;
use fsf_rubric::analytics::{self, diff, improvement_frontier, what_if};
use fsf_rubric::reconcile::{reconcile, RaterSheet};
use fsf_rubric::report::{render_comparison, Format};
use fsf_rubric::rubric::{CriterionNode, RubricError, ScoreScale};
use fsf_rubric::{bundled, cid, score_tree, Assessment, Exact, Rubric};
use num_traits::Zero;

fn rubric() -> Rubric {
    bundled::rubric().unwrap()
}

fn load(r: &Rubric, slug: &str) -> Assessment {
    bundled::assessment(r, slug).unwrap().unwrap()
}

fn all(r: &Rubric) -> Vec<Assessment> {
    bundled::assessments(r).unwrap().into_iter().map(|(_, a)| a).collect()
}

#[test]
fn every_bundled_node_matches_the_oracle() {
    let r = rubric();
    let dims = oracle_rubric(bundled::RUBRIC_JSON);
    for (slug, doc) in bundled::ASSESSMENTS {
        let scores = oracle_scores(doc);
        let report = score_tree(&r, &load(&r, slug), Default::default()).unwrap();
        for node in &report.nodes {
            let expected = oracle_value(oracle_find(&dims, &node.node_id.to_string()).unwrap(), &scores);
            assert_eq!(node.exact, expected, "{slug} {}", node.node_id);
            assert_eq!(node.display, oracle_round(&expected));
        }
        assert_eq!(report.total_exact, oracle_total(&dims, &scores), "{slug}");
    }
}

#[test]
fn effective_weight_examples() {
    let r = rubric();
    assert_eq!(r.effective_weight(&cid("2.2.4")).unwrap(), q(325, 10000));
    assert_eq!(r.effective_weight(&cid("1")).unwrap(), q(1, 4));
    let expected = q(25, 100) * q(35, 100) * q(80, 100) * q(33, 99);
    assert_eq!(r.effective_weight(&cid("2.1.1.1")).unwrap(), expected);
    assert!(matches!(r.effective_weight(&cid("3.1.1.3")), Err(RubricError::ConditionalWeight(_))));
    assert!(matches!(r.effective_weight(&cid("9.9")), Err(RubricError::UnknownId(_))));
}

/// With one leaf at 100 and every other leaf at 0, the total is that leaf's
/// linear coefficient (the weighted mean wins every override node it touches).
#[test]
fn effective_weights_match_unit_probes() {
    let r = rubric();
    let dims = oracle_rubric(bundled::RUBRIC_JSON);
    let leaves = r.leaf_ids();
    let mut sum = Exact::zero();
    for leaf in &leaves {
        let Ok(w) = r.effective_weight(leaf) else {
            continue;
        };
        let scores: BTreeMap<String, i64> = leaves
            .iter()
            .map(|l| (l.to_string(), if l == leaf { 100 } else { 0 }))
            .collect();
        assert_eq!(oracle_total(&dims, &scores) / q(100, 1), w, "{leaf}");
        sum += w;
    }
    assert_eq!(sum, q(1, 1));
}

#[test]
fn reconcile_never_resolves_by_majority() {
    let leaf = CriterionNode::leaf(cid("1"), "only", q(100, 1));
    let r = Rubric::new("one", ScoreScale::standard(), vec![leaf]).unwrap();
    for a in SCALE {
        for b in SCALE {
            for c in SCALE {
                let sheets: Vec<RaterSheet> = [("x", a), ("y", b), ("z", c)]
                    .iter()
                    .map(|(who, s)| RaterSheet {
                        rater_id: who.to_string(),
                        scores: [(cid("1"), *s)].into(),
                    })
                    .collect();
                let out = reconcile(&sheets, &r).unwrap();
                let unanimous = a == b && b == c;
                assert_eq!(out.disagreements.is_empty(), unanimous, "{a} {b} {c}");
                assert_eq!(out.merged.get(&cid("1")).copied(), unanimous.then_some(a));
            }
        }
    }
}

#[test]
fn what_if_amazon_matches_recompute() {
    let r = rubric();
    let dims = oracle_rubric(bundled::RUBRIC_JSON);
    let mut scores = oracle_scores(bundled::assessment_document("amazon").unwrap());
    let before = oracle_total(&dims, &scores);
    scores.insert("2.2.4".into(), 75);
    let oracle_delta = oracle_total(&dims, &scores) - before;
    assert_eq!(oracle_delta, q(1625, 1000));
    let overrides = [(cid("2.2.4"), 75)].into();
    let w = what_if(&r, &load(&r, "amazon"), &overrides, Default::default()).unwrap();
    assert_eq!(w.total_delta, oracle_delta);
}

#[test]
fn lowering_anthropic_evaluation_frequency() {
    let r = rubric();
    let base = load(&r, "anthropic");
    let head = base.with_scores([(&cid("3.2.1.2"), 0)]);
    let d = diff(&r, &base, &head, Default::default()).unwrap();
    let dims = oracle_rubric(bundled::RUBRIC_JSON);
    let mut scores = oracle_scores(bundled::assessment_document("anthropic").unwrap());
    let before = oracle_total(&dims, &scores);
    scores.insert("3.2.1.2".into(), 0);
    let expected = oracle_total(&dims, &scores) - before;
    assert_eq!(expected, q(-125, 100));
    assert_eq!(d.attributions[0].contribution, expected);
}

#[test]
fn raising_amazon_verifier_switches_branch() {
    let r = rubric();
    let base = load(&r, "amazon");
    // 80 is not a scale point; the nearest admissible values bracket it
    let bad = [(cid("3.1.1.3"), 80)].into();
    assert!(matches!(
        what_if(&r, &base, &bad, Default::default()),
        Err(analytics::AnalyticsError::OffScale { .. })
    ));
    let head = base.with_scores([(&cid("3.1.1.3"), 90)]);
    let d = diff(&r, &base, &head, Default::default()).unwrap();
    let node = d.node_deltas.iter().find(|n| n.node_id == cid("3.1.1")).unwrap();
    assert_eq!(node.delta, q(16, 1));
    assert!(d.nonadditive);
    assert_eq!(d.branch_switches, vec![cid("3.1.1")]);
}

/// Brute-force scan: raise each Cohere leaf to the best peer score, one at a
/// time, and keep the largest gain (lowest id on ties).
#[test]
fn cohere_top_frontier_candidate() {
    let r = rubric();
    let dims = oracle_rubric(bundled::RUBRIC_JSON);
    let cohere = oracle_scores(bundled::assessment_document("cohere").unwrap());
    let peers: Vec<BTreeMap<String, i64>> = bundled::ASSESSMENTS.iter().map(|(_, d)| oracle_scores(d)).collect();
    let base = oracle_total(&dims, &cohere);
    let mut best: Option<(Exact, String, i64)> = None;
    for leaf in r.leaf_ids() {
        let id = leaf.to_string();
        let target = peers.iter().map(|p| p[&id]).max().unwrap();
        if target <= cohere[&id] {
            continue;
        }
        let mut raised = cohere.clone();
        raised.insert(id.clone(), target);
        let gain = oracle_total(&dims, &raised) - &base;
        if best.as_ref().is_none_or(|(g, _, _)| &gain > g) {
            best = Some((gain, id, target));
        }
    }
    let (gain, id, target) = best.unwrap();
    assert_eq!((id.as_str(), target, gain.clone()), ("1.1.1", 75, q(13, 4)));

    let frontier = improvement_frontier(&r, &load(&r, "cohere"), &all(&r), Default::default()).unwrap();
    assert_eq!(frontier[0].criterion_id, cid("1.1.1"));
    assert_eq!(frontier[0].current, 10);
    assert_eq!(frontier[0].target, 75);
    assert_eq!(frontier[0].gain, gain);
}

const GOLDEN: &str = "tests/golden/comparison_anthropic.md";

#[test]
fn single_assessment_markdown_matches_golden() {
    let r = rubric();
    let report = score_tree(&r, &load(&r, "anthropic"), Default::default()).unwrap();
    let md = render_comparison(&r, &[report], None, Format::Markdown).unwrap();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(GOLDEN, &md).unwrap();
    }
    let golden = std::fs::read_to_string(GOLDEN).expect("golden file present; run with UPDATE_GOLDEN=1 to create it");
    assert_eq!(md, golden);
}

#[test]
fn table_values_match_reports() {
    let r = rubric();
    let reports: Vec<_> = all(&r).iter().map(|a| score_tree(&r, a, Default::default()).unwrap()).collect();
    let csv = render_comparison(&r, &reports, None, Format::Csv).unwrap();
    let mut lines = csv.lines();
    let header: Vec<String> = lines.next().unwrap().split("\",\"").map(|s| s.trim_matches('"').to_string()).collect();
    for (line, node) in lines.skip(1).zip(r.nodes()) {
        let values: Vec<i64> = line.rsplit(',').take(reports.len()).map(|v| v.parse().unwrap()).collect();
        for (value, name) in values.iter().rev().zip(&header[1..]) {
            let report = reports.iter().find(|rep| rep.name() == name).unwrap();
            assert_eq!(Some(*value), report.display(&node.id), "{name} {}", node.id);
        }
    }
}
