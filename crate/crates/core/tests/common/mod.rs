//! Test support: an independent scorer working straight from the JSON
//! documents, and proptest generators for random rubrics and assessments.

#![allow(dead_code)]

use std::collections::BTreeMap;

use fsf_rubric::assessment::{Assessment, Subject};
use fsf_rubric::rubric::{AggregationRule, CriterionNode, ScoreScale};
use fsf_rubric::{CriterionId, Rubric};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use serde_json::Value;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub const SCALE: [u32; 7] = [0, 10, 25, 50, 75, 90, 100];

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

/// A rubric node as read directly from JSON, without the library's types.
#[derive(Debug, Clone)]
pub struct ONode {
    pub id: String,
    pub weight: Q,
    pub verifier: Option<String>,
    pub children: Vec<ONode>,
}

/// Parses a decimal literal such as `16.7` by splitting on the point.
fn decimal(text: &str) -> Q {
    match text.split_once('.') {
        None => q(text.parse().unwrap(), 1),
        Some((int, frac)) => {
            let den = 10i64.pow(frac.len() as u32);
            q(format!("{int}{frac}").parse().unwrap(), den)
        }
    }
}

fn onode(v: &Value) -> ONode {
    ONode {
        id: v["id"].as_str().unwrap().to_string(),
        weight: decimal(&v["weight"].to_string()),
        verifier: v.get("rule").map(|r| r["verifier"].as_str().unwrap().to_string()),
        children: v["children"].as_array().unwrap().iter().map(onode).collect(),
    }
}

pub fn oracle_rubric(json: &str) -> Vec<ONode> {
    let v: Value = serde_json::from_str(json).unwrap();
    v["dimensions"].as_array().unwrap().iter().map(onode).collect()
}

pub fn oracle_scores(json: &str) -> BTreeMap<String, i64> {
    let v: Value = serde_json::from_str(json).unwrap();
    v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["id"].as_str().unwrap().to_string(), e["score"].as_i64().unwrap()))
        .collect()
}

pub fn oracle_value(node: &ONode, scores: &BTreeMap<String, i64>) -> Q {
    if node.children.is_empty() {
        return q(scores[&node.id], 1);
    }
    let weighted: Vec<&ONode> = node
        .children
        .iter()
        .filter(|c| Some(&c.id) != node.verifier.as_ref())
        .collect();
    let sum: Q = weighted.iter().map(|c| c.weight.clone()).sum();
    let mean: Q = weighted
        .iter()
        .map(|c| &c.weight * oracle_value(c, scores) / &sum)
        .sum();
    match &node.verifier {
        None => mean,
        Some(v) => {
            let verified = oracle_value(node.children.iter().find(|c| &c.id == v).unwrap(), scores);
            if verified > mean {
                verified
            } else {
                mean
            }
        }
    }
}

pub fn oracle_total(dims: &[ONode], scores: &BTreeMap<String, i64>) -> Q {
    let sum: Q = dims.iter().map(|d| d.weight.clone()).sum();
    dims.iter().map(|d| &d.weight * oracle_value(d, scores) / &sum).sum()
}

pub fn oracle_find<'a>(dims: &'a [ONode], id: &str) -> Option<&'a ONode> {
    fn walk<'a>(n: &'a ONode, id: &str) -> Option<&'a ONode> {
        if n.id == id {
            return Some(n);
        }
        n.children.iter().find_map(|c| walk(c, id))
    }
    dims.iter().find_map(|d| walk(d, id))
}

/// floor(x + 1/2) computed as floor((2n + d) / 2d).
pub fn oracle_round(x: &Q) -> i64 {
    let n: BigInt = x.numer() * BigInt::from(2) + x.denom();
    let d: BigInt = x.denom() * BigInt::from(2);
    let mut r: BigInt = &n / &d;
    if n.is_negative() && !(&n % &d).is_zero() {
        r -= 1;
    }
    r.try_into().unwrap()
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum Shape {
    Leaf { tenths: u32 },
    Node { tenths: u32, children: Vec<Shape>, verified: bool },
}

fn shape(allow_override: bool) -> impl Strategy<Value = Shape> {
    let leaf = (0u32..=1000).prop_map(|tenths| Shape::Leaf { tenths });
    leaf.prop_recursive(3, 32, 4, move |inner| {
        (
            1u32..=1000,
            prop::collection::vec(inner, 1..5),
            prop::bool::weighted(if allow_override { 0.35 } else { 0.0 }),
        )
            .prop_map(|(tenths, children, verified)| Shape::Node {
                tenths,
                children,
                verified,
            })
    })
}

fn tenths(t: u32) -> Q {
    q(t.into(), 10)
}

fn build(shape: &Shape, id: CriterionId) -> CriterionNode {
    match shape {
        Shape::Leaf { tenths: t } => CriterionNode::leaf(id, "leaf", tenths(*t)),
        Shape::Node {
            tenths: t,
            children,
            verified,
        } => {
            let mut kids: Vec<CriterionNode> = children
                .iter()
                .enumerate()
                .map(|(i, s)| build(s, id.child(i as u32 + 1)))
                .collect();
            if kids.iter().all(|k| k.weight.is_zero()) {
                kids[0].weight = q(1, 1);
            }
            let mut rule = AggregationRule::WeightedMean;
            if *verified {
                let vid = id.child(kids.len() as u32 + 1);
                kids.push(CriterionNode::leaf(vid.clone(), "verifier", Q::zero()));
                rule = AggregationRule::VerifiedOverride { verifier: vid };
            }
            let mut node = CriterionNode::interior(id, "group", tenths(*t), kids);
            node.rule = rule;
            node
        }
    }
}

/// Random rubric. With `allow_override` false, every node is a weighted mean.
pub fn rubric_strategy(allow_override: bool) -> impl Strategy<Value = Rubric> {
    prop::collection::vec((1u32..=1000, shape(allow_override)), 1..5).prop_map(|dims| {
        let nodes = dims
            .iter()
            .enumerate()
            .map(|(i, (w, s))| {
                let mut n = build(s, CriterionId::root(i as u32 + 1));
                n.weight = tenths(*w);
                n
            })
            .collect();
        Rubric::new("random", ScoreScale::standard(), nodes).unwrap()
    })
}

pub fn subject(name: &str) -> Subject {
    Subject {
        company: name.to_string(),
        framework_title: "Framework".into(),
        framework_version: "1".into(),
        assessment_date: chrono::NaiveDate::from_ymd_opt(2025, 1, 1).unwrap(),
        source_url: None,
    }
}

/// Assessment over `rubric` taking scale points from `picks`, cycling as needed.
pub fn assessment_from(rubric: &Rubric, name: &str, picks: &[usize]) -> Assessment {
    let base = Assessment::new(subject(name), rubric.version());
    let ids = rubric.leaf_ids();
    base.with_scores(ids.iter().enumerate().map(|(i, id)| (id, SCALE[picks[i % picks.len()] % 7])))
}

pub fn picks() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..7, 1..80)
}
