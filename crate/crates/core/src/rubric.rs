//! The weighted criterion tree: ids, score scale, weights and aggregation rules.
//!
//! A rubric is parsed from a canonical JSON document, checked structurally at
//! construction and semantically by [`Rubric::validate`]. Raw weights are kept
//! exactly as printed; normalization by sibling sum happens on use.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exact::{self, Exact};

/// Dotted-decimal criterion identifier such as `2.2.1.3`.
///
/// Ordering is component-wise numeric, so `4.10` sorts after `4.9`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CriterionId {
    parts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid criterion id `{0}`: expected dotted decimal such as `2.2.1`")]
pub struct InvalidId(pub String);

impl CriterionId {
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn depth(&self) -> usize {
        self.parts.len()
    }

    pub fn parent(&self) -> Option<CriterionId> {
        (self.parts.len() > 1).then(|| CriterionId {
            parts: self.parts[..self.parts.len() - 1].to_vec(),
        })
    }

    /// True when `self` extends `parent` by exactly one component.
    pub fn is_child_of(&self, parent: &CriterionId) -> bool {
        self.parts.len() == parent.parts.len() + 1 && self.parts.starts_with(&parent.parts)
    }

    pub fn is_descendant_of(&self, ancestor: &CriterionId) -> bool {
        self.parts.len() > ancestor.parts.len() && self.parts.starts_with(&ancestor.parts)
    }

    pub fn child(&self, component: u32) -> CriterionId {
        let mut parts = self.parts.clone();
        parts.push(component);
        CriterionId { parts }
    }

    pub fn root(component: u32) -> CriterionId {
        CriterionId {
            parts: vec![component],
        }
    }
}

impl FromStr for CriterionId {
    type Err = InvalidId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidId(s.to_string());
        if s.is_empty() {
            return Err(bad());
        }
        let parts = s
            .split('.')
            .map(|p| {
                if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) || (p.len() > 1 && p.starts_with('0')) {
                    return Err(bad());
                }
                p.parse::<u32>().map_err(|_| bad())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CriterionId { parts })
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Ord for CriterionId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.parts.cmp(&other.parts)
    }
}

impl PartialOrd for CriterionId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for CriterionId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CriterionId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for parsing ids in tests and examples. Panics on malformed input.
pub fn cid(s: &str) -> CriterionId {
    s.parse().expect("valid criterion id")
}

/// Discrete set of admissible leaf scores (integer percents) with anchor texts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreScale {
    points: Vec<u32>,
    anchors: BTreeMap<u32, String>,
}

impl ScoreScale {
    pub fn new(points: Vec<u32>, anchors: BTreeMap<u32, String>) -> Self {
        ScoreScale { points, anchors }
    }

    /// The seven-point scale used by the bundled rubric.
    pub fn standard() -> Self {
        const ANCHORS: [(u32, &str); 7] = [
            (0, "The criterion is not mentioned at all. There is no evidence that the company has considered or addressed this aspect."),
            (10, "The criterion is barely acknowledged with minimal reference. The company shows awareness of the concept but provides almost no details about implementation or planning."),
            (25, "The criterion is partially addressed with limited information. There is some evidence that the company has started thinking about implementation, but details are sparse and underdeveloped."),
            (50, "The criterion is moderately addressed with adequate information. There is evidence of partial implementation with a structured approach, though important gaps remain."),
            (75, "The criterion is well addressed with substantial detail. Implementation appears thorough with minor gaps remaining. The approach demonstrates expertise and careful consideration of most key aspects."),
            (90, "The criterion is addressed excellently with comprehensive detail. Implementation appears complete, robust, and mature. The approach shows mastery of the subject with attention to nuances and edge cases."),
            (100, "The criterion is fulfilled to the highest possible standard. Implementation is exemplary, representing best practices in the industry. All aspects are addressed with exceptional depth, rigor, and forward-thinking."),
        ];
        ScoreScale {
            points: ANCHORS.iter().map(|(p, _)| *p).collect(),
            anchors: ANCHORS.iter().map(|(p, a)| (*p, a.to_string())).collect(),
        }
    }

    pub fn points(&self) -> &[u32] {
        &self.points
    }

    pub fn anchors(&self) -> &BTreeMap<u32, String> {
        &self.anchors
    }

    pub fn anchor(&self, point: u32) -> Option<&str> {
        self.anchors.get(&point).map(String::as_str)
    }

    pub fn contains(&self, score: u32) -> bool {
        self.points.contains(&score)
    }

    fn issues(&self) -> Vec<RubricIssue> {
        let mut out = Vec::new();
        let err = |kind| RubricIssue {
            severity: Severity::Error,
            node: None,
            kind,
        };
        if self.points.windows(2).any(|w| w[0] >= w[1]) {
            out.push(err(RubricIssueKind::ScaleNotIncreasing));
        }
        for &p in &self.points {
            if p > 100 {
                out.push(err(RubricIssueKind::ScalePointOutOfRange(p)));
            }
            if !self.anchors.contains_key(&p) {
                out.push(err(RubricIssueKind::AnchorMissing(p)));
            }
        }
        for endpoint in [0, 100] {
            if !self.points.contains(&endpoint) {
                out.push(err(RubricIssueKind::ScaleMissingEndpoint(endpoint)));
            }
        }
        for p in self.anchors.keys() {
            if !self.points.contains(p) {
                out.push(err(RubricIssueKind::AnchorForUnknownPoint(*p)));
            }
        }
        out
    }
}

impl Default for ScoreScale {
    fn default() -> Self {
        ScoreScale::standard()
    }
}

/// How an interior node combines its children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AggregationRule {
    WeightedMean,
    /// `max(weighted mean of the other children, score of the verifier child)`.
    VerifiedOverride { verifier: CriterionId },
}

impl AggregationRule {
    pub fn verifier(&self) -> Option<&CriterionId> {
        match self {
            AggregationRule::WeightedMean => None,
            AggregationRule::VerifiedOverride { verifier } => Some(verifier),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionNode {
    pub id: CriterionId,
    pub title: String,
    /// Relative to siblings, stored as printed.
    pub weight: Exact,
    pub guidance: Vec<String>,
    pub rule: AggregationRule,
    pub children: Vec<CriterionNode>,
}

impl CriterionNode {
    pub fn leaf(id: CriterionId, title: impl Into<String>, weight: Exact) -> Self {
        CriterionNode {
            id,
            title: title.into(),
            weight,
            guidance: Vec::new(),
            rule: AggregationRule::WeightedMean,
            children: Vec::new(),
        }
    }

    pub fn interior(id: CriterionId, title: impl Into<String>, weight: Exact, children: Vec<CriterionNode>) -> Self {
        CriterionNode {
            id,
            title: title.into(),
            weight,
            guidance: Vec::new(),
            rule: AggregationRule::WeightedMean,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Children that take part in the weighted mean (everything except a verifier).
    pub fn weighted_children(&self) -> impl Iterator<Item = &CriterionNode> {
        let verifier = self.rule.verifier();
        self.children.iter().filter(move |c| Some(&c.id) != verifier)
    }

    pub fn verifier_child(&self) -> Option<&CriterionNode> {
        let v = self.rule.verifier()?;
        self.children.iter().find(|c| &c.id == v)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RubricError {
    #[error("malformed rubric document at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("rubric structure error at `{id}`: {message}")]
    Structure { id: String, message: String },
    #[error("unknown criterion id `{0}`")]
    UnknownId(String),
    #[error("{0} lies on a verifier branch; its weight is conditional, not a fixed linear coefficient")]
    ConditionalWeight(CriterionId),
    #[error("weights of the sibling group under `{0}` sum to zero")]
    ZeroWeightGroup(String),
    #[error("weight of {0} cannot be written as a finite decimal")]
    NonDecimalWeight(CriterionId),
}

impl RubricError {
    fn structure(id: impl fmt::Display, message: impl Into<String>) -> Self {
        RubricError::Structure {
            id: id.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Notice,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RubricIssueKind {
    ScaleNotIncreasing,
    ScalePointOutOfRange(u32),
    ScaleMissingEndpoint(u32),
    AnchorMissing(u32),
    AnchorForUnknownPoint(u32),
    ZeroWeightGroup,
    /// Sibling weights sum to something other than 100; they are normalized on use.
    WeightsNormalized { sum: String },
    VerifierNotChild(CriterionId),
    /// A verifier child carries a nonzero raw weight, which the weighted mean ignores.
    VerifierWeightIgnored(CriterionId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RubricIssue {
    pub severity: Severity,
    /// `None` for scale issues and for the dimension sibling group.
    pub node: Option<CriterionId>,
    pub kind: RubricIssueKind,
}

impl fmt::Display for RubricIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Notice => "notice",
        };
        let at = self.node.as_ref().map_or_else(|| "rubric".to_string(), |n| n.to_string());
        write!(f, "{sev}: {at}: ")?;
        match &self.kind {
            RubricIssueKind::ScaleNotIncreasing => write!(f, "scale points are not strictly increasing"),
            RubricIssueKind::ScalePointOutOfRange(p) => write!(f, "scale point {p} is outside [0, 100]"),
            RubricIssueKind::ScaleMissingEndpoint(p) => write!(f, "scale is missing endpoint {p}"),
            RubricIssueKind::AnchorMissing(p) => write!(f, "scale point {p} has no anchor text"),
            RubricIssueKind::AnchorForUnknownPoint(p) => write!(f, "anchor given for {p}, which is not a scale point"),
            RubricIssueKind::ZeroWeightGroup => write!(f, "child weights sum to zero"),
            RubricIssueKind::WeightsNormalized { sum } => {
                write!(f, "child weights sum to {sum}, normalized by sibling sum")
            }
            RubricIssueKind::VerifierNotChild(v) => write!(f, "verifier {v} is not a direct child"),
            RubricIssueKind::VerifierWeightIgnored(v) => {
                write!(f, "verifier {v} has a nonzero weight that the weighted mean ignores")
            }
        }
    }
}

/// A parsed, structurally sound rubric. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Rubric {
    version: String,
    scale: ScoreScale,
    dimensions: Vec<CriterionNode>,
    index: BTreeMap<CriterionId, Vec<usize>>,
}

impl PartialEq for Rubric {
    fn eq(&self, other: &Self) -> bool {
        self.version == other.version && self.scale == other.scale && self.dimensions == other.dimensions
    }
}

impl Rubric {
    pub fn new(version: impl Into<String>, scale: ScoreScale, dimensions: Vec<CriterionNode>) -> Result<Self, RubricError> {
        if dimensions.is_empty() {
            return Err(RubricError::structure("rubric", "no dimensions"));
        }
        let mut index = BTreeMap::new();
        for (i, dim) in dimensions.iter().enumerate() {
            if dim.id.depth() != 1 {
                return Err(RubricError::structure(&dim.id, "dimension ids must have a single component"));
            }
            index_node(dim, vec![i], &mut index)?;
        }
        Ok(Rubric {
            version: version.into(),
            scale,
            dimensions,
            index,
        })
    }

    /// Parses the canonical rubric JSON document.
    pub fn parse(document: &str) -> Result<Self, RubricError> {
        let doc: RubricDoc = serde_json::from_str(document).map_err(|e| RubricError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        doc.into_rubric()
    }

    /// Canonical serialization: fixed key order, two-space indent, trailing newline.
    pub fn to_canonical_json(&self) -> Result<String, RubricError> {
        let doc = RubricDoc::from_rubric(self)?;
        let mut out = serde_json::to_string_pretty(&doc).expect("rubric serializes");
        out.push('\n');
        Ok(out)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn scale(&self) -> &ScoreScale {
        &self.scale
    }

    pub fn dimensions(&self) -> &[CriterionNode] {
        &self.dimensions
    }

    pub fn node(&self, id: &CriterionId) -> Option<&CriterionNode> {
        let path = self.index.get(id)?;
        let mut node = &self.dimensions[path[0]];
        for &i in &path[1..] {
            node = &node.children[i];
        }
        Some(node)
    }

    pub fn contains(&self, id: &CriterionId) -> bool {
        self.index.contains_key(id)
    }

    pub fn is_leaf(&self, id: &CriterionId) -> bool {
        self.node(id).is_some_and(CriterionNode::is_leaf)
    }

    /// Every node in depth-first pre-order (rubric order).
    pub fn nodes(&self) -> Preorder<'_> {
        Preorder {
            stack: self.dimensions.iter().rev().collect(),
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &CriterionNode> {
        self.nodes().filter(|n| n.is_leaf())
    }

    pub fn leaf_ids(&self) -> Vec<CriterionId> {
        self.leaves().map(|n| n.id.clone()).collect()
    }

    pub fn node_count(&self) -> usize {
        self.index.len()
    }

    /// Path from the dimension root down to `id`, inclusive.
    pub fn path(&self, id: &CriterionId) -> Option<Vec<&CriterionNode>> {
        let path = self.index.get(id)?;
        let mut node = &self.dimensions[path[0]];
        let mut out = vec![node];
        for &i in &path[1..] {
            node = &node.children[i];
            out.push(node);
        }
        Some(out)
    }

    /// Normalized weight of each dimension in the total.
    pub fn dimension_weights(&self) -> Result<Vec<Exact>, RubricError> {
        normalize(self.dimensions.iter(), "rubric")
    }

    /// Weight of `child` relative to the weighted children of `parent`.
    pub fn normalized_weights(&self, parent: &CriterionNode) -> Result<Vec<(CriterionId, Exact)>, RubricError> {
        let kids: Vec<&CriterionNode> = parent.weighted_children().collect();
        let weights = normalize(kids.iter().copied(), &parent.id.to_string())?;
        Ok(kids.into_iter().map(|k| k.id.clone()).zip(weights).collect())
    }

    /// Product of normalized sibling weights from the dimension down to `id`,
    /// times the dimension's normalized weight. Fails for ids on a verifier branch.
    pub fn effective_weight(&self, id: &CriterionId) -> Result<Exact, RubricError> {
        let path = self.path(id).ok_or_else(|| RubricError::UnknownId(id.to_string()))?;
        let dims = self.dimension_weights()?;
        let dim_pos = self.index[id][0];
        let mut weight = dims[dim_pos].clone();
        for pair in path.windows(2) {
            let (parent, child) = (pair[0], pair[1]);
            if parent.rule.verifier() == Some(&child.id) {
                return Err(RubricError::ConditionalWeight(id.clone()));
            }
            let total = weight_sum(parent.weighted_children());
            if total.is_zero() {
                return Err(RubricError::ZeroWeightGroup(parent.id.to_string()));
            }
            weight *= &child.weight / total;
        }
        Ok(weight)
    }

    /// Reports every scale, weight and rule issue. No errors means usable.
    pub fn validate(&self) -> Vec<RubricIssue> {
        let mut out = self.scale.issues();
        group_issues(None, self.dimensions.iter(), &mut out);
        for node in self.nodes().filter(|n| !n.is_leaf()) {
            if let Some(v) = node.rule.verifier() {
                match node.children.iter().find(|c| &c.id == v) {
                    None => out.push(RubricIssue {
                        severity: Severity::Error,
                        node: Some(node.id.clone()),
                        kind: RubricIssueKind::VerifierNotChild(v.clone()),
                    }),
                    Some(child) if !child.weight.is_zero() => out.push(RubricIssue {
                        severity: Severity::Notice,
                        node: Some(node.id.clone()),
                        kind: RubricIssueKind::VerifierWeightIgnored(v.clone()),
                    }),
                    Some(_) => {}
                }
            }
            group_issues(Some(&node.id), node.weighted_children(), &mut out);
        }
        out
    }

    pub fn has_errors(issues: &[RubricIssue]) -> bool {
        issues.iter().any(|i| i.severity == Severity::Error)
    }
}

pub struct Preorder<'a> {
    stack: Vec<&'a CriterionNode>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a CriterionNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

fn index_node(
    node: &CriterionNode,
    path: Vec<usize>,
    index: &mut BTreeMap<CriterionId, Vec<usize>>,
) -> Result<(), RubricError> {
    if node.weight.is_negative() {
        return Err(RubricError::structure(&node.id, "negative weight"));
    }
    if node.is_leaf() && node.rule != AggregationRule::WeightedMean {
        return Err(RubricError::structure(&node.id, "a leaf cannot carry an aggregation rule"));
    }
    for child in &node.children {
        if !child.id.is_child_of(&node.id) {
            return Err(RubricError::structure(
                &child.id,
                format!("id does not extend parent `{}` by one component", node.id),
            ));
        }
    }
    if index.insert(node.id.clone(), path.clone()).is_some() {
        return Err(RubricError::structure(&node.id, "duplicate id"));
    }
    for (i, child) in node.children.iter().enumerate() {
        let mut p = path.clone();
        p.push(i);
        index_node(child, p, index)?;
    }
    Ok(())
}

fn weight_sum<'a>(nodes: impl Iterator<Item = &'a CriterionNode>) -> Exact {
    nodes.fold(Exact::zero(), |acc, n| acc + &n.weight)
}

fn normalize<'a>(nodes: impl Iterator<Item = &'a CriterionNode> + Clone, at: &str) -> Result<Vec<Exact>, RubricError> {
    let total = weight_sum(nodes.clone());
    if total.is_zero() {
        return Err(RubricError::ZeroWeightGroup(at.to_string()));
    }
    Ok(nodes.map(|n| &n.weight / &total).collect())
}

fn group_issues<'a>(
    parent: Option<&CriterionId>,
    group: impl Iterator<Item = &'a CriterionNode>,
    out: &mut Vec<RubricIssue>,
) {
    let total = weight_sum(group);
    let hundred = exact::from_int(100);
    if total.is_zero() {
        out.push(RubricIssue {
            severity: Severity::Error,
            node: parent.cloned(),
            kind: RubricIssueKind::ZeroWeightGroup,
        });
    } else if total != hundred {
        let sum = exact::to_terminating_decimal(&total).unwrap_or_else(|| exact::to_fixed(&total, 4));
        out.push(RubricIssue {
            severity: Severity::Notice,
            node: parent.cloned(),
            kind: RubricIssueKind::WeightsNormalized { sum },
        });
    }
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RubricDoc {
    version: String,
    scale: ScaleDoc,
    dimensions: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleDoc {
    points: Vec<u32>,
    anchors: IndexMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: String,
    title: String,
    weight: serde_json::Number,
    guidance: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rule: Option<RuleDoc>,
    children: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    kind: String,
    verifier: String,
}

const OVERRIDE_KIND: &str = "verified_override";

impl RubricDoc {
    fn into_rubric(self) -> Result<Rubric, RubricError> {
        let mut anchors = BTreeMap::new();
        for (k, v) in self.scale.anchors {
            let point: u32 = k
                .parse()
                .map_err(|_| RubricError::structure("scale", format!("anchor key `{k}` is not an integer point")))?;
            anchors.insert(point, v);
        }
        let scale = ScoreScale::new(self.scale.points, anchors);
        let dimensions = self
            .dimensions
            .into_iter()
            .map(NodeDoc::into_node)
            .collect::<Result<Vec<_>, _>>()?;
        Rubric::new(self.version, scale, dimensions)
    }

    fn from_rubric(rubric: &Rubric) -> Result<Self, RubricError> {
        Ok(RubricDoc {
            version: rubric.version.clone(),
            scale: ScaleDoc {
                points: rubric.scale.points.clone(),
                anchors: rubric.scale.anchors.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            },
            dimensions: rubric
                .dimensions
                .iter()
                .map(NodeDoc::from_node)
                .collect::<Result<Vec<_>, _>>()?,
        })
    }
}

impl NodeDoc {
    fn into_node(self) -> Result<CriterionNode, RubricError> {
        let id: CriterionId = self
            .id
            .parse()
            .map_err(|e: InvalidId| RubricError::structure(&self.id, e.to_string()))?;
        let weight = exact::parse_decimal(&self.weight.to_string())
            .ok_or_else(|| RubricError::structure(&id, "weight is not a decimal number"))?;
        let rule = match self.rule {
            None => AggregationRule::WeightedMean,
            Some(r) if r.kind == OVERRIDE_KIND => AggregationRule::VerifiedOverride {
                verifier: r
                    .verifier
                    .parse()
                    .map_err(|e: InvalidId| RubricError::structure(&id, e.to_string()))?,
            },
            Some(r) => return Err(RubricError::structure(&id, format!("unknown rule kind `{}`", r.kind))),
        };
        let children = self
            .children
            .into_iter()
            .map(NodeDoc::into_node)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CriterionNode {
            id,
            title: self.title,
            weight,
            guidance: self.guidance,
            rule,
            children,
        })
    }

    fn from_node(node: &CriterionNode) -> Result<Self, RubricError> {
        Ok(NodeDoc {
            id: node.id.to_string(),
            title: node.title.clone(),
            weight: weight_number(&node.weight).ok_or_else(|| RubricError::NonDecimalWeight(node.id.clone()))?,
            guidance: node.guidance.clone(),
            rule: node.rule.verifier().map(|v| RuleDoc {
                kind: OVERRIDE_KIND.to_string(),
                verifier: v.to_string(),
            }),
            children: node
                .children
                .iter()
                .map(NodeDoc::from_node)
                .collect::<Result<Vec<_>, _>>()?,
        })
    }
}

fn weight_number(weight: &Exact) -> Option<serde_json::Number> {
    if weight.is_integer() {
        if let Some(v) = weight.to_integer().to_u64() {
            return Some(v.into());
        }
    }
    let text = exact::to_terminating_decimal(weight)?;
    let number = serde_json::Number::from_f64(text.parse().ok()?)?;
    (exact::parse_decimal(&number.to_string()).as_ref() == Some(weight)).then_some(number)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> Exact {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn minimal_doc(weight: &str) -> String {
        format!(
            r#"{{"version":"t","scale":{{"points":[0,100],"anchors":{{"0":"none","100":"full"}}}},
               "dimensions":[{{"id":"1","title":"Only","weight":{weight},"guidance":[],"children":[]}}]}}"#
        )
    }

    #[test]
    fn ids_parse_and_order_numerically() {
        let a = cid("4.9");
        let b = cid("4.10");
        assert!(a < b);
        assert_eq!(b.to_string(), "4.10");
        assert_eq!(cid("2.2.1.3").parent(), Some(cid("2.2.1")));
        assert!(cid("2.2.1").is_child_of(&cid("2.2")));
        assert!(!cid("2.2.1.1").is_child_of(&cid("2.2")));
        for bad in ["", "1.", ".1", "1..2", "a.1", "01", "1.02", "-1"] {
            assert!(bad.parse::<CriterionId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn one_leaf_rubric_is_valid() {
        let r = Rubric::parse(&minimal_doc("100")).unwrap();
        assert_eq!(r.leaf_ids(), vec![cid("1")]);
        assert!(r.validate().is_empty());
        assert_eq!(r.effective_weight(&cid("1")).unwrap(), q(1, 1));
    }

    #[test]
    fn empty_document_is_a_parse_error() {
        match Rubric::parse("") {
            Err(RubricError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(Rubric::parse("{\"version\": 3"), Err(RubricError::Parse { .. })));
    }

    #[test]
    fn duplicate_and_misnested_ids_are_structural_errors() {
        let dup = r#"{"version":"t","scale":{"points":[0,100],"anchors":{"0":"a","100":"b"}},"dimensions":[
            {"id":"1","title":"a","weight":50,"guidance":[],"children":[]},
            {"id":"1","title":"b","weight":50,"guidance":[],"children":[]}]}"#;
        assert!(matches!(Rubric::parse(dup), Err(RubricError::Structure { .. })));
        let nested = r#"{"version":"t","scale":{"points":[0,100],"anchors":{"0":"a","100":"b"}},"dimensions":[
            {"id":"1","title":"a","weight":50,"guidance":[],"children":[
                {"id":"2.1","title":"x","weight":1,"guidance":[],"children":[]}]}]}"#;
        assert!(matches!(Rubric::parse(nested), Err(RubricError::Structure { .. })));
        let deep = r#"{"version":"t","scale":{"points":[0,100],"anchors":{"0":"a","100":"b"}},"dimensions":[
            {"id":"1","title":"a","weight":50,"guidance":[],"children":[
                {"id":"1.1.1","title":"x","weight":1,"guidance":[],"children":[]}]}]}"#;
        assert!(matches!(Rubric::parse(deep), Err(RubricError::Structure { .. })));
    }

    #[test]
    fn leaf_with_rule_is_rejected() {
        let doc = r#"{"version":"t","scale":{"points":[0,100],"anchors":{"0":"a","100":"b"}},"dimensions":[
            {"id":"1","title":"a","weight":50,"guidance":[],"rule":{"kind":"verified_override","verifier":"1.1"},"children":[]}]}"#;
        assert!(matches!(Rubric::parse(doc), Err(RubricError::Structure { .. })));
    }

    #[test]
    fn zero_weight_group_is_an_error() {
        let doc = r#"{"version":"t","scale":{"points":[0,100],"anchors":{"0":"a","100":"b"}},"dimensions":[
            {"id":"1","title":"a","weight":100,"guidance":[],"children":[
                {"id":"1.1","title":"x","weight":0,"guidance":[],"children":[]},
                {"id":"1.2","title":"y","weight":0,"guidance":[],"children":[]}]}]}"#;
        let r = Rubric::parse(doc).unwrap();
        let issues = r.validate();
        assert!(issues.iter().any(|i| i.severity == Severity::Error
            && i.kind == RubricIssueKind::ZeroWeightGroup
            && i.node == Some(cid("1"))));
        assert!(matches!(r.effective_weight(&cid("1.1")), Err(RubricError::ZeroWeightGroup(_))));
    }

    #[test]
    fn verifier_must_be_a_direct_child() {
        let doc = r#"{"version":"t","scale":{"points":[0,100],"anchors":{"0":"a","100":"b"}},"dimensions":[
            {"id":"1","title":"a","weight":100,"guidance":[],"rule":{"kind":"verified_override","verifier":"1.3"},"children":[
                {"id":"1.1","title":"x","weight":60,"guidance":[],"children":[]},
                {"id":"1.2","title":"y","weight":40,"guidance":[],"children":[]}]}]}"#;
        let r = Rubric::parse(doc).unwrap();
        assert!(r.validate().iter().any(|i| i.severity == Severity::Error
            && i.kind == RubricIssueKind::VerifierNotChild(cid("1.3"))));
    }

    #[test]
    fn scale_issues() {
        let doc = r#"{"version":"t","scale":{"points":[10,5,120],"anchors":{"10":"a","7":"b"}},"dimensions":[
            {"id":"1","title":"a","weight":100,"guidance":[],"children":[]}]}"#;
        let kinds: Vec<_> = Rubric::parse(doc).unwrap().validate().into_iter().map(|i| i.kind).collect();
        assert!(kinds.contains(&RubricIssueKind::ScaleNotIncreasing));
        assert!(kinds.contains(&RubricIssueKind::ScalePointOutOfRange(120)));
        assert!(kinds.contains(&RubricIssueKind::ScaleMissingEndpoint(0)));
        assert!(kinds.contains(&RubricIssueKind::ScaleMissingEndpoint(100)));
        assert!(kinds.contains(&RubricIssueKind::AnchorMissing(5)));
        assert!(kinds.contains(&RubricIssueKind::AnchorForUnknownPoint(7)));
    }

    #[test]
    fn decimal_weights_survive_serialization() {
        let r = Rubric::parse(&minimal_doc("16.7")).unwrap();
        assert_eq!(r.dimensions()[0].weight, q(167, 10));
        let text = r.to_canonical_json().unwrap();
        assert!(text.contains("\"weight\": 16.7"));
        assert_eq!(Rubric::parse(&text).unwrap(), r);
    }

    #[test]
    fn non_decimal_weight_cannot_be_serialized() {
        let leaf = CriterionNode::leaf(cid("1"), "x", q(1, 3));
        let r = Rubric::new("t", ScoreScale::standard(), vec![leaf]).unwrap();
        assert!(matches!(r.to_canonical_json(), Err(RubricError::NonDecimalWeight(_))));
    }
}
