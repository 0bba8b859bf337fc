//! Builds a small rubric in code, validates an assessment against it and scores it.
//!
//! cargo run --example custom_rubric

use fsf_rubric::assessment::{Assessment, Subject};
use fsf_rubric::rubric::{AggregationRule, CriterionNode, ScoreScale};
use fsf_rubric::{cid, exact, score_tree, Exact, Rubric};

fn weight(text: &str) -> Exact {
    exact::parse_decimal(text).expect("decimal weight")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut testing = CriterionNode::interior(
        cid("2"),
        "Testing",
        weight("40"),
        vec![
            CriterionNode::leaf(cid("2.1"), "Coverage", weight("2")),
            CriterionNode::leaf(cid("2.2"), "Frequency", weight("1")),
            CriterionNode::leaf(cid("2.3"), "External audit", weight("0")),
        ],
    );
    testing.rule = AggregationRule::VerifiedOverride { verifier: cid("2.3") };
    let policy = CriterionNode::interior(
        cid("1"),
        "Policy",
        weight("60"),
        vec![
            CriterionNode::leaf(cid("1.1"), "Scope", weight("50")),
            CriterionNode::leaf(cid("1.2"), "Ownership", weight("50")),
        ],
    );
    let rubric = Rubric::new("demo-1", ScoreScale::standard(), vec![policy, testing])?;
    for issue in rubric.validate() {
        println!("rubric: {issue:?}");
    }

    let subject = Subject {
        company: "Example Co".into(),
        framework_title: "Safety Policy".into(),
        framework_version: "2".into(),
        assessment_date: chrono::NaiveDate::from_ymd_opt(2025, 6, 1).unwrap(),
        source_url: None,
    };
    let assessment = Assessment::new(subject, rubric.version()).with_scores([
        (&cid("1.1"), 75),
        (&cid("1.2"), 25),
        (&cid("2.1"), 10),
        (&cid("2.2"), 25),
        (&cid("2.3"), 50),
    ]);
    for issue in assessment.validate(&rubric) {
        println!("assessment: {issue:?}");
    }

    let report = score_tree(&rubric, &assessment, Default::default())?;
    for node in &report.nodes {
        println!("{:<4} {:>3}  {}", node.node_id.to_string(), node.display, node.exact);
    }
    println!("total {} ({})", report.total_display, exact::to_fixed(&report.total_exact, 4));
    Ok(())
}
