//! Shows the verified-override rule: a node takes its independent-verification
//! child's score when that beats the weighted mean of the other children.
//!
//! cargo run --example override_rule

use fsf_rubric::rubric::AggregationRule;
use fsf_rubric::{bundled, exact, score_tree};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rubric = bundled::rubric()?;
    let overrides: Vec<_> = rubric
        .nodes()
        .filter_map(|n| match &n.rule {
            AggregationRule::VerifiedOverride { verifier } => Some((n, verifier.clone())),
            AggregationRule::WeightedMean => None,
        })
        .collect();

    for slug in ["amazon", "xai"] {
        let assessment = bundled::assessment(&rubric, slug).expect("bundled")?;
        let report = score_tree(&rubric, &assessment, Default::default())?;
        println!("{}", report.name());
        for (node, verifier) in &overrides {
            let mean = rubric
                .normalized_weights(node)?
                .iter()
                .fold(fsf_rubric::Exact::default(), |acc, (id, w)| acc + w * report.exact(id).unwrap());
            let verified = report.exact(verifier).unwrap();
            let winner = if verified > &mean { "verifier" } else { "weighted mean" };
            println!(
                "  {}: mean {} vs verifier {} -> {} ({winner})",
                node.id,
                exact::to_fixed(&mean, 2),
                exact::to_fixed(verified, 2),
                exact::to_fixed(report.exact(&node.id).unwrap(), 2),
            );
        }
    }
    Ok(())
}
