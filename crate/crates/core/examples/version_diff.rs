//! Compares two revisions of an assessment and attributes the change in total
//! to individual leaves, flagging override nodes whose winning branch moves.
//!
//! cargo run --example version_diff

use fsf_rubric::analytics::diff;
use fsf_rubric::{bundled, cid, exact};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rubric = bundled::rubric()?;
    let base = bundled::assessment(&rubric, "amazon").expect("bundled")?;
    // A later framework revision: new external verification and more frequent evaluations.
    let head = base.with_scores([(&cid("3.1.1.3"), 90), (&cid("3.2.1.2"), 50)]);

    let report = diff(&rubric, &base, &head, Default::default())?;
    for leaf in &report.leaf_deltas {
        println!("leaf {}: {} -> {}", leaf.criterion_id, leaf.base, leaf.head);
    }
    for node in &report.node_deltas {
        println!("node {}: {:+}", node.node_id, exact::to_fixed(&node.delta, 4));
    }
    for a in &report.attributions {
        println!("attributed to {}: {}", a.criterion_id, exact::to_fixed(&a.contribution, 4));
    }
    println!("total delta {}", exact::to_fixed(&report.total_delta, 4));
    println!("attribution sum {}", exact::to_fixed(&report.attribution_sum(), 4));
    println!("branch switches {:?}, nonadditive {}", report.branch_switches.iter().map(ToString::to_string).collect::<Vec<_>>(), report.nonadditive);
    Ok(())
}
