//! Rescores an assessment with hypothetical leaf scores, without touching the original.
//!
//! cargo run --example what_if

use std::collections::BTreeMap;

use fsf_rubric::analytics::{best_in_class, what_if};
use fsf_rubric::{bundled, cid, exact};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rubric = bundled::rubric()?;
    let amazon = bundled::assessment(&rubric, "amazon").expect("bundled")?;

    let overrides = BTreeMap::from([(cid("2.2.4"), 75)]);
    let result = what_if(&rubric, &amazon, &overrides, Default::default())?;
    println!(
        "Amazon with 2.2.4 = 75: total {} (delta {})",
        result.report.total_display,
        exact::to_fixed(&result.total_delta, 4)
    );

    // Adopting every best practice already in use elsewhere.
    let all: Vec<_> = bundled::assessments(&rubric)?.into_iter().map(|(_, a)| a).collect();
    let preset = best_in_class(&rubric, &all, Default::default())?.leaf_scores();
    let result = what_if(&rubric, &amazon, &preset, Default::default())?;
    println!(
        "Amazon with the best-in-class preset: total {} (delta {})",
        result.report.total_display,
        exact::to_fixed(&result.total_delta, 4)
    );

    match what_if(&rubric, &amazon, &BTreeMap::from([(cid("3.1.1.3"), 80)]), Default::default()) {
        Ok(_) => println!("unexpected: 80 accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
