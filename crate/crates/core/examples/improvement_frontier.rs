//! Lists the single-leaf changes that would raise a company's total the most,
//! using peers' existing practice as the target.
//!
//! cargo run --example improvement_frontier [slug]

use fsf_rubric::analytics::{frontier_overrides, improvement_frontier, what_if};
use fsf_rubric::{bundled, exact};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let slug = std::env::args().nth(1).unwrap_or_else(|| "cohere".to_string());
    let rubric = bundled::rubric()?;
    let assessment = bundled::assessment(&rubric, &slug).ok_or("unknown assessment")??;
    let peers: Vec<_> = bundled::assessments(&rubric)?.into_iter().map(|(_, a)| a).collect();

    let frontier = improvement_frontier(&rubric, &assessment, &peers, Default::default())?;
    for c in frontier.iter().take(10) {
        println!(
            "{:<8} {:>3} -> {:>3}  +{}  (as {})",
            c.criterion_id.to_string(),
            c.current,
            c.target,
            exact::to_fixed(&c.gain, 4),
            c.exemplars.join(", ")
        );
    }
    let top = frontier_overrides(&frontier[..frontier.len().min(5)]);
    let combined = what_if(&rubric, &assessment, &top, Default::default())?;
    println!("top five together: +{}", exact::to_fixed(&combined.total_delta, 4));
    Ok(())
}
