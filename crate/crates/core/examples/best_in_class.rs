//! Builds the leafwise-maximum composite across all bundled assessments.
//!
//! cargo run --example best_in_class

use fsf_rubric::analytics::best_in_class;
use fsf_rubric::{bundled, exact};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rubric = bundled::rubric()?;
    let all: Vec<_> = bundled::assessments(&rubric)?.into_iter().map(|(_, a)| a).collect();
    let bic = best_in_class(&rubric, &all, Default::default())?;
    println!("composite total {} ({})", bic.report.total_display, exact::to_fixed(&bic.report.total_exact, 4));
    for dim in rubric.dimensions() {
        println!("  {} {}: {}", dim.id, dim.title, bic.report.display(&dim.id).unwrap());
    }
    println!("sole holders of a leaf maximum:");
    for (id, holders) in &bic.sources {
        if let [only] = holders.as_slice() {
            println!("  {id} {} ({})", only, bic.leaf_scores()[id]);
        }
    }
    Ok(())
}
