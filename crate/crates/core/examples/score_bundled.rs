//! Scores every bundled assessment and prints totals and dimension scores.
//!
//! cargo run --example score_bundled

use fsf_rubric::{bundled, exact, score_tree};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rubric = bundled::rubric()?;
    let dims: Vec<_> = rubric.dimensions().iter().map(|d| d.id.clone()).collect();
    println!("{:<16} {:>5} {:>9}  {}", "company", "total", "exact", "dimensions");
    for (_, assessment) in bundled::assessments(&rubric)? {
        let report = score_tree(&rubric, &assessment, Default::default())?;
        let per_dim: Vec<String> = dims
            .iter()
            .map(|d| format!("{d}:{}", report.display(d).unwrap_or_default()))
            .collect();
        println!(
            "{:<16} {:>5} {:>9}  {}",
            report.name(),
            report.total_display,
            exact::to_fixed(&report.total_exact, 4),
            per_dim.join(" ")
        );
    }
    Ok(())
}
