//! Ranks the bundled assessments and reports the median and dimension leaders.
//!
//! cargo run --example rank_and_median

use fsf_rubric::analytics::rank_and_stats;
use fsf_rubric::{bundled, exact, score_tree};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rubric = bundled::rubric()?;
    let reports = bundled::assessments(&rubric)?
        .iter()
        .map(|(_, a)| score_tree(&rubric, a, Default::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let ranking = rank_and_stats(&reports)?;
    for entry in &ranking.ordering {
        println!("{:>2}. {:<16} {}", entry.rank, entry.name, entry.total_display);
    }
    println!("median: {}", exact::to_fixed(&ranking.median, 1));
    for leader in &ranking.dimension_leaders {
        println!("dimension {} led by {} ({})", leader.dimension, leader.leader, leader.display);
    }
    Ok(())
}
