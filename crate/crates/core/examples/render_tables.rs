//! Renders the comparison table and a single company profile.
//!
//! cargo run --example render_tables [markdown|csv|structured]

use fsf_rubric::analytics::best_in_class;
use fsf_rubric::report::{render_comparison, render_profile, Format};
use fsf_rubric::{bundled, score_tree};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let format: Format = std::env::args().nth(1).as_deref().unwrap_or("markdown").parse()?;
    let rubric = bundled::rubric()?;
    let all: Vec<_> = bundled::assessments(&rubric)?.into_iter().map(|(_, a)| a).collect();
    let reports = all
        .iter()
        .map(|a| score_tree(&rubric, a, Default::default()))
        .collect::<Result<Vec<_>, _>>()?;
    let bic = best_in_class(&rubric, &all, Default::default())?;

    let table = render_comparison(&rubric, &reports, Some(&bic.report), format)?;
    println!("{table}");

    let (anthropic, report) = all.iter().zip(&reports).find(|(a, _)| a.name() == "Anthropic").ok_or("missing")?;
    let profile = render_profile(&rubric, anthropic, Some(report), format);
    for line in profile.lines().take(30) {
        println!("{line}");
    }
    Ok(())
}
