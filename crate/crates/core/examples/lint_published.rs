//! Checks printed aggregates against recomputation: first the values stored
//! with each assessment, then the bundled comparison table.
//!
//! cargo run --example lint_published

use std::collections::BTreeMap;

use fsf_rubric::analytics::{lint_against, lint_consistency, DEFAULT_TOLERANCE};
use fsf_rubric::assessment::PublishedKey;
use fsf_rubric::{bundled, score_tree};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rubric = bundled::rubric()?;
    let assessments = bundled::assessments(&rubric)?;
    for (slug, a) in &assessments {
        let findings = lint_consistency(&rubric, a, DEFAULT_TOLERANCE, Default::default())?;
        println!("{slug}: {} finding(s) against stored published values", findings.len());
        for f in findings.iter().take(3) {
            println!("  {}: published {}, recomputed {}", f.node_id, f.published, f.recomputed_display);
        }
    }

    let table = bundled::comparison_table();
    for (_, a) in &assessments {
        let Some(column) = table.iter().find(|c| c.company == a.name()) else {
            continue;
        };
        let printed: BTreeMap<PublishedKey, i64> = column
            .values
            .iter()
            .map(|(k, v)| Ok((k.parse()?, *v)))
            .collect::<Result<_, Box<dyn std::error::Error>>>()?;
        let report = score_tree(&rubric, a, Default::default())?;
        let findings = lint_against(&report, &printed, DEFAULT_TOLERANCE);
        println!("{}: {} table value(s) off by more than {DEFAULT_TOLERANCE}", a.name(), findings.len());
    }
    Ok(())
}
