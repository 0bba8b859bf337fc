//! Merges independent rater sheets. Agreed leaves merge; any disagreement is
//! reported for discussion and never resolved automatically.
//!
//! cargo run --example reconcile_raters

use fsf_rubric::bundled;
use fsf_rubric::reconcile::{reconcile, RaterSheet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rubric = bundled::rubric()?;
    let first = RaterSheet::parse(r#"{"rater_id": "rater-a", "scores": {"1.1.1": 25, "1.1.2": 10, "1.2.1": 0}}"#)?;
    let second = RaterSheet::parse(r#"{"rater_id": "rater-b", "scores": {"1.1.1": 25, "1.1.2": 25, "1.2.1": 0}}"#)?;

    let outcome = reconcile(&[first, second], &rubric)?;
    for (id, score) in &outcome.merged {
        println!("agreed {id}: {score}");
    }
    for d in &outcome.disagreements {
        let votes: Vec<String> = d.scores.iter().map(|s| format!("{}={}", s.rater_id, s.score)).collect();
        println!("disagree {}: {}", d.criterion_id, votes.join(", "));
    }
    Ok(())
}
