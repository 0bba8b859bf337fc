//! The twelve-company dataset and rubric compiled into the library.

use crate::assessment::{Assessment, AssessmentError};
use crate::rubric::{Rubric, RubricError};

pub const RUBRIC_JSON: &str = include_str!("../data/rubric.json");
pub const COMPARISON_TABLE_JSON: &str = include_str!("../data/comparison_table.json");

/// `(slug, canonical document)` for every bundled assessment, sorted by slug.
pub const ASSESSMENTS: [(&str, &str); 12] = [
    ("amazon", include_str!("../data/assessments/amazon.json")),
    ("anthropic", include_str!("../data/assessments/anthropic.json")),
    ("cohere", include_str!("../data/assessments/cohere.json")),
    ("g42", include_str!("../data/assessments/g42.json")),
    ("google-deepmind", include_str!("../data/assessments/google-deepmind.json")),
    ("magic", include_str!("../data/assessments/magic.json")),
    ("meta", include_str!("../data/assessments/meta.json")),
    ("microsoft", include_str!("../data/assessments/microsoft.json")),
    ("naver", include_str!("../data/assessments/naver.json")),
    ("nvidia", include_str!("../data/assessments/nvidia.json")),
    ("openai", include_str!("../data/assessments/openai.json")),
    ("xai", include_str!("../data/assessments/xai.json")),
];

pub fn rubric() -> Result<Rubric, RubricError> {
    Rubric::parse(RUBRIC_JSON)
}

pub fn assessment_document(slug: &str) -> Option<&'static str> {
    ASSESSMENTS.iter().find(|(s, _)| *s == slug).map(|(_, d)| *d)
}

pub fn assessment(rubric: &Rubric, slug: &str) -> Option<Result<Assessment, AssessmentError>> {
    assessment_document(slug).map(|doc| Assessment::parse(doc, rubric.scale()))
}

/// Every bundled assessment keyed by slug.
pub fn assessments(rubric: &Rubric) -> Result<Vec<(String, Assessment)>, AssessmentError> {
    ASSESSMENTS
        .iter()
        .map(|(slug, doc)| Ok((slug.to_string(), Assessment::parse(doc, rubric.scale())?)))
        .collect()
}

/// One column of the main results table as printed, including "Best in class".
#[derive(Debug, Clone, serde::Deserialize)]
pub struct PrintedColumn {
    pub company: String,
    pub values: indexmap::IndexMap<String, i64>,
}

#[derive(Debug, Clone, serde::Deserialize)]
struct PrintedTable {
    columns: Vec<PrintedColumn>,
}

/// The printed comparison table, used for cross-checks and the version diff example.
pub fn comparison_table() -> Vec<PrintedColumn> {
    let table: PrintedTable = serde_json::from_str(COMPARISON_TABLE_JSON).expect("bundled table parses");
    table.columns
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rubric::{cid, RubricIssueKind, Severity};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn rubric_shape() {
        let r = rubric().unwrap();
        assert_eq!(r.dimensions().len(), 4);
        assert_eq!(r.leaves().count(), 65);
        assert_eq!(r.node_count(), 96);
        assert!(r.dimensions().iter().all(|d| d.weight == BigRational::from_integer(BigInt::from(25))));
    }

    #[test]
    fn rubric_round_trips_byte_for_byte() {
        assert_eq!(rubric().unwrap().to_canonical_json().unwrap(), RUBRIC_JSON);
    }

    #[test]
    fn rubric_has_notices_only() {
        let issues = rubric().unwrap().validate();
        assert!(issues.iter().all(|i| i.severity == Severity::Notice), "{issues:?}");
        let normalized: Vec<String> = issues
            .iter()
            .filter(|i| matches!(i.kind, RubricIssueKind::WeightsNormalized { .. }))
            .map(|i| i.node.as_ref().unwrap().to_string())
            .collect();
        assert!(normalized.contains(&"2.1.1".to_string()));
        assert!(normalized.contains(&"4.2".to_string()));
    }

    #[test]
    fn assessments_round_trip_and_validate() {
        let r = rubric().unwrap();
        for (slug, doc) in ASSESSMENTS {
            let a = Assessment::parse(doc, r.scale()).unwrap();
            assert_eq!(a.to_canonical_json(), doc, "{slug}");
            assert_eq!(a.entries.len(), 65, "{slug}");
            let issues = a.validate(&r);
            assert!(!crate::assessment::has_errors(&issues), "{slug}: {issues:?}");
        }
    }

    #[test]
    fn table_has_thirteen_columns() {
        let t = comparison_table();
        assert_eq!(t.len(), 13);
        assert_eq!(t[12].company, "Best in class");
        assert_eq!(t[0].values["total"], 35);
        assert!(t.iter().all(|c| c.values.len() == 97));
        let _ = cid("1");
    }
}
