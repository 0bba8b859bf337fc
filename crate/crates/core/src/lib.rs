//! Weighted rubric engine for assessing frontier AI safety frameworks.
//!
//! The crate parses a criterion tree and per-company assessments, computes
//! every aggregate exactly, and layers cross-assessment analytics, report
//! rendering, a command line and an HTTP service on top.
//!
//! ```
//! use fsf_rubric::{bundled, scoring};
//!
//! let rubric = bundled::rubric().unwrap();
//! let anthropic = bundled::assessment(&rubric, "anthropic").unwrap().unwrap();
//! let report = scoring::score_tree(&rubric, &anthropic, Default::default()).unwrap();
//! assert_eq!(report.total_display, 35);
//! ```

pub mod analytics;
pub mod assessment;
pub mod bundled;
pub mod cli;
pub mod exact;
pub mod reconcile;
pub mod report;
pub mod rubric;
pub mod scoring;
pub mod service;
pub mod store;

pub use assessment::Assessment;
pub use exact::Exact;
pub use rubric::{cid, CriterionId, Rubric};
pub use scoring::{score_tree, AggregateReport, ScoringOptions};

/// Any error the library can produce, for callers that do not care which layer failed.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Rubric(#[from] rubric::RubricError),
    #[error(transparent)]
    Assessment(#[from] assessment::AssessmentError),
    #[error(transparent)]
    Scoring(#[from] scoring::ScoringError),
    #[error(transparent)]
    Analytics(#[from] analytics::AnalyticsError),
    #[error(transparent)]
    Reconcile(#[from] reconcile::ReconcileError),
    #[error(transparent)]
    Report(#[from] report::ReportError),
    #[error(transparent)]
    Store(#[from] store::StoreError),
}
