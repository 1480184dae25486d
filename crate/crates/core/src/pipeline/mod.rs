//! Orchestration: manifest loading, per-view analysis, aggregation, the
//! metrics table, statistics and classifier stages, and plots.

pub mod analyze;
pub mod manifest;
pub mod plot;
pub mod record;
pub mod report;
pub mod table;

pub use analyze::{analyze_image, run_analyze, with_workers, AnalyzeOutcome};
pub use manifest::Manifest;
pub use record::{GroupLabel, PlantRecord};
pub use report::{run_forest, run_stats};
