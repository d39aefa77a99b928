//! Segmentation-guided fitting, the all-points baseline, and detection
//! scoring: IoT matching, PAP/PAR and fitting error.

mod fitting;
mod matching;
mod report;

pub use fitting::{
    eransac_baseline, eransac_baseline_with_normals, primitive_fitting, primitive_fitting_with_normals, scan_normals,
};
pub use matching::{
    fitting_error, instance_points, iot, match_detections, EvalOptions, FitErrorSource, Match, ScanEvaluation,
};
pub use report::{aggregate_report, format_report_csv, format_report_table, parse_report_csv, ClassCounts, DetectionReport, CSV_HEADER};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("empty true instance")]
    EmptyInstance,
    #[error("predictions, labels and image sizes disagree")]
    SizeMismatch,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
