//! Selection quality against noise ground truth, the k-NN downstream probe,
//! and report output.

mod confusion;
mod knn;
mod report;

pub use confusion::{selection_confusion, selection_confusion_by_class, SelectionConfusion};
pub use knn::{knn_predict, knn_probe};
pub use report::{emit_report, evaluate, ClassReport, DownstreamReport, EvalReport, ReportFormat, PROBE_NOTE};
