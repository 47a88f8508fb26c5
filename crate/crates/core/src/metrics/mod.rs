//! Confusion matrices and the accuracy / precision / recall / F1 family.

mod confusion;
mod report;

pub use confusion::{compute_metrics, ClassMetrics, ConfusionMatrix, FormulaSet, MetricsReport};
pub use report::{format_percent, render_report};
