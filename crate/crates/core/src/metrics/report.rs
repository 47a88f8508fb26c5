//! Fixed-width text rendering of metric reports.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::MetricsReport;
use crate::dataset::{CrackLevel, SourceKind};

/// `0.9683` → `"96.83%"`.
pub fn format_percent(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

fn frac(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Summary table (one row per source) followed by each source's confusion
/// matrix with count and percent-of-total per cell, per-row recall and
/// per-column precision margins.
pub fn render_report(reports: &BTreeMap<SourceKind, MetricsReport>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<14} | {:>9} | {:>9} | {:>9} | {:>9}",
        "Image Type", "Accuracy", "Precision", "Recall", "F1"
    );
    let _ = writeln!(s, "{}", "-".repeat(14 + 4 * 12));
    for (kind, r) in reports {
        let _ = writeln!(
            s,
            "{:<14} | {:>9} | {:>9} | {:>9} | {:>9}",
            kind.as_str(),
            format_percent(r.accuracy),
            format_percent(r.macro_precision),
            format_percent(r.macro_recall),
            format_percent(r.macro_f1)
        );
    }

    for (kind, r) in reports {
        let cm = &r.confusion;
        let total = cm.total();
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "Confusion matrix: {kind} (rows = actual, columns = predicted, n = {total})"
        );
        let _ = write!(s, "{:<10}", "");
        for l in CrackLevel::ALL {
            let _ = write!(s, "{:>18}", l.to_string());
        }
        let _ = writeln!(s, "{:>20}", "recall / miss");
        for (i, l) in CrackLevel::ALL.iter().enumerate() {
            let _ = write!(s, "{:<10}", l.to_string());
            for &c in &cm.counts[i] {
                let cell = format!("{c} ({})", format_percent(frac(c, total)));
                let _ = write!(s, "{cell:>18}");
            }
            let rec = frac(cm.counts[i][i], cm.row_total(i));
            let _ = writeln!(
                s,
                "{:>20}",
                format!("{} / {}", format_percent(rec), format_percent(1.0 - rec))
            );
        }
        let _ = write!(s, "{:<10}", "precision");
        for j in 0..3 {
            let p = frac(cm.counts[j][j], cm.col_total(j));
            let _ = write!(
                s,
                "{:>18}",
                format!("{} / {}", format_percent(p), format_percent(1.0 - p))
            );
        }
        let acc = frac(cm.trace(), total);
        let _ = writeln!(
            s,
            "{:>20}",
            format!("{} / {}", format_percent(acc), format_percent(1.0 - acc))
        );
        if !r.undefined.is_empty() {
            let _ = writeln!(s, "undefined (0/0, reported as 0): {}", r.undefined.join(", "));
        }
    }
    s
}
