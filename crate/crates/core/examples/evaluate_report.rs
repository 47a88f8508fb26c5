//! Score a confusion matrix with the standard and the printed formula sets
//! and render the comparison report.
//!
//! ```text
//! cargo run --example evaluate_report
//! ```

use std::collections::BTreeMap;

use thermocrack::dataset::{CrackLevel, SourceKind};
use thermocrack::metrics::{compute_metrics, render_report, ConfusionMatrix, FormulaSet};

fn main() -> thermocrack::Result<()> {
    let fusion = ConfusionMatrix::new([[38, 2, 0], [3, 35, 2], [0, 1, 39]]);
    let mut msx = ConfusionMatrix::default();
    for (actual, predicted, n) in [(1, 1, 39), (1, 2, 1), (2, 2, 37), (2, 3, 3), (3, 3, 40)] {
        for _ in 0..n {
            msx.accumulate(CrackLevel::from_number(actual)?, CrackLevel::from_number(predicted)?);
        }
    }

    let mut reports = BTreeMap::new();
    reports.insert(SourceKind::Fusion, compute_metrics(&fusion, FormulaSet::Standard)?);
    reports.insert(SourceKind::MsxLike, compute_metrics(&msx, FormulaSet::Standard)?);
    print!("{}", render_report(&reports));

    let printed = compute_metrics(&fusion, FormulaSet::Printed)?;
    println!("\nfusion, printed formulas:");
    for (level, c) in CrackLevel::ALL.iter().zip(&printed.per_class) {
        println!("  {level}  accuracy {:.4}  F {:.4}", c.accuracy, c.f1);
    }
    Ok(())
}
