use serde::{Deserialize, Serialize};

use crate::dataset::CrackLevel;
use crate::{Error, Result};

const N: usize = 3;

/// Counts indexed `[actual][predicted]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N]; N],
}

impl ConfusionMatrix {
    pub fn new(counts: [[u64; N]; N]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn accumulate(&mut self, actual: CrackLevel, predicted: CrackLevel) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..N).map(|k| self.counts[k][k]).sum()
    }

    /// Cell-wise sum; associative and commutative, so shards can be merged
    /// in any order.
    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        let mut out = *self;
        for (row, orow) in out.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
        out
    }

    pub fn row_total(&self, actual: usize) -> u64 {
        self.counts[actual].iter().sum()
    }

    pub fn col_total(&self, predicted: usize) -> u64 {
        self.counts.iter().map(|r| r[predicted]).sum()
    }
}

/// Which metric definitions to apply.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaSet {
    /// Accuracy `(TP+TN)/total`, F1 `2PR/(P+R)`.
    #[default]
    Standard,
    /// The variants as typeset in the source report: accuracy
    /// `(TP+FN)/total` and F-score `PR/(P+R)`. Only useful for showing the
    /// discrepancy.
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub level: u8,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub formulas: FormulaSet,
    pub total: u64,
    /// Overall accuracy. Under the standard formulas this is trace / total.
    pub accuracy: f64,
    pub macro_accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Metrics that were 0/0 and reported as 0, e.g. `precision[LEVEL_2]`.
    pub undefined: Vec<String>,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: u64, den: u64, name: &str, level: usize, undefined: &mut Vec<String>) -> f64 {
    if den == 0 {
        undefined.push(format!("{name}[LEVEL_{}]", level + 1));
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One-vs-rest metrics per class plus unweighted macro averages.
pub fn compute_metrics(cm: &ConfusionMatrix, formulas: FormulaSet) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::domain("confusion matrix is empty"));
    }
    let mut undefined = Vec::new();
    let mut per_class = Vec::with_capacity(N);
    for k in 0..N {
        let tp = cm.counts[k][k];
        let fp = cm.col_total(k) - tp;
        let fn_ = cm.row_total(k) - tp;
        let tn = total - tp - fp - fn_;
        let precision = ratio(tp, tp + fp, "precision", k, &mut undefined);
        let recall = ratio(tp, tp + fn_, "recall", k, &mut undefined);
        let (accuracy, f1) = match formulas {
            FormulaSet::Standard => ((tp + tn) as f64 / total as f64, 2.0 * precision * recall),
            FormulaSet::Printed => ((tp + fn_) as f64 / total as f64, precision * recall),
        };
        let f1 = if precision + recall == 0.0 {
            undefined.push(format!("f1[LEVEL_{}]", k + 1));
            0.0
        } else {
            f1 / (precision + recall)
        };
        per_class.push(ClassMetrics {
            level: k as u8 + 1,
            tp,
            fp,
            fn_,
            tn,
            accuracy,
            precision,
            recall,
            f1,
        });
    }
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / N as f64;
    let macro_accuracy = mean(|c| c.accuracy);
    let accuracy = match formulas {
        FormulaSet::Standard => cm.trace() as f64 / total as f64,
        FormulaSet::Printed => macro_accuracy,
    };
    Ok(MetricsReport {
        formulas,
        total,
        accuracy,
        macro_accuracy,
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        macro_f1: mean(|c| c.f1),
        per_class,
        undefined,
        confusion: *cm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use CrackLevel::*;

    #[test]
    fn accumulate_increments_one_cell() {
        let mut cm = ConfusionMatrix::default();
        cm.accumulate(Level1, Level1);
        assert_eq!(cm.counts[0][0], 1);
        assert_eq!(cm.total(), 1);
        cm.accumulate(Level3, Level2);
        assert_eq!(cm.counts[2][1], 1);
        assert_eq!(cm.total(), 2);
    }

    #[test]
    fn row_sums_replay_stream() {
        let stream = [
            (Level1, Level2),
            (Level2, Level2),
            (Level3, Level1),
            (Level1, Level1),
            (Level3, Level3),
            (Level1, Level3),
        ];
        let mut cm = ConfusionMatrix::default();
        for (a, p) in stream {
            cm.accumulate(a, p);
        }
        for l in CrackLevel::ALL {
            let n = stream.iter().filter(|(a, _)| *a == l).count() as u64;
            assert_eq!(cm.row_total(l.index()), n);
        }
        assert_eq!(cm.total(), stream.len() as u64);
    }

    #[test]
    fn perfect_classifier() {
        let cm = ConfusionMatrix::new([[90, 0, 0], [0, 90, 0], [0, 0, 90]]);
        let r = compute_metrics(&cm, FormulaSet::Standard).unwrap();
        assert_eq!(r.accuracy, 1.0);
        for c in &r.per_class {
            assert_eq!((c.precision, c.recall, c.f1), (1.0, 1.0, 1.0));
        }
        assert!(r.undefined.is_empty());
    }

    #[test]
    fn worked_matrix() {
        let cm = ConfusionMatrix::new([[8, 2, 0], [1, 9, 0], [0, 0, 10]]);
        let r = compute_metrics(&cm, FormulaSet::Standard).unwrap();
        assert!((r.accuracy - 0.9).abs() < 1e-12);
        let c0 = &r.per_class[0];
        assert_eq!((c0.tp, c0.fp, c0.fn_, c0.tn), (8, 1, 2, 19));
        assert!((c0.precision - 8.0 / 9.0).abs() < 1e-12);
        assert!((c0.recall - 0.8).abs() < 1e-12);
        // 2·(8/9)·0.8 / (8/9 + 0.8) = 16/19
        assert!((c0.f1 - 16.0 / 19.0).abs() < 1e-12);
        assert!((c0.f1 - 0.8421).abs() < 1e-4);
    }

    #[test]
    fn relabeling_permutes_metrics() {
        let cm = ConfusionMatrix::new([[8, 2, 0], [1, 9, 3], [4, 0, 10]]);
        let perm = [2usize, 0, 1];
        let mut p = ConfusionMatrix::default();
        for i in 0..3 {
            for j in 0..3 {
                p.counts[perm[i]][perm[j]] = cm.counts[i][j];
            }
        }
        let a = compute_metrics(&cm, FormulaSet::Standard).unwrap();
        let b = compute_metrics(&p, FormulaSet::Standard).unwrap();
        assert_eq!(a.accuracy, b.accuracy);
        for i in 0..3 {
            let (x, y) = (&a.per_class[i], &b.per_class[perm[i]]);
            assert_eq!((x.precision, x.recall, x.f1), (y.precision, y.recall, y.f1));
        }
    }

    #[test]
    fn zero_over_zero_is_flagged() {
        let cm = ConfusionMatrix::new([[5, 0, 0], [3, 0, 0], [0, 0, 4]]);
        let r = compute_metrics(&cm, FormulaSet::Standard).unwrap();
        assert_eq!(r.per_class[1].precision, 0.0);
        assert!(r.undefined.contains(&"precision[LEVEL_2]".to_string()));
        assert!(r.undefined.contains(&"f1[LEVEL_2]".to_string()));
        assert!(!r.undefined.contains(&"recall[LEVEL_2]".to_string()));
    }

    #[test]
    fn empty_matrix_is_domain_error() {
        assert!(matches!(
            compute_metrics(&ConfusionMatrix::default(), FormulaSet::Standard),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn printed_formulas_differ_as_expected() {
        let cm = ConfusionMatrix::new([[8, 2, 0], [1, 9, 0], [0, 0, 10]]);
        let s = compute_metrics(&cm, FormulaSet::Standard).unwrap();
        let p = compute_metrics(&cm, FormulaSet::Printed).unwrap();
        for (a, b) in s.per_class.iter().zip(&p.per_class) {
            assert!((b.f1 * 2.0 - a.f1).abs() < 1e-12);
        }
        // Σ_k (TP_k + FN_k) is the total, so the printed accuracy averages to 1/3.
        assert!((p.accuracy - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn merge_is_cellwise_sum() {
        let a = ConfusionMatrix::new([[1, 2, 3], [4, 5, 6], [7, 8, 9]]);
        let b = ConfusionMatrix::new([[9, 8, 7], [6, 5, 4], [3, 2, 1]]);
        assert_eq!(a.merge(&b), ConfusionMatrix::new([[10; 3]; 3]));
        assert_eq!(a.merge(&b), b.merge(&a));
    }
}
