//! Per-class train/val/test assignment.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{CrackLevel, SampleRecord, Split};
use crate::rng::{derive_seed, seeded_rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let r = [self.train, self.val, self.test];
        if r.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::domain(format!("split ratios must be positive, got {r:?}")));
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("split ratios must sum to 1, got {sum}")));
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }
}

/// Train/val/test counts for `n` items: floors of `n·ratio`, then the
/// leftover items go one each to the largest fractional remainders. Equal
/// remainders favour train, then val.
pub fn split_counts(n: usize, ratios: &SplitRatios) -> Result<[usize; 3]> {
    ratios.validate()?;
    let exact = ratios.as_array().map(|r| n as f64 * r);
    let mut counts = exact.map(|e| (e + 1e-9).floor() as usize);
    let mut order = [0usize, 1, 2];
    let rem = exact.map(|e| (e - (e + 1e-9).floor()).max(0.0));
    order.sort_by(|&a, &b| {
        if (rem[a] - rem[b]).abs() <= 1e-9 {
            a.cmp(&b)
        } else {
            rem[b].total_cmp(&rem[a])
        }
    });
    let assigned: usize = counts.iter().sum();
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    Ok(counts)
}

/// Assign splits within each crack level.
///
/// Each level's records are ordered by image path, shuffled with a stream
/// derived from `seed` and the level, then cut according to
/// [`split_counts`]. The result depends only on the seed, the set of records
/// and the ratios, not on the input order, which is preserved in the output.
pub fn stratified_split(
    mut records: Vec<SampleRecord>,
    ratios: &SplitRatios,
    seed: u64,
) -> Result<Vec<SampleRecord>> {
    ratios.validate()?;
    let mut by_level: BTreeMap<CrackLevel, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_level.entry(r.level).or_default().push(i);
    }
    for (level, mut idx) in by_level {
        idx.sort_by(|&a, &b| records[a].image_path.cmp(&records[b].image_path));
        let mut rng = seeded_rng(derive_seed(seed, &[0x5917, level.number() as u64]));
        idx.shuffle(&mut rng);
        let [n_train, n_val, _] = split_counts(idx.len(), ratios)?;
        for (pos, &i) in idx.iter().enumerate() {
            records[i].split = if pos < n_train {
                Split::Train
            } else if pos < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SourceKind;
    use proptest::prelude::*;

    fn recs(per_level: &[usize]) -> Vec<SampleRecord> {
        let mut out = Vec::new();
        for (li, &n) in per_level.iter().enumerate() {
            let level = CrackLevel::ALL[li];
            let dt = [1.0, 3.0, 5.0][li];
            for i in 0..n {
                out.push(SampleRecord {
                    image_path: format!("images/l{}_{i:05}.png", li + 1).into(),
                    source_kind: SourceKind::Fusion,
                    level,
                    delta_t: dt,
                    split: Split::Train,
                });
            }
        }
        out
    }

    fn tally(rs: &[SampleRecord]) -> BTreeMap<CrackLevel, [usize; 3]> {
        let mut m = BTreeMap::new();
        for r in rs {
            m.entry(r.level).or_insert([0; 3])[r.split.index()] += 1;
        }
        m
    }

    #[test]
    fn hand_worked_counts() {
        let r = SplitRatios::default();
        assert_eq!(split_counts(10, &r).unwrap(), [6, 2, 2]);
        assert_eq!(split_counts(5, &r).unwrap(), [3, 1, 1]);
        assert_eq!(split_counts(1, &r).unwrap(), [1, 0, 0]);
        assert_eq!(split_counts(200, &r).unwrap(), [120, 40, 40]);
        // 4.2 / 1.4 / 1.4: one leftover, val and test tie, val wins.
        assert_eq!(split_counts(7, &r).unwrap(), [4, 2, 1]);
        // 5.4 / 1.8 / 1.8: two leftovers go to val and test.
        assert_eq!(split_counts(9, &r).unwrap(), [5, 2, 2]);
        assert_eq!(split_counts(0, &r).unwrap(), [0, 0, 0]);
    }

    #[test]
    fn bad_ratios() {
        let bad = SplitRatios {
            train: 0.7,
            val: 0.2,
            test: 0.2,
        };
        assert!(matches!(split_counts(10, &bad), Err(Error::Domain(_))));
        let neg = SplitRatios {
            train: 1.2,
            val: -0.1,
            test: -0.1,
        };
        assert!(stratified_split(recs(&[3, 3, 3]), &neg, 0).is_err());
    }

    #[test]
    fn ten_per_level() {
        let out = stratified_split(recs(&[10, 10, 10]), &SplitRatios::default(), 3).unwrap();
        for counts in tally(&out).values() {
            assert_eq!(*counts, [6, 2, 2]);
        }
    }

    #[test]
    fn input_order_does_not_matter() {
        let r = recs(&[5, 7, 9]);
        let a = stratified_split(r.clone(), &SplitRatios::default(), 11).unwrap();
        let mut rev = r;
        rev.reverse();
        let b = stratified_split(rev, &SplitRatios::default(), 11).unwrap();
        let key = |v: &[SampleRecord]| {
            let mut k: Vec<_> = v.iter().map(|r| (r.image_path.clone(), r.split)).collect();
            k.sort();
            k
        };
        assert_eq!(key(&a), key(&b));
    }

    proptest! {
        #[test]
        fn counts_within_one_of_exact(n in 0usize..500, a in 1u32..20, b in 1u32..20, c in 1u32..20) {
            let s = f64::from(a + b + c);
            let ratios = SplitRatios { train: f64::from(a) / s, val: f64::from(b) / s, test: 1.0 - f64::from(a + b) / s };
            prop_assume!(ratios.test > 0.0);
            let counts = split_counts(n, &ratios).unwrap();
            prop_assert_eq!(counts.iter().sum::<usize>(), n);
            for (k, r) in [ratios.train, ratios.val, ratios.test].into_iter().enumerate() {
                prop_assert!((counts[k] as f64 - n as f64 * r).abs() < 1.0);
            }
        }
    }
}
