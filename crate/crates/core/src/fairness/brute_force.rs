//! Direct recounts on pooled plaintext records. Test oracles only: no
//! noise, no encryption, no statistic vectors.

use serde::{Deserialize, Serialize};

use super::{Dataset, FairnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub group: u32,
    pub size: u64,
    pub positives: u64,
    pub positive_rate: Option<f64>,
    pub true_positive_rate: Option<f64>,
    pub false_positive_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteForceMetrics {
    pub dp_violation: f64,
    pub eo_violation: Option<f64>,
    /// Max pairwise positive-rate gap over all `2^K` groups, if none is empty.
    pub intersectional_max: Option<f64>,
    /// One row per attribute bitmask.
    pub groups: Vec<GroupRow>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `cells[mask][label][pred]` for every group.
type Cells = Vec<[[u64; 2]; 2]>;

fn finish(cells: Cells, k: u8) -> Result<BruteForceMetrics> {
    let groups: Vec<GroupRow> = cells
        .iter()
        .enumerate()
        .map(|(mask, c)| {
            let size = c[0][0] + c[0][1] + c[1][0] + c[1][1];
            let positives = c[0][1] + c[1][1];
            GroupRow {
                group: mask as u32,
                size,
                positives,
                positive_rate: ratio(positives, size),
                true_positive_rate: ratio(c[1][1], c[1][0] + c[1][1]),
                false_positive_rate: ratio(c[0][1], c[0][0] + c[0][1]),
            }
        })
        .collect();

    // Primary attribute is bit 0; fold the other bits away.
    let mut primary = [[[0u64; 2]; 2]; 2];
    for (mask, c) in cells.iter().enumerate() {
        for y in 0..2 {
            for p in 0..2 {
                primary[mask & 1][y][p] += c[y][p];
            }
        }
    }
    let size = |a: usize| primary[a].iter().flatten().sum::<u64>();
    let empty: Vec<u32> = (0..2).filter(|&a| size(a) == 0).map(|a| a as u32).collect();
    if !empty.is_empty() {
        return Err(FairnessError::EmptyGroup(empty));
    }
    let rate = |a: usize| (primary[a][0][1] + primary[a][1][1]) as f64 / size(a) as f64;
    let dp = (rate(0) - rate(1)).abs();
    let cond = |a: usize, y: usize| ratio(primary[a][y][1], primary[a][y][0] + primary[a][y][1]);
    let eo = (|| {
        let fpr = (cond(0, 0)? - cond(1, 0)?).abs();
        let tpr = (cond(0, 1)? - cond(1, 1)?).abs();
        Some(fpr.max(tpr))
    })();

    let inter_rates: Option<Vec<f64>> = if k > 1 {
        groups.iter().map(|g| g.positive_rate).collect()
    } else {
        Some(vec![rate(0), rate(1)])
    };
    let intersectional_max = inter_rates.map(|r| {
        let mut m = 0.0f64;
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                m = m.max((r[i] - r[j]).abs());
            }
        }
        m
    });
    Ok(BruteForceMetrics {
        dp_violation: dp,
        eo_violation: eo,
        intersectional_max,
        groups,
    })
}

/// Single streaming pass over the records.
pub fn brute_force_metrics(pooled: &Dataset, threshold: f64) -> Result<BruteForceMetrics> {
    let k = pooled.attribute_count();
    let mut cells: Cells = vec![[[0; 2]; 2]; 1 << k];
    for r in pooled.records() {
        cells[r.attributes as usize][r.label as usize][(r.score > threshold) as usize] += 1;
    }
    finish(cells, k)
}

/// Sorts records by `(attributes, label, prediction)` and counts runs.
pub fn brute_force_metrics_sorted(pooled: &Dataset, threshold: f64) -> Result<BruteForceMetrics> {
    let k = pooled.attribute_count();
    let mut keys: Vec<(u32, bool, bool)> = pooled
        .records()
        .iter()
        .map(|r| (r.attributes, r.label, r.score > threshold))
        .collect();
    keys.sort_unstable();
    let mut cells: Cells = vec![[[0; 2]; 2]; 1 << k];
    let mut i = 0;
    while i < keys.len() {
        let mut j = i;
        while j < keys.len() && keys[j] == keys[i] {
            j += 1;
        }
        let (mask, y, p) = keys[i];
        cells[mask as usize][y as usize][p as usize] = (j - i) as u64;
        i = j;
    }
    finish(cells, k)
}
