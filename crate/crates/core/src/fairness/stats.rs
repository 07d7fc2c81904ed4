use serde::{Deserialize, Serialize};

use super::{Dataset, FairnessError, Result};

pub const STAT_COUNT: usize = 8;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Counts `[y·2 + ŷ]` for one group.
pub type GroupCounts = [u64; 4];

pub fn stat_index(a: usize, y: bool, y_hat: bool) -> usize {
    a * 4 + (y as usize) * 2 + y_hat as usize
}

/// Length of the statistic vector for `k` attributes.
pub fn vector_len(k: u8) -> usize {
    if k > 1 {
        STAT_COUNT + (4usize << k)
    } else {
        STAT_COUNT
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalStatistics {
    pub attribute_count: u8,
    pub counts: [u64; STAT_COUNT],
    /// Per-group counts indexed by attribute bitmask; present when `K > 1`.
    pub intersectional_counts: Option<Vec<GroupCounts>>,
    pub sample_size: u64,
}

pub fn extract_local_stats(ds: &Dataset, threshold: f64) -> Result<LocalStatistics> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(FairnessError::InvalidThreshold(threshold));
    }
    if ds.is_empty() {
        return Err(FairnessError::EmptyDataset);
    }
    let k = ds.attribute_count();
    let mut counts = [0u64; STAT_COUNT];
    let mut groups = (k > 1).then(|| vec![[0u64; 4]; 1 << k]);
    for r in ds.records() {
        let y_hat = r.predicted(threshold);
        counts[stat_index(r.primary(), r.label, y_hat)] += 1;
        if let Some(g) = groups.as_mut() {
            g[r.attributes as usize][(r.label as usize) * 2 + y_hat as usize] += 1;
        }
    }
    Ok(LocalStatistics {
        attribute_count: k,
        counts,
        intersectional_counts: groups,
        sample_size: ds.len() as u64,
    })
}

impl LocalStatistics {
    /// The statistic vector submitted to the protocol.
    pub fn to_vector(&self) -> Vec<u64> {
        let mut v = self.counts.to_vec();
        if let Some(groups) = &self.intersectional_counts {
            v.extend(groups.iter().flatten());
        }
        v
    }

    /// Inverse of [`to_vector`](Self::to_vector).
    pub fn from_vector(attribute_count: u8, v: &[u64]) -> Result<Self> {
        let expected = vector_len(attribute_count);
        if v.len() != expected {
            return Err(FairnessError::VectorLength {
                got: v.len(),
                expected,
            });
        }
        let counts: [u64; STAT_COUNT] = v[..STAT_COUNT].try_into().unwrap();
        let intersectional_counts = (attribute_count > 1).then(|| {
            v[STAT_COUNT..]
                .chunks_exact(4)
                .map(|c| c.try_into().unwrap())
                .collect()
        });
        Ok(Self {
            attribute_count,
            counts,
            intersectional_counts,
            sample_size: counts.iter().sum(),
        })
    }

    /// Sums the intersectional counts over every attribute but the first.
    pub fn marginal_counts(&self) -> Option<[u64; STAT_COUNT]> {
        let groups = self.intersectional_counts.as_ref()?;
        let mut out = [0u64; STAT_COUNT];
        for (mask, g) in groups.iter().enumerate() {
            for (i, c) in g.iter().enumerate() {
                out[(mask & 1) * 4 + i] += c;
            }
        }
        Some(out)
    }
}

/// Global statistic vector as fixed-point values, possibly noised.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateStatistics {
    pub attribute_count: u8,
    pub fixed_point_scale: u64,
    pub noised_fixed: Vec<i128>,
    /// Exact pooled counts; simulator-side ground truth only.
    pub true_counts: Option<Vec<u64>>,
}

impl AggregateStatistics {
    pub fn from_fixed(
        attribute_count: u8,
        fixed_point_scale: u64,
        noised_fixed: Vec<i128>,
    ) -> Result<Self> {
        let expected = vector_len(attribute_count);
        if noised_fixed.len() != expected {
            return Err(FairnessError::VectorLength {
                got: noised_fixed.len(),
                expected,
            });
        }
        Ok(Self {
            attribute_count,
            fixed_point_scale,
            noised_fixed,
            true_counts: None,
        })
    }

    /// Noiseless aggregate of exact counts.
    pub fn exact(attribute_count: u8, fixed_point_scale: u64, counts: &[u64]) -> Result<Self> {
        let fixed = counts
            .iter()
            .map(|&c| c as i128 * fixed_point_scale as i128)
            .collect();
        Ok(
            Self::from_fixed(attribute_count, fixed_point_scale, fixed)?
                .with_truth(counts.to_vec()),
        )
    }

    /// Plaintext sum of local statistics.
    pub fn sum_of(parts: &[LocalStatistics], fixed_point_scale: u64) -> Result<Self> {
        let first = parts.first().ok_or(FairnessError::EmptyDataset)?;
        let k = first.attribute_count;
        let mut total = vec![0u64; vector_len(k)];
        for p in parts {
            if p.attribute_count != k {
                return Err(FairnessError::AttributeMismatch(k, p.attribute_count));
            }
            for (t, v) in total.iter_mut().zip(p.to_vector()) {
                *t += v;
            }
        }
        Self::exact(k, fixed_point_scale, &total)
    }

    pub fn with_truth(mut self, true_counts: Vec<u64>) -> Self {
        self.true_counts = Some(true_counts);
        self
    }

    pub fn len(&self) -> usize {
        self.noised_fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.noised_fixed.is_empty()
    }

    /// Decoded value of statistic `i`.
    pub fn noised(&self, i: usize) -> f64 {
        self.noised_fixed[i] as f64 / self.fixed_point_scale as f64
    }

    pub fn noised_counts(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.noised(i)).collect()
    }
}
