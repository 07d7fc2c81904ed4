use serde::{Deserialize, Serialize};

use super::{AggregateStatistics, FairnessError, Result, STAT_COUNT};
use crate::privacy::accuracy_bound;

/// Recorded in every report: the noise level in the intersectional bound.
pub const SIGMA_NOISE_ASSUMPTION: &str = "sigma_noise equals the per-count Laplace scale sigma";

/// `pos / (neg + pos)`.
pub fn positive_rate(neg: f64, pos: f64) -> f64 {
    pos / (neg + pos)
}

/// Decoded counts with negative values raised to one fixed-point unit.
struct Clamped {
    values: Vec<f64>,
    clamped: Vec<bool>,
}

impl Clamped {
    fn new(agg: &AggregateStatistics) -> Self {
        let floor = 1.0 / agg.fixed_point_scale as f64;
        let (values, clamped) = agg
            .noised_fixed
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                if f < 0 {
                    (floor, true)
                } else {
                    (agg.noised(i), false)
                }
            })
            .unzip();
        Self { values, clamped }
    }

    fn any(&self) -> Vec<usize> {
        (0..self.clamped.len())
            .filter(|&i| self.clamped[i])
            .collect()
    }

    /// `(neg, pos)` over the given `(negative, positive)` index pairs.
    fn rate(&self, cells: &[(usize, usize)], what: impl FnOnce() -> String) -> Result<(f64, f64)> {
        let all_clamped = cells
            .iter()
            .all(|&(n, p)| self.clamped[n] && self.clamped[p]);
        let (mut neg, mut pos) = (0.0, 0.0);
        for &(n, p) in cells {
            neg += self.values[n];
            pos += self.values[p];
        }
        if all_clamped || neg + pos <= 0.0 {
            return Err(FairnessError::DegenerateGroup { what: what() });
        }
        Ok((neg, pos))
    }
}

fn group_cells(base: usize) -> [(usize, usize); 2] {
    [(base, base + 1), (base + 2, base + 3)]
}

fn dp_parts(c: &Clamped) -> Result<([f64; 2], [f64; 2])> {
    let mut rates = [0.0; 2];
    let mut sizes = [0.0; 2];
    for a in 0..2 {
        let (neg, pos) = c.rate(&group_cells(a * 4), || format!("group a={a}"))?;
        rates[a] = positive_rate(neg, pos);
        sizes[a] = neg + pos;
    }
    Ok((rates, sizes))
}

fn eo_parts(c: &Clamped) -> Result<[[f64; 2]; 2]> {
    let mut rates = [[0.0; 2]; 2];
    for (a, row) in rates.iter_mut().enumerate() {
        for (y, rate) in row.iter_mut().enumerate() {
            let base = a * 4 + y * 2;
            let (neg, pos) = c.rate(&[(base, base + 1)], || format!("stratum a={a}, y={y}"))?;
            *rate = positive_rate(neg, pos);
        }
    }
    Ok(rates)
}

fn eo_from_rates(rates: &[[f64; 2]; 2]) -> f64 {
    (rates[0][0] - rates[1][0])
        .abs()
        .max((rates[0][1] - rates[1][1]).abs())
}

/// `|P̂₀ − P̂₁|` with `P̂_a` the positive-prediction rate of group `a`.
pub fn dp_violation(agg: &AggregateStatistics) -> Result<f64> {
    let (rates, _) = dp_parts(&Clamped::new(agg))?;
    Ok((rates[0] - rates[1]).abs())
}

/// Largest gap in true- or false-positive rate between the two groups.
pub fn eo_violation(agg: &AggregateStatistics) -> Result<f64> {
    Ok(eo_from_rates(&eo_parts(&Clamped::new(agg))?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionalReport {
    pub attribute_count: u8,
    /// Largest pairwise gap in positive-prediction rate.
    pub max_disparity: f64,
    pub max_disparity_raw: f64,
    pub mean_disparity: f64,
    /// `K·σ / min_a n_a`.
    pub error_bound: f64,
    pub group_rates: Vec<f64>,
    pub group_sizes: Vec<f64>,
    pub sigma_noise_assumption: String,
}

/// Disparity across all `2^K` groups of an aggregate. For `K = 1` the groups
/// are the two primary-attribute groups and the result equals
/// [`dp_violation`].
pub fn intersectional_violation(
    agg: &AggregateStatistics,
    sigma: f64,
) -> Result<IntersectionalReport> {
    let k = agg.attribute_count;
    if k > 3 {
        return Err(FairnessError::AttributeCount(k));
    }
    let c = Clamped::new(agg);
    let (offset, groups) = if k > 1 {
        (STAT_COUNT, 1usize << k)
    } else {
        (0, 2)
    };
    let mut rates = Vec::with_capacity(groups);
    let mut sizes = Vec::with_capacity(groups);
    let mut empty = Vec::new();
    for g in 0..groups {
        match c.rate(&group_cells(offset + 4 * g), String::new) {
            Ok((neg, pos)) => {
                rates.push(positive_rate(neg, pos));
                sizes.push(neg + pos);
            }
            Err(_) => empty.push(g as u32),
        }
    }
    if !empty.is_empty() {
        return Err(FairnessError::EmptyGroup(empty));
    }
    let mut max = 0.0f64;
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..groups {
        for j in i + 1..groups {
            let d = (rates[i] - rates[j]).abs();
            max = max.max(d);
            sum += d;
            pairs += 1;
        }
    }
    let min_size = sizes.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(IntersectionalReport {
        attribute_count: k,
        max_disparity: max.clamp(0.0, 1.0),
        max_disparity_raw: max,
        mean_disparity: sum / pairs as f64,
        error_bound: k as f64 * sigma / min_size,
        group_rates: rates,
        group_sizes: sizes,
        sigma_noise_assumption: SIGMA_NOISE_ASSUMPTION.to_string(),
    })
}

/// Parameters that enter the report's bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricInputs {
    pub sigma: f64,
    pub n_participants: u64,
    pub delta_fair: f64,
}

/// A metric after release-time noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReleasedMetric {
    pub value: f64,
    pub raw: f64,
    pub sigma_def: f64,
}

/// Privacy cost attached to a report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyCharge {
    pub rounds: u64,
    pub composed_epsilon: f64,
    pub composed_delta: f64,
    pub protocol_epsilon: f64,
    pub local_epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub attribute_count: u8,
    pub fixed_point_scale: u64,
    pub noised_counts: Vec<f64>,
    pub clamped_counts: Vec<usize>,
    pub degenerate: bool,
    pub group_positive_rates: [f64; 2],
    pub group_sizes: [f64; 2],
    /// `[a][y]` positive-prediction rate.
    pub conditional_rates: Option<[[f64; 2]; 2]>,
    pub dp_violation: f64,
    pub dp_violation_raw: f64,
    pub eo_violation: Option<f64>,
    pub eo_violation_raw: Option<f64>,
    pub intersectional: Option<IntersectionalReport>,
    /// Why an optional metric is missing.
    pub notes: Vec<String>,
    pub sigma: f64,
    pub delta_fair: f64,
    pub accuracy_epsilon_fair: f64,
    pub released_dp: Option<ReleasedMetric>,
    pub privacy: Option<PrivacyCharge>,
}

impl FairnessReport {
    pub fn compute(agg: &AggregateStatistics, inputs: MetricInputs) -> Result<Self> {
        let c = Clamped::new(agg);
        let (rates, sizes) = dp_parts(&c)?;
        let dp = (rates[0] - rates[1]).abs();
        let mut notes = Vec::new();
        let conditional = eo_parts(&c)
            .map_err(|e| notes.push(format!("equalized odds undefined: {e}")))
            .ok();
        let eo = conditional.as_ref().map(eo_from_rates);
        let intersectional = intersectional_violation(agg, inputs.sigma)
            .map_err(|e| notes.push(format!("intersectional disparity undefined: {e}")))
            .ok();
        let group_n = |s: f64| (s.round() as u64).max(1);
        let accuracy = accuracy_bound(
            inputs.sigma,
            inputs.n_participants,
            group_n(sizes[0]),
            group_n(sizes[1]),
            inputs.delta_fair,
        )
        .map_err(|e| FairnessError::Parameter(e.to_string()))?;
        let clamped = c.any();
        Ok(Self {
            attribute_count: agg.attribute_count,
            fixed_point_scale: agg.fixed_point_scale,
            noised_counts: agg.noised_counts(),
            degenerate: !clamped.is_empty(),
            clamped_counts: clamped,
            group_positive_rates: rates,
            group_sizes: sizes,
            conditional_rates: conditional,
            dp_violation: dp.clamp(0.0, 1.0),
            dp_violation_raw: dp,
            eo_violation: eo.map(|e| e.clamp(0.0, 1.0)),
            eo_violation_raw: eo,
            intersectional,
            notes,
            sigma: inputs.sigma,
            delta_fair: inputs.delta_fair,
            accuracy_epsilon_fair: accuracy,
            released_dp: None,
            privacy: None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub const CSV_HEADER: [&'static str; 12] = [
        "dp_violation",
        "dp_violation_raw",
        "eo_violation",
        "eo_violation_raw",
        "intersectional_max",
        "intersectional_mean",
        "intersectional_bound",
        "accuracy_epsilon_fair",
        "delta_fair",
        "released_dp",
        "released_dp_raw",
        "degenerate",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let int = self.intersectional.as_ref();
        vec![
            self.dp_violation.to_string(),
            self.dp_violation_raw.to_string(),
            opt(self.eo_violation),
            opt(self.eo_violation_raw),
            opt(int.map(|i| i.max_disparity)),
            opt(int.map(|i| i.mean_disparity)),
            opt(int.map(|i| i.error_bound)),
            self.accuracy_epsilon_fair.to_string(),
            self.delta_fair.to_string(),
            opt(self.released_dp.map(|r| r.value)),
            opt(self.released_dp.map(|r| r.raw)),
            self.degenerate.to_string(),
        ]
    }
}
