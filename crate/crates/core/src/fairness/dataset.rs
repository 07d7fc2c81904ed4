use serde::{Deserialize, Serialize};

use super::{FairnessError, Result};

pub const FEATURE_DIM: usize = 4;

/// Largest supported number of binary protected attributes.
pub const MAX_ATTRIBUTES: u8 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub features: [f64; FEATURE_DIM],
    pub label: bool,
    /// Protected attributes as a bitmask; bit 0 is the primary attribute.
    pub attributes: u32,
    pub score: f64,
}

impl Record {
    pub fn new(label: bool, attributes: u32, score: f64) -> Self {
        Self {
            features: [0.0; FEATURE_DIM],
            label,
            attributes,
            score,
        }
    }

    /// The primary protected attribute.
    pub fn primary(&self) -> usize {
        (self.attributes & 1) as usize
    }

    pub fn predicted(&self, threshold: f64) -> bool {
        self.score > threshold
    }
}

/// One participant's records over `attribute_count` binary attributes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    attribute_count: u8,
    records: Vec<Record>,
}

impl Dataset {
    pub fn new(attribute_count: u8, records: Vec<Record>) -> Result<Self> {
        if attribute_count == 0 || attribute_count > MAX_ATTRIBUTES {
            return Err(FairnessError::AttributeCount(attribute_count));
        }
        for (index, r) in records.iter().enumerate() {
            if !(0.0..=1.0).contains(&r.score) {
                return Err(FairnessError::InvalidRecord {
                    index,
                    reason: format!("score {} outside [0, 1]", r.score),
                });
            }
            if r.attributes >> attribute_count != 0 {
                return Err(FairnessError::InvalidRecord {
                    index,
                    reason: format!(
                        "attributes {:#b} exceed K = {attribute_count}",
                        r.attributes
                    ),
                });
            }
        }
        Ok(Self {
            attribute_count,
            records,
        })
    }

    pub fn attribute_count(&self) -> u8 {
        self.attribute_count
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All records of `parts`, in order.
    pub fn pooled<'a, I>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Dataset>,
    {
        let mut k = None;
        let mut records = Vec::new();
        for d in parts {
            match k {
                Some(k) if k != d.attribute_count => {
                    return Err(FairnessError::AttributeMismatch(k, d.attribute_count))
                }
                _ => k = Some(d.attribute_count),
            }
            records.extend_from_slice(&d.records);
        }
        Dataset::new(k.unwrap_or(1), records)
    }
}
