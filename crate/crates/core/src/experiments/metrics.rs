//! Run summaries and per-epoch metrics.

use serde::{Deserialize, Serialize};

/// One JSON-lines metrics entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub seed: u64,
    pub epoch: usize,
    pub split: String,
    pub loss: f64,
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compression_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub reason: String,
}

/// Test metric over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub fingerprint: String,
    pub label: String,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation (0 for a single seed).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compression_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<SeedFailure>,
    pub wall_clock_secs: f64,
}

impl MetricsRecord {
    pub fn from_values(label: &str, fingerprint: &str, seeds: Vec<u64>, per_seed: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&per_seed);
        let min = per_seed.iter().copied().fold(f64::INFINITY, f64::min);
        let max = per_seed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            fingerprint: fingerprint.to_string(),
            label: label.to_string(),
            seeds,
            per_seed,
            mean,
            std,
            min,
            max,
            compression_ratio: None,
            failures: Vec::new(),
            wall_clock_secs: 0.0,
        }
    }
}

/// Mean and population standard deviation; NaN for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Rounding in the sum can push the mean of equal values one ulp outside.
    let mean = (values.iter().sum::<f64>() / n).clamp(lo, hi);
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// 64-bit FNV-1a of a string, as 16 hex digits.
pub fn fingerprint(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Fingerprint of any serializable configuration.
pub fn config_fingerprint<C: Serialize>(cfg: &C) -> String {
    fingerprint(&serde_json::to_string(cfg).expect("configuration serializes"))
}
