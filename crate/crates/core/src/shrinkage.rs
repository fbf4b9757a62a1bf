//! Soft-threshold shrinkage of high-pass framelet coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framelet::CoefficientStack;
use crate::scalar::Scalar;

/// Entries with magnitude at or below this count as zero.
pub const NONZERO_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    #[default]
    Global,
    /// Threshold multiplied by the RMS of each high-pass block.
    EnergyScaled,
}

/// Shrinkage settings. Only high-pass blocks are ever thresholded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig<T> {
    pub sigma: T,
    pub mode: ThresholdMode,
}

impl<T: Scalar> ThresholdConfig<T> {
    pub fn new(sigma: T, mode: ThresholdMode) -> Result<Self> {
        if sigma.is_nan() || sigma < T::zero() {
            return Err(Error::InvalidParameter(format!("sigma {sigma} must be nonnegative")));
        }
        Ok(Self { sigma, mode })
    }

    pub fn global(sigma: T) -> Self {
        Self { sigma, mode: ThresholdMode::Global }
    }

    pub fn energy_scaled(sigma: T) -> Self {
        Self { sigma, mode: ThresholdMode::EnergyScaled }
    }
}

/// `sgn(x) · max(|x| − λ, 0)`.
pub fn soft_threshold<T: Scalar>(x: T, lambda: T) -> Result<T> {
    if lambda.is_nan() || lambda < T::zero() {
        return Err(Error::InvalidParameter(format!("threshold {lambda} must be nonnegative")));
    }
    Ok(soft(x, lambda))
}

#[inline]
pub(crate) fn soft<T: Scalar>(x: T, lambda: T) -> T {
    let m = x.abs() - lambda;
    if m > T::zero() {
        m.copysign(x)
    } else {
        T::zero()
    }
}

/// `σ · √(2 ln N) / √N`.
pub fn compute_threshold<T: Scalar>(n: usize, sigma: T) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("threshold needs N >= 2, got {n}")));
    }
    let nf = T::from_usize_lossy(n);
    if sigma == T::zero() {
        return Ok(T::zero());
    }
    Ok(sigma * (T::lit(2.0) * nf.ln()).sqrt() / nf.sqrt())
}

/// Threshold applied to each block: zero for the low pass.
///
/// `N` in the threshold formula is the node count of the stack. A stack over
/// a single node has no meaningful threshold and is left unshrunk unless
/// `sigma` is infinite.
pub fn block_thresholds<T: Scalar>(c: &CoefficientStack<T>, cfg: &ThresholdConfig<T>) -> Vec<T> {
    let base = if cfg.sigma.is_infinite() {
        T::infinity()
    } else {
        compute_threshold(c.num_nodes(), cfg.sigma).unwrap_or(T::zero())
    };
    c.block_ids()
        .iter()
        .enumerate()
        .map(|(b, id)| {
            if id.is_low_pass() {
                return T::zero();
            }
            match cfg.mode {
                ThresholdMode::Global => base,
                ThresholdMode::EnergyScaled => {
                    let block = c.block(b);
                    let energy: T = block.iter().map(|v| *v * *v).sum();
                    let rms = (energy / T::from_usize_lossy(block.len().max(1))).sqrt();
                    if rms == T::zero() {
                        T::zero()
                    } else {
                        base * rms
                    }
                }
            }
        })
        .collect()
}

/// Soft-thresholds the high-pass blocks with the given per-block thresholds.
pub fn shrink_stack_with<T: Scalar>(c: &CoefficientStack<T>, thresholds: &[T]) -> Result<CoefficientStack<T>> {
    if thresholds.len() != c.block_ids().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} thresholds for {} blocks",
            thresholds.len(),
            c.block_ids().len()
        )));
    }
    let mut out = c.clone();
    for (b, (id, &lambda)) in c.block_ids().iter().zip(thresholds).enumerate() {
        if id.is_low_pass() {
            continue;
        }
        if lambda.is_nan() || lambda < T::zero() {
            return Err(Error::InvalidParameter(format!("threshold {lambda} must be nonnegative")));
        }
        out.block_mut(b).mapv_inplace(|x| soft(x, lambda));
    }
    Ok(out)
}

/// Shrinks every high-pass block; the low-pass block is copied unchanged.
pub fn shrink_stack<T: Scalar>(c: &CoefficientStack<T>, cfg: &ThresholdConfig<T>) -> CoefficientStack<T> {
    let thresholds = block_thresholds(c, cfg);
    shrink_stack_with(c, &thresholds).expect("thresholds match the stack layout")
}

pub fn count_nonzeros<T: Scalar>(values: impl IntoIterator<Item = T>) -> usize {
    let tol = T::lit(NONZERO_TOLERANCE);
    values.into_iter().filter(|v| v.abs() > tol).count()
}

/// Nonzero count after shrinkage over nonzero count before (1 when nothing was nonzero).
pub fn compression_ratio<T: Scalar>(
    before: &CoefficientStack<T>,
    after: &CoefficientStack<T>,
) -> Result<f64> {
    if !before.same_layout(after) {
        return Err(Error::DimensionMismatch("compression ratio of differently shaped stacks".into()));
    }
    let b = count_nonzeros(before.data().iter().copied());
    if b == 0 {
        return Ok(1.0);
    }
    Ok(count_nonzeros(after.data().iter().copied()) as f64 / b as f64)
}
