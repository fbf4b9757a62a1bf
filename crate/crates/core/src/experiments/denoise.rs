//! Framelet shrinkage denoising.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framelet::{decompose, reconstruct, DecompositionOperator};
use crate::shrinkage::{compression_ratio, shrink_stack, ThresholdConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    #[serde(skip)]
    pub denoised: Array2<f64>,
    pub sigma: f64,
    pub compression_ratio: f64,
    pub mse_noisy: Option<f64>,
    pub mse_denoised: Option<f64>,
}

pub fn mse(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    (&a - &b).mapv(|v| v * v).mean().unwrap_or(0.0)
}

/// Decompose, soft-threshold the high passes (global mode), reconstruct.
pub fn denoise_signal(
    op: &DecompositionOperator<f64>,
    noisy: ArrayView2<'_, f64>,
    sigma: f64,
    truth: Option<ArrayView2<'_, f64>>,
) -> Result<DenoiseReport> {
    if let Some(t) = truth {
        if t.dim() != noisy.dim() {
            return Err(Error::DimensionMismatch("ground truth differs in shape from the signal".into()));
        }
    }
    let cfg = ThresholdConfig::new(sigma, Default::default())?;
    let coeffs = decompose(op, noisy)?;
    let shrunk = shrink_stack(&coeffs, &cfg);
    let denoised = reconstruct(op, &shrunk)?;
    Ok(DenoiseReport {
        sigma,
        compression_ratio: compression_ratio(&coeffs, &shrunk)?,
        mse_noisy: truth.map(|t| mse(noisy, t)),
        mse_denoised: truth.map(|t| mse(denoised.view(), t)),
        denoised,
    })
}
