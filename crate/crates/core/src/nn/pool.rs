//! Graph-level readouts.
//!
//! Framelet pooling decomposes node features and summarizes each block per
//! feature: `sum` adds the coefficients, `spectrum` adds their squares. The output concatenates blocks in operator order, so entry
//! `b·d + i` belongs to block `b`, feature `i`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framelet::{decompose, CoefficientStack, DecompositionOperator};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolMode {
    #[default]
    Sum,
    Spectrum,
}

#[derive(Clone, Debug)]
pub struct PoolCache<T> {
    coeffs: CoefficientStack<T>,
    pooled: Array1<T>,
}

pub fn ufg_pool<T: Scalar>(
    op: &DecompositionOperator<T>,
    x: ArrayView2<'_, T>,
    mode: PoolMode,
) -> Result<(Array1<T>, PoolCache<T>)> {
    let coeffs = decompose(op, x)?;
    let d = x.ncols();
    let mut pooled = Array1::zeros(coeffs.block_ids().len() * d);
    for b in 0..coeffs.block_ids().len() {
        let block = coeffs.block(b);
        let summary = match mode {
            PoolMode::Sum => block.sum_axis(Axis(0)),
            PoolMode::Spectrum => block.map_axis(Axis(0), |c| c.dot(&c)),
        };
        pooled.slice_mut(ndarray::s![b * d..(b + 1) * d]).assign(&summary);
    }
    Ok((pooled.clone(), PoolCache { coeffs, pooled }))
}

/// Gradient of the pooled vector with respect to node features.
pub fn ufg_pool_backward<T: Scalar>(
    op: &DecompositionOperator<T>,
    cache: &PoolCache<T>,
    grad: ArrayView1<'_, T>,
    mode: PoolMode,
) -> Result<Array2<T>> {
    let d = cache.coeffs.num_features();
    if grad.len() != cache.pooled.len() {
        return Err(Error::DimensionMismatch(format!(
            "pooling gradient has {} entries, expected {}",
            grad.len(),
            cache.pooled.len()
        )));
    }
    let mut dc = cache.coeffs.clone();
    for b in 0..dc.block_ids().len() {
        let g = grad.slice(ndarray::s![b * d..(b + 1) * d]);
        let mut block = dc.block_mut(b);
        for mut row in block.axis_iter_mut(Axis(0)) {
            for i in 0..d {
                row[i] = match mode {
                    PoolMode::Sum => g[i],
                    PoolMode::Spectrum => T::lit(2.0) * g[i] * row[i],
                };
            }
        }
    }
    op.reconstruct_raw(dc.data().view())
}

/// Column means of the node features.
pub fn mean_pool<T: Scalar>(x: ArrayView2<'_, T>) -> Array1<T> {
    x.sum_axis(Axis(0)) / T::from_usize_lossy(x.nrows().max(1))
}

pub fn mean_pool_backward<T: Scalar>(num_nodes: usize, grad: ArrayView1<'_, T>) -> Array2<T> {
    let scale = T::one() / T::from_usize_lossy(num_nodes.max(1));
    let row = grad.mapv(|g| g * scale);
    let mut out = Array2::zeros((num_nodes, grad.len()));
    for mut r in out.axis_iter_mut(Axis(0)) {
        r.assign(&row);
    }
    out
}
