//! Framelet graph convolution.
//!
//! Forward pass for input `X` (`N × d`):
//!
//! ```text
//! X' = X W
//! C  = W♮ X'                  (framelet coefficients)
//! F  = diag(θ) C              (network filter, shared across features)
//! ReLU:       Y = ReLU(W♮ᵀ F + 1 bᵀ)
//! Shrinkage:  Y = W♮ᵀ Shrink(F) + 1 bᵀ
//! ```

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};
use crate::framelet::{decompose, reconstruct, CoefficientStack, DecompositionOperator};
use crate::nn::init::{uniform, xavier_uniform};
use crate::scalar::Scalar;
use crate::shrinkage::{block_thresholds, compression_ratio, shrink_stack_with, ThresholdConfig};

/// Trainable parameters of one framelet convolution.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvParams<T> {
    /// `d × d'` feature transform.
    pub weight: Array2<T>,
    /// Network filter, one entry per stacked coefficient row.
    pub theta: Array1<T>,
    pub bias: Array1<T>,
}

/// Zero bias, Xavier-uniform weight, `θ ~ U(0.9, 1.1)`.
pub fn init_params<T: Scalar, R: Rng + ?Sized>(
    in_dim: usize,
    out_dim: usize,
    theta_len: usize,
    rng: &mut R,
) -> ConvParams<T> {
    ConvParams {
        weight: xavier_uniform(in_dim, out_dim, rng),
        theta: Array1::from_iter((0..theta_len).map(|_| uniform(rng, 0.9, 1.1))),
        bias: Array1::zeros(out_dim),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Activation<T> {
    /// Plain linear layer: `Y = W♮ᵀ F + b`.
    None,
    Relu,
    Shrinkage(ThresholdConfig<T>),
    /// Shrinkage with precomputed per-block thresholds (low pass ignored).
    ShrinkageFixed(Vec<T>),
}

/// Forward intermediates needed by the backward pass.
#[derive(Clone, Debug)]
pub struct ConvCache<T> {
    input: Array2<T>,
    coeffs: CoefficientStack<T>,
    filtered: CoefficientStack<T>,
    /// Per-block thresholds when shrinkage ran.
    thresholds: Option<Vec<T>>,
    shrunk: Option<CoefficientStack<T>>,
    /// `W♮ᵀ F + b` before ReLU.
    pre_activation: Option<Array2<T>>,
}

impl<T: Scalar> ConvCache<T> {
    pub fn coefficients(&self) -> &CoefficientStack<T> {
        &self.coeffs
    }

    /// `diag(θ) W♮ X'`, before any shrinkage.
    pub fn filtered(&self) -> &CoefficientStack<T> {
        &self.filtered
    }

    pub fn thresholds(&self) -> Option<&[T]> {
        self.thresholds.as_deref()
    }

    pub fn shrunk(&self) -> Option<&CoefficientStack<T>> {
        self.shrunk.as_ref()
    }

    /// Nonzero coefficients after shrinkage over those before, for shrinkage layers.
    pub fn compression_ratio(&self) -> Option<f64> {
        self.shrunk.as_ref().map(|s| compression_ratio(&self.filtered, s).expect("same layout"))
    }

    /// Distance from the nearest activation kink (infinite when there is none).
    pub fn kink_distance(&self) -> T {
        if let Some(z) = &self.pre_activation {
            return z.iter().fold(T::infinity(), |m, v| m.min(v.abs()));
        }
        match &self.thresholds {
            Some(th) => {
                let mut best = T::infinity();
                for (b, &lambda) in th.iter().enumerate() {
                    if self.filtered.block_ids()[b].is_low_pass() || lambda == T::zero() {
                        continue;
                    }
                    for &v in self.filtered.block(b) {
                        best = best.min((v.abs() - lambda).abs());
                    }
                }
                best
            }
            None => T::infinity(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvGrads<T> {
    pub weight: Array2<T>,
    pub theta: Array1<T>,
    pub bias: Array1<T>,
    pub input: Array2<T>,
}

fn check_shapes<T: Scalar>(
    params: &ConvParams<T>,
    op: &DecompositionOperator<T>,
    x: ArrayView2<'_, T>,
) -> Result<()> {
    if params.theta.len() != op.stacked_rows() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} entries, operator stacks {} rows",
            params.theta.len(),
            op.stacked_rows()
        )));
    }
    if x.ncols() != params.weight.nrows() || x.nrows() != op.num_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "input is {}x{}, layer expects {}x{}",
            x.nrows(),
            x.ncols(),
            op.num_nodes(),
            params.weight.nrows()
        )));
    }
    if params.bias.len() != params.weight.ncols() {
        return Err(Error::DimensionMismatch("bias length differs from output width".into()));
    }
    Ok(())
}

fn scale_rows<T: Scalar>(m: &mut Array2<T>, theta: &Array1<T>) {
    for (mut row, &t) in m.axis_iter_mut(Axis(0)).zip(theta) {
        row *= t;
    }
}

pub fn ufg_conv_forward<T: Scalar>(
    params: &ConvParams<T>,
    op: &DecompositionOperator<T>,
    x: ArrayView2<'_, T>,
    act: &Activation<T>,
) -> Result<(Array2<T>, ConvCache<T>)> {
    check_shapes(params, op, x)?;
    let transformed = x.dot(&params.weight);
    let coeffs = decompose(op, transformed.view())?;
    let mut filtered = coeffs.clone();
    scale_rows(filtered.data_mut(), &params.theta);

    let (thresholds, shrunk) = match act {
        Activation::Shrinkage(cfg) => {
            let th = block_thresholds(&filtered, cfg);
            let s = shrink_stack_with(&filtered, &th)?;
            (Some(th), Some(s))
        }
        Activation::ShrinkageFixed(th) => {
            let s = shrink_stack_with(&filtered, th)?;
            (Some(th.clone()), Some(s))
        }
        _ => (None, None),
    };
    let mut out = reconstruct(op, shrunk.as_ref().unwrap_or(&filtered))?;
    out += &params.bias;
    let pre_activation = if matches!(act, Activation::Relu) {
        let z = out.clone();
        out.mapv_inplace(|v| v.max(T::zero()));
        Some(z)
    } else {
        None
    };
    let cache = ConvCache { input: x.to_owned(), coeffs, filtered, thresholds, shrunk, pre_activation };
    Ok((out, cache))
}

/// Exact gradients of a downstream scalar loss given `∂loss/∂Y`.
///
/// Shrinkage thresholds are treated as constants. The ReLU subgradient at 0 is 0.
pub fn ufg_conv_backward<T: Scalar>(
    params: &ConvParams<T>,
    op: &DecompositionOperator<T>,
    cache: &ConvCache<T>,
    grad_out: ArrayView2<'_, T>,
) -> Result<ConvGrads<T>> {
    let n = op.num_nodes();
    if grad_out.dim() != (n, params.weight.ncols()) {
        return Err(Error::DimensionMismatch(format!(
            "output gradient is {:?}, expected ({n}, {})",
            grad_out.dim(),
            params.weight.ncols()
        )));
    }
    let grad_z = match &cache.pre_activation {
        Some(z) => {
            let mut g = grad_out.to_owned();
            Zip::from(&mut g).and(z).for_each(|g, &z| {
                if z <= T::zero() {
                    *g = T::zero();
                }
            });
            g
        }
        None => grad_out.to_owned(),
    };
    let bias = grad_z.sum_axis(Axis(0));
    // ∂/∂(coefficients fed to reconstruction) = W♮ dZ.
    let mut grad_f = decompose(op, grad_z.view())?;
    if let Some(th) = &cache.thresholds {
        for (b, &lambda) in th.iter().enumerate() {
            if cache.filtered.block_ids()[b].is_low_pass() || lambda == T::zero() {
                continue;
            }
            let range = cache.filtered.row_range(b);
            let f = cache.filtered.data().slice(ndarray::s![range, ..]);
            Zip::from(grad_f.block_mut(b)).and(f).for_each(|g, &v| {
                if v.abs() <= lambda {
                    *g = T::zero();
                }
            });
        }
    }
    let theta = (grad_f.data() * cache.coeffs.data()).sum_axis(Axis(1));
    let mut grad_c = grad_f.into_data();
    scale_rows(&mut grad_c, &params.theta);
    let grad_transformed = op.reconstruct_raw(grad_c.view())?;
    let weight = cache.input.t().dot(&grad_transformed);
    let input = grad_transformed.dot(&params.weight.t());
    Ok(ConvGrads { weight, theta, bias, input })
}

