//! Spectral graph convolution baseline: `Y = ReLU(Â X W + b)` with
//! `Â = D̃^{-1/2}(A + I)D̃^{-1/2}`.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph};
use crate::nn::init::xavier_uniform;
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// `D̃^{-1/2}(A + I)D̃^{-1/2}` for a graph (existing self-loops are kept).
pub fn gcn_propagation<T: Scalar>(g: &Graph<T>) -> Result<SparseMatrix<T>> {
    let looped = build_graph(g.edges(), g.num_nodes(), true)?;
    Ok(looped.normalized_adjacency())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcnParams<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> GcnParams<T> {
    pub fn init<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Self { weight: xavier_uniform(in_dim, out_dim, rng), bias: Array1::zeros(out_dim) }
    }
}

#[derive(Clone, Debug)]
pub struct GcnCache<T> {
    /// `Â X`.
    propagated: Array2<T>,
    pre_activation: Option<Array2<T>>,
}

impl<T: Scalar> GcnCache<T> {
    pub fn kink_distance(&self) -> T {
        self.pre_activation
            .as_ref()
            .map(|z| z.iter().fold(T::infinity(), |m, v| m.min(v.abs())))
            .unwrap_or(T::infinity())
    }
}

#[derive(Clone, Debug)]
pub struct GcnGrads<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
    pub input: Array2<T>,
}

pub fn gcn_forward<T: Scalar>(
    params: &GcnParams<T>,
    a_hat: &SparseMatrix<T>,
    x: ArrayView2<'_, T>,
    relu: bool,
) -> Result<(Array2<T>, GcnCache<T>)> {
    if x.nrows() != a_hat.cols() || x.ncols() != params.weight.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "input is {:?}, propagation is {:?}, weight is {:?}",
            x.dim(),
            a_hat.shape(),
            params.weight.dim()
        )));
    }
    let propagated = a_hat.mul_dense(x)?;
    let mut out = propagated.dot(&params.weight);
    out += &params.bias;
    let pre_activation = relu.then(|| {
        let z = out.clone();
        out.mapv_inplace(|v| v.max(T::zero()));
        z
    });
    Ok((out, GcnCache { propagated, pre_activation }))
}

pub fn gcn_backward<T: Scalar>(
    params: &GcnParams<T>,
    a_hat: &SparseMatrix<T>,
    cache: &GcnCache<T>,
    grad_out: ArrayView2<'_, T>,
) -> Result<GcnGrads<T>> {
    let mut g = grad_out.to_owned();
    if let Some(z) = &cache.pre_activation {
        Zip::from(&mut g).and(z).for_each(|g, &z| {
            if z <= T::zero() {
                *g = T::zero();
            }
        });
    }
    let bias = g.sum_axis(Axis(0));
    let weight = cache.propagated.t().dot(&g);
    let input = a_hat.tmul_dense(g.dot(&params.weight.t()).view())?;
    Ok(GcnGrads { weight, bias, input })
}
