//! Dense classification head and softmax cross-entropy.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::init::xavier_uniform;
use crate::scalar::Scalar;

/// Mean softmax cross-entropy over the rows listed in `rows`.
///
/// Returns the loss and its gradient with respect to all logits (zero on
/// rows outside the selection).
pub fn softmax_cross_entropy<T: Scalar>(
    logits: ArrayView2<'_, T>,
    labels: &[usize],
    rows: &[usize],
) -> Result<(T, Array2<T>)> {
    let (n, classes) = logits.dim();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!("{} labels for {n} rows", labels.len())));
    }
    if rows.is_empty() {
        return Err(Error::InvalidParameter("loss over an empty row set".into()));
    }
    let mut grad = Array2::zeros((n, classes));
    let mut loss = T::zero();
    let scale = T::one() / T::from_usize_lossy(rows.len());
    for &i in rows {
        if i >= n || labels[i] >= classes {
            return Err(Error::InvalidParameter(format!("row {i} or its label is out of range")));
        }
        let row = logits.row(i);
        let m = row.fold(T::neg_infinity(), |a, &b| a.max(b));
        let exp = row.mapv(|v| (v - m).exp());
        let z: T = exp.sum();
        loss += z.ln() + m - row[labels[i]];
        let mut g = grad.row_mut(i);
        Zip::from(&mut g).and(&exp).for_each(|g, &e| *g = e / z * scale);
        g[labels[i]] -= scale;
    }
    Ok((loss * scale, grad))
}

pub fn softmax<T: Scalar>(logits: ArrayView2<'_, T>) -> Array2<T> {
    let mut out = logits.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let m = row.fold(T::neg_infinity(), |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let z: T = row.sum();
        row /= z;
    }
    out
}

pub fn argmax_rows<T: Scalar>(m: ArrayView2<'_, T>) -> Vec<usize> {
    m.axis_iter(Axis(0))
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Two-layer perceptron: `ReLU(X W1 + b1) W2 + b2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    pub w2: Array2<T>,
    pub b2: Array1<T>,
}

#[derive(Clone, Debug)]
pub struct MlpCache<T> {
    input: Array2<T>,
    pre: Array2<T>,
    hidden: Array2<T>,
}

impl<T: Scalar> MlpCache<T> {
    pub fn kink_distance(&self) -> T {
        self.pre.iter().fold(T::infinity(), |m, v| m.min(v.abs()))
    }
}

#[derive(Clone, Debug)]
pub struct MlpGrads<T> {
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    pub w2: Array2<T>,
    pub b2: Array1<T>,
    pub input: Array2<T>,
}

impl<T: Scalar> Mlp<T> {
    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Self {
        Self {
            w1: xavier_uniform(input, hidden, rng),
            b1: Array1::zeros(hidden),
            w2: xavier_uniform(hidden, output, rng),
            b2: Array1::zeros(output),
        }
    }

    pub fn forward(&self, x: ArrayView2<'_, T>) -> Result<(Array2<T>, MlpCache<T>)> {
        if x.ncols() != self.w1.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "MLP input width {} but weight expects {}",
                x.ncols(),
                self.w1.nrows()
            )));
        }
        let mut pre = x.dot(&self.w1);
        pre += &self.b1;
        let hidden = pre.mapv(|v| v.max(T::zero()));
        let mut logits = hidden.dot(&self.w2);
        logits += &self.b2;
        Ok((logits, MlpCache { input: x.to_owned(), pre, hidden }))
    }

    pub fn backward(&self, cache: &MlpCache<T>, grad: ArrayView2<'_, T>) -> MlpGrads<T> {
        let w2 = cache.hidden.t().dot(&grad);
        let b2 = grad.sum_axis(Axis(0));
        let mut dh = grad.dot(&self.w2.t());
        Zip::from(&mut dh).and(&cache.pre).for_each(|g, &z| {
            if z <= T::zero() {
                *g = T::zero();
            }
        });
        let w1 = cache.input.t().dot(&dh);
        let b1 = dh.sum_axis(Axis(0));
        let input = dh.dot(&self.w1.t());
        MlpGrads { w1, b1, w2, b2, input }
    }
}
