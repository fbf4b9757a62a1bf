//! Parameter initialization.

use ndarray::Array2;
use rand::Rng;

use crate::scalar::Scalar;

pub fn uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> T {
    T::lit(rng.random_range(lo..hi))
}

/// Glorot/Xavier uniform: `U(−a, a)` with `a = √(6 / (fan_in + fan_out))`.
pub fn xavier_uniform<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<T> {
    let a = (6.0 / (rows + cols).max(1) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || uniform(rng, -a, a))
}
