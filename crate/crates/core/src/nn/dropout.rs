//! Inverted dropout.

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Zeroes each entry with probability `p` and rescales survivors by `1/(1−p)`.
/// Outside training the input passes through with an all-ones mask.
///
/// Returns the output and the multiplicative mask, which is also the
/// backward map.
pub fn dropout<T: Scalar, R: Rng + ?Sized>(
    x: ArrayView2<'_, T>,
    p: f64,
    training: bool,
    rng: &mut R,
) -> Result<(Array2<T>, Array2<T>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("dropout rate {p} outside [0, 1)")));
    }
    if !training || p == 0.0 {
        return Ok((x.to_owned(), Array2::from_elem(x.dim(), T::one())));
    }
    let keep = T::lit(1.0 / (1.0 - p));
    let mask = Array2::from_shape_simple_fn(x.dim(), || {
        if rng.random::<f64>() < p {
            T::zero()
        } else {
            keep
        }
    });
    Ok((&x * &mask, mask))
}
