//! Spectral filter banks and their Chebyshev surrogates.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// A named real function of the spectral variable.
#[derive(Clone)]
pub struct SpectralFunction<T> {
    name: String,
    f: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Scalar> SpectralFunction<T> {
    pub fn new(name: impl Into<String>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        (self.f)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `x ↦ self(scale · x)`.
    pub fn dilated(&self, scale: T) -> Self {
        let f = Arc::clone(&self.f);
        Self::new(format!("{}({}x)", self.name, scale), move |x| f(scale * x))
    }
}

impl<T> fmt::Debug for SpectralFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralFunction").field("name", &self.name).finish()
    }
}

/// One low-pass filter and `n` high-pass filters.
#[derive(Clone, Debug)]
pub struct FilterBank<T> {
    pub low_pass: SpectralFunction<T>,
    pub high_passes: Vec<SpectralFunction<T>>,
}

impl<T: Scalar> FilterBank<T> {
    /// Number of high-pass filters.
    pub fn num_high_passes(&self) -> usize {
        self.high_passes.len()
    }

    /// `max |â(ξ)|² + Σ_r |b̂⁽ʳ⁾(ξ)|² − 1|` over the grid.
    pub fn partition_of_unity_deviation(&self, grid: &[T]) -> T {
        grid.iter()
            .map(|&x| {
                let a = self.low_pass.eval(x);
                let total = a * a + self.high_passes.iter().map(|b| b.eval(x).powi(2)).sum::<T>();
                (total - T::one()).abs()
            })
            .fold(T::zero(), T::max)
    }
}

/// Haar-type bank: `â(ξ) = cos(ξ/2)`, `b̂(ξ) = sin(ξ/2)`.
pub fn haar_filter_bank<T: Scalar>() -> FilterBank<T> {
    let half = T::lit(0.5);
    FilterBank {
        low_pass: SpectralFunction::new("haar_low", move |x: T| (x * half).cos()),
        high_passes: vec![SpectralFunction::new("haar_high", move |x: T| (x * half).sin())],
    }
}

/// Scaling functions `α̂` and `β̂⁽ʳ⁾` paired with a filter bank.
#[derive(Clone, Debug)]
pub struct ScalingFunctions<T> {
    pub low: SpectralFunction<T>,
    pub high: Vec<SpectralFunction<T>>,
}

/// Closed-form Haar scaling functions:
/// `α̂(ξ) = sin(ξ/2)/(ξ/2)` and `β̂(ξ) = sin²(ξ/4)/(ξ/4)`, continuous at 0.
pub fn haar_scaling_functions<T: Scalar>() -> ScalingFunctions<T> {
    let low = SpectralFunction::new("haar_alpha", |x: T| {
        let h = x * T::lit(0.5);
        if h == T::zero() {
            T::one()
        } else {
            h.sin() / h
        }
    });
    let high = SpectralFunction::new("haar_beta", |x: T| {
        let q = x * T::lit(0.25);
        if q == T::zero() {
            T::zero()
        } else {
            q.sin().powi(2) / q
        }
    });
    ScalingFunctions { low, high: vec![high] }
}

/// Worst-case violation of each refinement relation over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementReport<T> {
    /// `max |α̂(2ξ) − â(ξ) α̂(ξ)|`.
    pub low: T,
    /// `max |β̂⁽ʳ⁾(2ξ) − b̂⁽ʳ⁾(ξ) α̂(ξ)|`, one entry per high pass.
    pub high: Vec<T>,
}

impl<T: Scalar> RefinementReport<T> {
    pub fn max(&self) -> T {
        self.high.iter().copied().fold(self.low, T::max)
    }
}

pub fn verify_refinement<T: Scalar>(
    bank: &FilterBank<T>,
    scaling: &ScalingFunctions<T>,
    grid: &[T],
) -> Result<RefinementReport<T>> {
    if scaling.high.len() != bank.high_passes.len() {
        return Err(Error::InvalidParameter(format!(
            "{} high-pass scaling functions for {} high-pass filters",
            scaling.high.len(),
            bank.high_passes.len()
        )));
    }
    let two = T::lit(2.0);
    let dev = |lhs: &SpectralFunction<T>, filter: &SpectralFunction<T>| {
        grid.iter()
            .map(|&x| (lhs.eval(two * x) - filter.eval(x) * scaling.low.eval(x)).abs())
            .fold(T::zero(), T::max)
    };
    Ok(RefinementReport {
        low: dev(&scaling.low, &bank.low_pass),
        high: scaling.high.iter().zip(&bank.high_passes).map(|(s, b)| dev(s, b)).collect(),
    })
}

/// Evenly spaced grid with `points` nodes covering `[lo, hi]`.
pub fn linspace<T: Scalar>(lo: T, hi: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::from_usize_lossy(points - 1);
            (0..points)
                .map(|i| if i + 1 == points { hi } else { lo + step * T::from_usize_lossy(i) })
                .collect()
        }
    }
}

/// Points used to record the fit error.
const ERROR_GRID_POINTS: usize = 2001;

/// Truncated Chebyshev expansion `Σ_k c_k T_k(x̃)` on `[lo, hi]`, where
/// `x̃ = (2x − lo − hi)/(hi − lo)`.
///
/// The conventional halving of `c_0` is already applied to the stored
/// coefficient, so evaluation is a plain sum.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevApprox<T> {
    pub name: String,
    pub coefficients: Vec<T>,
    pub lo: T,
    pub hi: T,
    /// Max pointwise error against the target on a 2001-point grid, recorded at fit time.
    pub max_error: T,
}

/// Fits a degree-`degree` expansion by Chebyshev–Gauss quadrature on `degree + 1` nodes.
pub fn chebyshev_fit<T: Scalar>(
    f: &SpectralFunction<T>,
    degree: usize,
    lo: T,
    hi: T,
) -> Result<ChebyshevApprox<T>> {
    if degree < 1 {
        return Err(Error::InvalidParameter("Chebyshev degree must be at least 1".into()));
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateDomain { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let m = degree + 1;
    let pi = T::lit(std::f64::consts::PI);
    let half_width = (hi - lo) * T::lit(0.5);
    let mid = (hi + lo) * T::lit(0.5);
    // Node k sits at angle π(2k+1)/(2m); reducing j(2k+1) modulo 4m keeps the
    // cosine arguments small so the quadrature sums cancel cleanly.
    let angle = |q: usize| pi * T::from_usize_lossy(q % (4 * m)) / T::from_usize_lossy(2 * m);
    let samples: Vec<T> =
        (0..m).map(|k| f.eval(mid + half_width * angle(2 * k + 1).cos())).collect();
    // c_0 is the sample mean. For j ≥ 1 the cosine sums over the nodes vanish
    // exactly, so the mean can be removed first; constants then fit exactly.
    let mean = samples.iter().copied().sum::<T>() / T::from_usize_lossy(m);
    let scale = T::lit(2.0) / T::from_usize_lossy(m);
    let coefficients: Vec<T> = (0..m)
        .map(|j| {
            if j == 0 {
                return mean;
            }
            scale
                * samples
                    .iter()
                    .enumerate()
                    .map(|(k, &s)| (s - mean) * angle(j * (2 * k + 1)).cos())
                    .sum::<T>()
        })
        .collect();
    let mut approx =
        ChebyshevApprox { name: f.name().to_string(), coefficients, lo, hi, max_error: T::zero() };
    approx.max_error = linspace(lo, hi, ERROR_GRID_POINTS)
        .into_iter()
        .map(|x| (approx.eval(x) - f.eval(x)).abs())
        .fold(T::zero(), T::max);
    Ok(approx)
}

impl<T: Scalar> ChebyshevApprox<T> {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Affine map `x ↦ alpha·x + beta` sending `[lo, hi]` onto `[−1, 1]`.
    fn affine(&self) -> (T, T) {
        let width = self.hi - self.lo;
        (T::lit(2.0) / width, -(self.hi + self.lo) / width)
    }

    pub fn eval(&self, x: T) -> T {
        let (alpha, beta) = self.affine();
        let y = alpha * x + beta;
        let (mut t_prev, mut t_cur) = (T::one(), y);
        let mut acc = self.coefficients[0];
        for (k, &c) in self.coefficients.iter().enumerate().skip(1) {
            if k > 1 {
                let next = T::lit(2.0) * y * t_cur - t_prev;
                t_prev = t_cur;
                t_cur = next;
            }
            acc += c * t_cur;
        }
        acc
    }
}

/// Computes `Σ_k c_k T_k(M̃) X` with the three-term recurrence, where `M̃` is
/// the affine image of `M`. Only sparse-times-dense products are formed.
pub fn apply_matrix_polynomial<T: Scalar>(
    approx: &ChebyshevApprox<T>,
    m: &SparseMatrix<T>,
    x: ArrayView2<'_, T>,
) -> Result<Array2<T>> {
    if m.rows() != m.cols() || m.cols() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix polynomial: {:?} operator on {} rows",
            m.shape(),
            x.nrows()
        )));
    }
    let (alpha, beta) = approx.affine();
    let shifted = |y: &Array2<T>| -> Result<Array2<T>> {
        let mut out = m.mul_dense(y.view())?;
        out.zip_mut_with(y, |o, &v| *o = alpha * *o + beta * v);
        Ok(out)
    };
    let mut prev = x.to_owned();
    let mut acc = &prev * approx.coefficients[0];
    if approx.degree() == 0 {
        return Ok(acc);
    }
    let mut cur = shifted(&prev)?;
    acc.scaled_add(approx.coefficients[1], &cur);
    for &c in &approx.coefficients[2..] {
        let mut next = shifted(&cur)?;
        next.zip_mut_with(&prev, |n, &p| *n = T::lit(2.0) * *n - p);
        acc.scaled_add(c, &next);
        prev = cur;
        cur = next;
    }
    Ok(acc)
}

/// Materializes `Σ_k c_k T_k(M̃)` as an explicit sparse matrix.
pub fn matrix_polynomial_sparse<T: Scalar>(
    approx: &ChebyshevApprox<T>,
    m: &SparseMatrix<T>,
) -> Result<SparseMatrix<T>> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch(format!("matrix polynomial on {:?}", m.shape())));
    }
    let n = m.rows();
    let (alpha, beta) = approx.affine();
    let identity = SparseMatrix::identity(n);
    let shifted = m.add_scaled(alpha, &identity, beta)?;
    let mut prev = identity.clone();
    let mut acc = identity.scale(approx.coefficients[0]);
    if approx.degree() == 0 {
        return Ok(acc);
    }
    let mut cur = shifted.clone();
    acc = acc.add_scaled(T::one(), &cur, approx.coefficients[1])?;
    for &c in &approx.coefficients[2..] {
        let next = shifted.mul_sparse(&cur)?.add_scaled(T::lit(2.0), &prev, -T::one())?;
        acc = acc.add_scaled(T::one(), &next, c)?;
        prev = cur;
        cur = next;
    }
    Ok(acc)
}
