//! Matrix-free Chebyshev framelet transform.
//!
//! Every factor is applied to the signal through the three-term recurrence,
//! so memory stays `O(nnz(L) + (nJ+1)·N·d)` and the cost is
//! `O((n+1)·J·t·nnz(L)·d)`. All factors are polynomials in the symmetric `L`,
//! hence commute and are symmetric, which gives the reconstruction as a
//! nested (Horner-like) sum.

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::filter::{apply_matrix_polynomial, chebyshev_fit, ChebyshevApprox};
use crate::framelet::{compute_k, level_exponent, CoefficientStack, FrameletSystem, Provenance, TransformMode};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

#[derive(Clone, Debug)]
struct LevelFits<T> {
    low: ChebyshevApprox<T>,
    high: Vec<ChebyshevApprox<T>>,
}

#[derive(Clone, Debug)]
pub struct FastFrameletTransform<T> {
    laplacian: SparseMatrix<T>,
    levels: Vec<LevelFits<T>>,
    high_passes: usize,
    pub provenance: Provenance<T>,
}

impl<T: Scalar> FastFrameletTransform<T> {
    /// Fits every factor on `[0, bound]`; `bound` must dominate `λ_max(L)`.
    pub fn new(system: &FrameletSystem<T>, laplacian: &SparseMatrix<T>, bound: T) -> Result<Self> {
        if laplacian.rows() != laplacian.cols() {
            return Err(Error::DimensionMismatch(format!("Laplacian is {:?}", laplacian.shape())));
        }
        if !bound.is_finite() || bound < T::zero() {
            return Err(Error::InvalidParameter(format!("spectral bound {bound}")));
        }
        if system.levels == 0 || !(system.dilation > T::one()) {
            return Err(Error::InvalidParameter("need dilation > 1 and at least one level".into()));
        }
        let max_diag = laplacian.diagonal().into_iter().fold(T::zero(), T::max);
        if bound < max_diag {
            return Err(Error::BoundViolated { bound: bound.as_f64(), diagonal: max_diag.as_f64() });
        }
        let k = if bound > T::zero() { compute_k(bound, system.dilation)? } else { 0 };
        let hi = if bound > T::zero() { bound } else { T::one() };
        let t = system.chebyshev_degree;
        let levels = (1..=system.levels)
            .map(|j| {
                let scale = system.dilation.powi(level_exponent(j, k));
                let low = chebyshev_fit(&system.bank.low_pass.dilated(scale), t, T::zero(), hi)?;
                let high = system
                    .bank
                    .high_passes
                    .iter()
                    .map(|g| chebyshev_fit(&g.dilated(scale), t, T::zero(), hi))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LevelFits { low, high })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            laplacian: laplacian.clone(),
            levels,
            high_passes: system.bank.num_high_passes(),
            provenance: Provenance {
                mode: TransformMode::Chebyshev,
                chebyshev_degree: t,
                k,
                dilation: system.dilation,
                levels: system.levels,
                lambda_bound: bound,
            },
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.laplacian.rows()
    }

    pub fn num_blocks(&self) -> usize {
        self.high_passes * self.levels.len() + 1
    }

    pub fn decompose(&self, x: ArrayView2<'_, T>) -> Result<CoefficientStack<T>> {
        let n = self.num_nodes();
        if x.nrows() != n {
            return Err(Error::DimensionMismatch(format!("signal has {} rows for {n} nodes", x.nrows())));
        }
        let ids = crate::framelet::block_ids(self.high_passes, self.levels.len());
        let jn = self.levels.len();
        let mut data = Array2::zeros((self.num_blocks() * n, x.ncols()));
        let mut chain = x.to_owned();
        for (j, fits) in self.levels.iter().enumerate() {
            for (r, fit) in fits.high.iter().enumerate() {
                let b = 1 + r * jn + j;
                let block = apply_matrix_polynomial(fit, &self.laplacian, chain.view())?;
                data.slice_mut(s![b * n..(b + 1) * n, ..]).assign(&block);
            }
            chain = apply_matrix_polynomial(&fits.low, &self.laplacian, chain.view())?;
        }
        data.slice_mut(s![0..n, ..]).assign(&chain);
        CoefficientStack::new(n, ids, data)
    }

    pub fn reconstruct(&self, c: &CoefficientStack<T>) -> Result<Array2<T>> {
        let n = self.num_nodes();
        let jn = self.levels.len();
        if c.num_nodes() != n || c.block_ids().len() != self.num_blocks() {
            return Err(Error::DimensionMismatch("coefficient stack does not match the transform".into()));
        }
        let mut acc = c.block(0).to_owned();
        for (j, fits) in self.levels.iter().enumerate().rev() {
            acc = apply_matrix_polynomial(&fits.low, &self.laplacian, acc.view())?;
            for (r, fit) in fits.high.iter().enumerate() {
                let b = 1 + r * jn + j;
                acc += &apply_matrix_polynomial(fit, &self.laplacian, c.block(b))?;
            }
        }
        Ok(acc)
    }
}
