//! Undecimated framelet decomposition and reconstruction operators.
//!
//! For dilation `d`, scale level `J` and the normalizing constant `K`, the
//! operators are
//!
//! ```text
//! W_{r,1} = g_r(d^{-K} L)
//! W_{r,j} = g_r(d^{j-1-K} L) · â(d^{j-2-K} L) ⋯ â(d^{-K} L),   j ≥ 2
//! ```
//!
//! with `g_0 = â` (only the level-`J` low-pass block is kept) and
//! `g_r = b̂⁽ʳ⁾` for the high passes. The exact path evaluates the filters on
//! the Laplacian eigenvalues; the Chebyshev path replaces every factor by a
//! fitted polynomial in `L` and materializes the products as sparse matrices.
//!
//! Blocks are ordered low pass `(0, J)` first, then `(r, j)` by `r` then `j`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, ArrayViewMut2};

use crate::error::{Error, Result};
use crate::filter::{chebyshev_fit, haar_filter_bank, matrix_polynomial_sparse, FilterBank};
use crate::graph::{eigendecompose, normalized_laplacian, normalized_spectral_bound, Graph, Spectrum};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    #[default]
    Exact,
    Chebyshev,
}

/// Framelet system parameters; `K` is derived when operators are built.
#[derive(Clone, Debug)]
pub struct FrameletSystem<T> {
    pub dilation: T,
    pub levels: usize,
    pub bank: FilterBank<T>,
    pub chebyshev_degree: usize,
    pub mode: TransformMode,
    /// Upper limit on stored operator entries for the Chebyshev path.
    pub nnz_budget: Option<usize>,
}

pub const DEFAULT_CHEBYSHEV_DEGREE: usize = 16;

impl<T: Scalar> FrameletSystem<T> {
    /// Haar-type system with the given dilation and scale level.
    pub fn haar(dilation: T, levels: usize, mode: TransformMode) -> Self {
        Self {
            dilation,
            levels,
            bank: haar_filter_bank(),
            chebyshev_degree: DEFAULT_CHEBYSHEV_DEGREE,
            mode,
            nnz_budget: None,
        }
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.chebyshev_degree = degree;
        self
    }

    pub fn num_blocks(&self) -> usize {
        self.bank.num_high_passes() * self.levels + 1
    }

    /// Block identifiers in operator order.
    pub fn block_ids(&self) -> Vec<BlockId> {
        block_ids(self.bank.num_high_passes(), self.levels)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dilation > T::one()) || !self.dilation.is_finite() {
            return Err(Error::InvalidParameter(format!("dilation {} must exceed 1", self.dilation)));
        }
        if self.levels == 0 {
            return Err(Error::InvalidParameter("scale level must be at least 1".into()));
        }
        if self.bank.num_high_passes() == 0 {
            return Err(Error::InvalidParameter("filter bank has no high pass".into()));
        }
        Ok(())
    }
}

/// Pass index `r` (0 = low pass) and scale level `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId {
    pub r: usize,
    pub j: usize,
}

impl BlockId {
    pub fn is_low_pass(&self) -> bool {
        self.r == 0
    }
}

pub fn block_ids(high_passes: usize, levels: usize) -> Vec<BlockId> {
    std::iter::once(BlockId { r: 0, j: levels })
        .chain((1..=high_passes).flat_map(|r| (1..=levels).map(move |j| BlockId { r, j })))
        .collect()
}

/// Smallest integer `K` with `lambda_max ≤ d^K · π`.
pub fn compute_k<T: Scalar>(lambda_max: T, dilation: T) -> Result<i32> {
    if !(lambda_max > T::zero()) || !lambda_max.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda_max {lambda_max} must be positive")));
    }
    if !(dilation > T::one()) {
        return Err(Error::InvalidParameter(format!("dilation {dilation} must exceed 1")));
    }
    let pi = T::lit(std::f64::consts::PI);
    let mut k = ((lambda_max / pi).ln() / dilation.ln()).ceil().to_i32().unwrap_or(0);
    // Settle rounding at the boundary explicitly.
    while dilation.powi(k) * pi < lambda_max {
        k += 1;
    }
    while dilation.powi(k - 1) * pi >= lambda_max {
        k -= 1;
    }
    Ok(k)
}

/// How the operator was built.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Provenance<T> {
    pub mode: TransformMode,
    pub chebyshev_degree: usize,
    pub k: i32,
    pub dilation: T,
    pub levels: usize,
    /// Spectral bound used for `K` (and as the Chebyshev domain).
    pub lambda_bound: T,
}

/// The `nJ + 1` square transform matrices `W_{r,j}`.
#[derive(Clone, Debug)]
pub struct DecompositionOperator<T> {
    num_nodes: usize,
    high_passes: usize,
    ids: Vec<BlockId>,
    blocks: Vec<SparseMatrix<T>>,
    /// Dense copy of `W♮`, kept when the blocks are mostly filled.
    dense: Option<Array2<T>>,
    pub provenance: Provenance<T>,
}

/// Fill fraction above which products go through a dense copy of `W♮`.
const DENSE_FILL: f64 = 0.25;

/// Spectral information available when building operators.
#[derive(Clone, Copy, Debug)]
pub enum SpectralInfo<'a, T> {
    Spectrum(&'a Spectrum<T>),
    /// Upper bound on the largest Laplacian eigenvalue.
    Bound(T),
}

impl<'a, T: Scalar> SpectralInfo<'a, T> {
    fn bound(&self) -> T {
        match self {
            SpectralInfo::Spectrum(s) => s.lambda_max(),
            SpectralInfo::Bound(b) => *b,
        }
    }
}

/// Builds `W_{r,j}` for every block of the system.
pub fn build_operators<T: Scalar>(
    system: &FrameletSystem<T>,
    laplacian: &SparseMatrix<T>,
    info: SpectralInfo<'_, T>,
) -> Result<DecompositionOperator<T>> {
    system.validate()?;
    let n = laplacian.rows();
    if laplacian.cols() != n {
        return Err(Error::DimensionMismatch(format!("Laplacian is {:?}", laplacian.shape())));
    }
    let bound = info.bound();
    if !bound.is_finite() {
        return Err(Error::InvalidParameter("non-finite spectral bound".into()));
    }
    let k = if bound > T::zero() { compute_k(bound, system.dilation)? } else { 0 };
    let provenance = Provenance {
        mode: system.mode,
        chebyshev_degree: system.chebyshev_degree,
        k,
        dilation: system.dilation,
        levels: system.levels,
        lambda_bound: bound,
    };
    let blocks = match system.mode {
        TransformMode::Exact => {
            let SpectralInfo::Spectrum(spectrum) = info else {
                return Err(Error::MissingSpectrum);
            };
            if spectrum.eigenvalues.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "spectrum of size {} for {n} nodes",
                    spectrum.eigenvalues.len()
                )));
            }
            exact_blocks(system, spectrum, k)?
        }
        TransformMode::Chebyshev => {
            let max_diag = laplacian.diagonal().into_iter().fold(T::zero(), T::max);
            if bound < max_diag {
                return Err(Error::BoundViolated {
                    bound: bound.as_f64(),
                    diagonal: max_diag.as_f64(),
                });
            }
            chebyshev_blocks(system, laplacian, bound, k)?
        }
    };
    let nnz: usize = blocks.iter().map(SparseMatrix::nnz).sum();
    let dense = (nnz as f64 >= DENSE_FILL * (blocks.len() * n * n) as f64).then(|| {
        let mut d = Array2::zeros((blocks.len() * n, n));
        for (b, block) in blocks.iter().enumerate() {
            for (i, j, v) in block.iter() {
                d[[b * n + i, j]] = v;
            }
        }
        d
    });
    Ok(DecompositionOperator {
        num_nodes: n,
        high_passes: system.bank.num_high_passes(),
        ids: system.block_ids(),
        blocks,
        dense,
        provenance,
    })
}

/// Normalized Laplacian plus operators in one step.
///
/// Exact mode eigendecomposes the Laplacian; Chebyshev mode bounds `λ_max`
/// with [`normalized_spectral_bound`](crate::graph::normalized_spectral_bound).
pub fn operators_for_graph<T: Scalar>(
    system: &FrameletSystem<T>,
    graph: &Graph<T>,
) -> Result<DecompositionOperator<T>> {
    let l = normalized_laplacian(graph);
    match system.mode {
        TransformMode::Exact => {
            let spectrum = eigendecompose(&l)?;
            build_operators(system, &l, SpectralInfo::Spectrum(&spectrum))
        }
        TransformMode::Chebyshev => {
            let bound = normalized_spectral_bound(&l)?;
            build_operators(system, &l, SpectralInfo::Bound(bound))
        }
    }
}

/// Exponent of the dilation applied to `L` inside the level-`j` factor.
pub(crate) fn level_exponent(j: usize, k: i32) -> i32 {
    j as i32 - 1 - k
}

/// Per-eigenvalue responses of every block, in block order.
pub fn block_responses<T: Scalar>(
    system: &FrameletSystem<T>,
    eigenvalues: &[T],
    k: i32,
) -> Vec<Vec<T>> {
    let bank = &system.bank;
    let mut chain = vec![T::one(); eigenvalues.len()];
    let mut high: Vec<Vec<Vec<T>>> = vec![Vec::with_capacity(system.levels); bank.num_high_passes()];
    for j in 1..=system.levels {
        let scale = system.dilation.powi(level_exponent(j, k));
        for (r, filter) in bank.high_passes.iter().enumerate() {
            high[r].push(
                eigenvalues.iter().zip(&chain).map(|(&l, &c)| filter.eval(scale * l) * c).collect(),
            );
        }
        for (c, &l) in chain.iter_mut().zip(eigenvalues) {
            *c *= bank.low_pass.eval(scale * l);
        }
    }
    std::iter::once(chain).chain(high.into_iter().flatten()).collect()
}

fn exact_blocks<T: Scalar>(
    system: &FrameletSystem<T>,
    spectrum: &Spectrum<T>,
    k: i32,
) -> Result<Vec<SparseMatrix<T>>> {
    let eigenvalues = spectrum.eigenvalues.to_vec();
    block_responses(system, &eigenvalues, k)
        .iter()
        .map(|resp| SparseMatrix::from_dense(spectrum.spectral_matrix(resp).view()))
        .collect()
}

fn chebyshev_blocks<T: Scalar>(
    system: &FrameletSystem<T>,
    laplacian: &SparseMatrix<T>,
    bound: T,
    k: i32,
) -> Result<Vec<SparseMatrix<T>>> {
    let n = laplacian.rows();
    let bank = &system.bank;
    let hi = if bound > T::zero() { bound } else { T::one() };
    let check = |m: &SparseMatrix<T>, used: usize| -> Result<()> {
        if let Some(budget) = system.nnz_budget {
            if used + m.nnz() > budget {
                return Err(Error::OperatorTooLarge { nnz: used + m.nnz(), budget });
            }
        }
        Ok(())
    };
    let mut used = 0usize;
    // Λ_0 = I is represented by `None` to skip a trivial product.
    let mut chain: Option<SparseMatrix<T>> = None;
    let mut high: Vec<Vec<SparseMatrix<T>>> = vec![Vec::new(); bank.num_high_passes()];
    for j in 1..=system.levels {
        let scale = system.dilation.powi(level_exponent(j, k));
        let apply = |g: &crate::filter::SpectralFunction<T>,
                     chain: &Option<SparseMatrix<T>>|
         -> Result<SparseMatrix<T>> {
            let fit = chebyshev_fit(&g.dilated(scale), system.chebyshev_degree, T::zero(), hi)?;
            let poly = matrix_polynomial_sparse(&fit, laplacian)?;
            match chain {
                None => Ok(poly),
                Some(c) => poly.mul_sparse(c),
            }
        };
        for (r, filter) in bank.high_passes.iter().enumerate() {
            let block = apply(filter, &chain)?;
            check(&block, used)?;
            used += block.nnz();
            high[r].push(block);
        }
        chain = Some(apply(&bank.low_pass, &chain)?);
    }
    let low = chain.unwrap_or_else(|| SparseMatrix::identity(n));
    check(&low, used)?;
    Ok(std::iter::once(low).chain(high.into_iter().flatten()).collect())
}

impl<T: Scalar> DecompositionOperator<T> {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_high_passes(&self) -> usize {
        self.high_passes
    }

    pub fn levels(&self) -> usize {
        self.provenance.levels
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_ids(&self) -> &[BlockId] {
        &self.ids
    }

    pub fn blocks(&self) -> impl Iterator<Item = (BlockId, &SparseMatrix<T>)> {
        self.ids.iter().copied().zip(self.blocks.iter())
    }

    pub fn block(&self, id: BlockId) -> Option<&SparseMatrix<T>> {
        self.ids.iter().position(|&b| b == id).map(|k| &self.blocks[k])
    }

    /// Rows in the stacked representation: `(nJ + 1) · N`.
    pub fn stacked_rows(&self) -> usize {
        self.blocks.len() * self.num_nodes
    }

    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(SparseMatrix::nnz).sum()
    }

    /// `W♮ = [W_{0,J}; W_{1,1}; …; W_{n,J}]`, of size `(nJ+1)N × N`.
    pub fn stack_operator(&self) -> SparseMatrix<T> {
        let refs: Vec<&SparseMatrix<T>> = self.blocks.iter().collect();
        SparseMatrix::vstack(&refs).expect("blocks share the node count")
    }

    /// Writes `W♮ x` into `out`.
    pub fn decompose_into(&self, x: ArrayView2<'_, T>, mut out: ArrayViewMut2<'_, T>) -> Result<()> {
        let n = self.num_nodes;
        if x.nrows() != n || out.dim() != (self.stacked_rows(), x.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "decompose: operator on {n} nodes, signal has {} rows",
                x.nrows()
            )));
        }
        if let Some(d) = &self.dense {
            general_mat_mul(T::one(), d, &x, T::zero(), &mut out);
            return Ok(());
        }
        for (b, block) in self.blocks.iter().enumerate() {
            block.mul_dense_into(x, out.slice_mut(s![b * n..(b + 1) * n, ..]))?;
        }
        Ok(())
    }

    /// `W♮ᵀ c` for a raw stacked coefficient matrix.
    pub fn reconstruct_raw(&self, c: ArrayView2<'_, T>) -> Result<Array2<T>> {
        let n = self.num_nodes;
        if c.nrows() != self.stacked_rows() {
            return Err(Error::DimensionMismatch(format!(
                "reconstruct: expected {} coefficient rows, got {}",
                self.stacked_rows(),
                c.nrows()
            )));
        }
        if let Some(d) = &self.dense {
            return Ok(d.t().dot(&c));
        }
        let mut out = Array2::zeros((n, c.ncols()));
        for (b, block) in self.blocks.iter().enumerate() {
            block.tmul_dense_add(c.slice(s![b * n..(b + 1) * n, ..]), out.view_mut())?;
        }
        Ok(out)
    }
}

/// Framelet coefficients of an `N × d` signal, one `N × d` block per `(r, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientStack<T> {
    num_nodes: usize,
    ids: Vec<BlockId>,
    data: Array2<T>,
}

impl<T: Scalar> CoefficientStack<T> {
    pub fn new(num_nodes: usize, ids: Vec<BlockId>, data: Array2<T>) -> Result<Self> {
        if data.nrows() != num_nodes * ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "stack with {} blocks of {num_nodes} rows cannot hold {} rows",
                ids.len(),
                data.nrows()
            )));
        }
        if ids.first().is_none_or(|b| !b.is_low_pass())
            || ids[1..].iter().any(BlockId::is_low_pass)
        {
            return Err(Error::Format("low-pass block must come first and only once".into()));
        }
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != ids.len() {
            return Err(Error::Format("duplicate block identifier".into()));
        }
        Ok(Self { num_nodes, ids, data })
    }

    pub fn zeros(num_nodes: usize, ids: Vec<BlockId>, features: usize) -> Self {
        let rows = num_nodes * ids.len();
        Self { num_nodes, ids, data: Array2::zeros((rows, features)) }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_features(&self) -> usize {
        self.data.ncols()
    }

    pub fn block_ids(&self) -> &[BlockId] {
        &self.ids
    }

    pub fn data(&self) -> &Array2<T> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<T> {
        &mut self.data
    }

    pub fn into_data(self) -> Array2<T> {
        self.data
    }

    pub fn row_range(&self, index: usize) -> std::ops::Range<usize> {
        index * self.num_nodes..(index + 1) * self.num_nodes
    }

    pub fn block(&self, index: usize) -> ArrayView2<'_, T> {
        self.data.slice(s![self.row_range(index), ..])
    }

    pub fn block_mut(&mut self, index: usize) -> ArrayViewMut2<'_, T> {
        let range = self.row_range(index);
        self.data.slice_mut(s![range, ..])
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.num_nodes == other.num_nodes && self.ids == other.ids && self.data.dim() == other.data.dim()
    }
}

/// Forward transform: block `(r, j)` holds `W_{r,j} X`.
pub fn decompose<T: Scalar>(
    op: &DecompositionOperator<T>,
    x: ArrayView2<'_, T>,
) -> Result<CoefficientStack<T>> {
    let mut stack = CoefficientStack::zeros(op.num_nodes, op.ids.clone(), x.ncols());
    op.decompose_into(x, stack.data.view_mut())?;
    Ok(stack)
}

/// Inverse transform `Σ_{(r,j)} W_{r,j}ᵀ c_{(r,j)}`.
pub fn reconstruct<T: Scalar>(
    op: &DecompositionOperator<T>,
    c: &CoefficientStack<T>,
) -> Result<Array2<T>> {
    if c.num_nodes != op.num_nodes || c.ids != op.ids {
        return Err(Error::DimensionMismatch(
            "coefficient block layout does not match the operator".into(),
        ));
    }
    op.reconstruct_raw(c.data.view())
}

/// Squared Frobenius norm of every block, in block order.
pub fn block_energies<T: Scalar>(c: &CoefficientStack<T>) -> Vec<(BlockId, T)> {
    c.ids
        .iter()
        .enumerate()
        .map(|(b, &id)| (id, c.block(b).iter().map(|v| *v * *v).sum()))
        .collect()
}
