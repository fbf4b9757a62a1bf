//! Weighted undirected graphs, Laplacians and their spectra.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// Largest matrix the dense eigendecomposition oracle accepts.
pub const ORACLE_LIMIT: usize = 2000;

/// An undirected weighted graph.
///
/// Edges are stored once, as `(u, v, w)` with `u <= v`, sorted and without
/// duplicates. `u == v` denotes a self-loop.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph<T> {
    num_nodes: usize,
    edges: Vec<(usize, usize, T)>,
}

/// Builds a graph from an edge list.
///
/// Edges are symmetrized; a pair listed more than once (in either direction)
/// becomes one edge carrying the summed weight. With `add_self_loops`, every
/// node gets an additional loop of weight one.
pub fn build_graph<T: Scalar>(
    edges: &[(usize, usize, T)],
    num_nodes: usize,
    add_self_loops: bool,
) -> Result<Graph<T>> {
    if num_nodes == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut merged: BTreeMap<(usize, usize), T> = BTreeMap::new();
    for &(u, v, w) in edges {
        for index in [u, v] {
            if index >= num_nodes {
                return Err(Error::NodeOutOfRange { index, num_nodes });
            }
        }
        if !w.is_finite() || w < T::zero() {
            return Err(Error::InvalidWeight { u, v, weight: w.as_f64() });
        }
        *merged.entry((u.min(v), u.max(v))).or_insert_with(T::zero) += w;
    }
    if add_self_loops {
        for i in 0..num_nodes {
            *merged.entry((i, i)).or_insert_with(T::zero) += T::one();
        }
    }
    Ok(Graph { num_nodes, edges: merged.into_iter().map(|((u, v), w)| (u, v, w)).collect() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LaplacianKind {
    /// `I − D^{-1/2} A D^{-1/2}`.
    #[default]
    Normalized,
    /// `D − A`.
    Combinatorial,
}

impl<T: Scalar> Graph<T> {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    /// Number of stored undirected edges, self-loops included.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges between distinct nodes.
    pub fn num_links(&self) -> usize {
        self.edges.iter().filter(|(u, v, _)| u != v).count()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search_by(|&(a, b, _)| (a, b).cmp(&key)).is_ok()
    }

    /// Symmetric adjacency matrix; a self-loop of weight `w` sits on the diagonal.
    pub fn adjacency(&self) -> SparseMatrix<T> {
        let mut triplets = Vec::with_capacity(2 * self.edges.len());
        for &(u, v, w) in &self.edges {
            triplets.push((u, v, w));
            if u != v {
                triplets.push((v, u, w));
            }
        }
        SparseMatrix::from_triplets(self.num_nodes, self.num_nodes, &triplets)
            .expect("graph edges are validated")
    }

    pub fn degrees(&self) -> Vec<T> {
        let mut deg = vec![T::zero(); self.num_nodes];
        for &(u, v, w) in &self.edges {
            deg[u] += w;
            if u != v {
                deg[v] += w;
            }
        }
        deg
    }

    /// Unweighted neighbour counts, ignoring self-loops.
    pub fn neighbor_counts(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(u, v, _) in &self.edges {
            if u != v {
                deg[u] += 1;
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn laplacian(&self, kind: LaplacianKind) -> SparseMatrix<T> {
        match kind {
            LaplacianKind::Normalized => normalized_laplacian(self),
            LaplacianKind::Combinatorial => combinatorial_laplacian(self),
        }
    }

    /// `D^{-1/2} A D^{-1/2}` with zero-degree rows left empty.
    pub fn normalized_adjacency(&self) -> SparseMatrix<T> {
        let dinv = inv_sqrt_degrees(self);
        let mut triplets = Vec::with_capacity(2 * self.edges.len());
        for &(u, v, w) in &self.edges {
            let a = w * (dinv[u] * dinv[v]);
            triplets.push((u, v, a));
            if u != v {
                triplets.push((v, u, a));
            }
        }
        SparseMatrix::from_triplets(self.num_nodes, self.num_nodes, &triplets)
            .expect("graph edges are validated")
    }
}

fn inv_sqrt_degrees<T: Scalar>(g: &Graph<T>) -> Vec<T> {
    g.degrees()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d.sqrt() } else { T::zero() })
        .collect()
}

/// Symmetric normalized Laplacian `I − D^{-1/2} A D^{-1/2}`.
///
/// Zero-degree nodes get `D^{-1/2} = 0`, so their rows are identity rows.
pub fn normalized_laplacian<T: Scalar>(g: &Graph<T>) -> SparseMatrix<T> {
    let n = g.num_nodes();
    let dinv = inv_sqrt_degrees(g);
    let mut triplets: Vec<(usize, usize, T)> = (0..n).map(|i| (i, i, T::one())).collect();
    for &(u, v, w) in g.edges() {
        // w * (d_u d_v) is commutative in the pair, so L is exactly symmetric.
        let a = w * (dinv[u] * dinv[v]);
        triplets.push((u, v, -a));
        if u != v {
            triplets.push((v, u, -a));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets).expect("graph edges are validated")
}

/// Combinatorial Laplacian `D − A`.
pub fn combinatorial_laplacian<T: Scalar>(g: &Graph<T>) -> SparseMatrix<T> {
    let n = g.num_nodes();
    let deg = g.degrees();
    let mut triplets: Vec<(usize, usize, T)> = (0..n).map(|i| (i, i, deg[i])).collect();
    for &(u, v, w) in g.edges() {
        triplets.push((u, v, -w));
        if u != v {
            triplets.push((v, u, -w));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets).expect("graph edges are validated")
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Spectrum<T> {
    pub eigenvalues: Array1<T>,
    pub eigenvectors: Array2<T>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn lambda_max(&self) -> T {
        self.eigenvalues.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// `U f(Λ) Uᵀ` for a per-eigenvalue response.
    pub fn spectral_matrix(&self, response: &[T]) -> Array2<T> {
        let mut scaled = self.eigenvectors.clone();
        for (mut col, &r) in scaled.columns_mut().into_iter().zip(response) {
            col *= r;
        }
        scaled.dot(&self.eigenvectors.t())
    }

    /// `max |UᵀU − I|`.
    pub fn orthogonality_error(&self) -> T {
        let gram = self.eigenvectors.t().dot(&self.eigenvectors);
        max_abs_diff(&gram, &Array2::eye(gram.nrows()))
    }

    /// `max |U Λ Uᵀ − L|`.
    pub fn reconstruction_error(&self, l: &SparseMatrix<T>) -> T {
        let ev = self.eigenvalues.to_vec();
        max_abs_diff(&self.spectral_matrix(&ev), &l.to_dense())
    }
}

pub(crate) fn max_abs_diff<T: Scalar>(a: &Array2<T>, b: &Array2<T>) -> T {
    a.iter().zip(b.iter()).map(|(x, y)| (*x - *y).abs()).fold(T::zero(), T::max)
}

/// Dense symmetric eigendecomposition, computed in double precision.
///
/// Refuses matrices above [`ORACLE_LIMIT`] rows.
pub fn eigendecompose<T: Scalar>(l: &SparseMatrix<T>) -> Result<Spectrum<T>> {
    let n = l.rows();
    if n != l.cols() {
        return Err(Error::DimensionMismatch(format!("eigendecompose: {}x{}", n, l.cols())));
    }
    if n > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge { size: n, limit: ORACLE_LIMIT });
    }
    let mut dense = DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in l.iter() {
        dense[(i, j)] = v.as_f64();
    }
    // Symmetrize so the solver sees exactly the matrix it assumes.
    let dense = (&dense + dense.transpose()) * 0.5;
    let eig = SymmetricEigen::new(dense);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = Array1::from_iter(order.iter().map(|&k| T::lit(eig.eigenvalues[k])));
    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[[row, col]] = T::lit(eig.eigenvectors[(row, k)]);
        }
    }
    Ok(Spectrum { eigenvalues, eigenvectors })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaMode {
    Exact,
    PowerIteration,
}

#[derive(Clone, Copy, Debug)]
pub struct PowerIterationConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub safety_factor: f64,
}

impl Default for PowerIterationConfig {
    fn default() -> Self {
        Self { max_iterations: 500, tolerance: 1e-8, safety_factor: 1.01 }
    }
}

/// Largest eigenvalue of a symmetric matrix, or an upper estimate of it.
pub fn lambda_max<T: Scalar>(l: &SparseMatrix<T>, mode: LambdaMode) -> Result<T> {
    match mode {
        LambdaMode::Exact => Ok(eigendecompose(l)?.lambda_max()),
        LambdaMode::PowerIteration => power_iteration_bound(l, PowerIterationConfig::default()),
    }
}

/// Power-iteration estimate of `λ_max`, inflated by the safety factor.
///
/// The result is the converged Rayleigh quotient times the safety factor,
/// capped at the Gershgorin bound and never below the Rayleigh quotient
/// itself. Intended for positive semidefinite matrices such as Laplacians.
pub fn power_iteration_bound<T: Scalar>(
    l: &SparseMatrix<T>,
    cfg: PowerIterationConfig,
) -> Result<T> {
    let n = l.rows();
    if n != l.cols() || n == 0 {
        return Err(Error::DimensionMismatch(format!("power iteration on {:?}", l.shape())));
    }
    let gershgorin = l.gershgorin_bound();
    let finish = |rho: T| {
        let inflated = (rho * T::lit(cfg.safety_factor)).min(gershgorin);
        inflated.max(rho)
    };
    // All-ones plus a small deterministic perturbation.
    let mut v: Vec<T> = (0..n).map(|i| T::one() + T::lit(1e-3 * ((i + 1) as f64).sin())).collect();
    normalize(&mut v);
    let mut rho = T::zero();
    for it in 0..cfg.max_iterations {
        let w = l.matvec(&v)?;
        let next_rho: T = v.iter().zip(&w).map(|(a, b)| *a * *b).sum();
        v = w;
        if normalize(&mut v) == T::zero() {
            return Ok(finish(next_rho.max(T::zero())));
        }
        if it > 0 && (next_rho - rho).abs() <= T::lit(cfg.tolerance) * next_rho.abs().max(T::one()) {
            return Ok(finish(next_rho));
        }
        rho = next_rho;
    }
    Err(Error::NotConverged { iterations: cfg.max_iterations, best_bound: gershgorin.as_f64() })
}

/// Upper bound on `λ_max` of a normalized Laplacian for the Chebyshev path.
///
/// Uses the power-iteration estimate; when it does not converge, falls back
/// to the Gershgorin bound capped at 2, which bounds every normalized Laplacian.
pub fn normalized_spectral_bound<T: Scalar>(l: &SparseMatrix<T>) -> Result<T> {
    match power_iteration_bound(l, PowerIterationConfig::default()) {
        Err(Error::NotConverged { best_bound, .. }) => Ok(T::lit(best_bound.min(2.0))),
        other => other,
    }
}

fn normalize<T: Scalar>(v: &mut [T]) -> T {
    let norm = v.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if norm > T::zero() {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph<f64> {
        build_graph(&[(0, 1, 1.0), (1, 2, 1.0)], 3, false).unwrap()
    }

    #[test]
    fn minimal_graph() {
        let g = build_graph(&[(0, 1, 1.0f64)], 2, false).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn duplicate_edges_sum() {
        let g = build_graph(&[(0, 1, 1.0), (1, 0, 1.0)], 2, false).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 2.0)]);
    }

    #[test]
    fn self_loops_only() {
        let g = build_graph::<f64>(&[], 3, true).unwrap();
        assert_eq!(g.edges(), &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_graph(&[(0, 5, 1.0)], 3, false),
            Err(Error::NodeOutOfRange { index: 5, .. })
        ));
        assert!(matches!(build_graph(&[(0, 1, -1.0)], 3, false), Err(Error::InvalidWeight { .. })));
        assert!(build_graph::<f64>(&[], 0, false).is_err());
    }

    #[test]
    fn k2_laplacian() {
        let g = build_graph(&[(0, 1, 1.0f64)], 2, false).unwrap();
        let l = normalized_laplacian(&g).to_dense();
        assert_eq!(l, ndarray::array![[1.0, -1.0], [-1.0, 1.0]]);
    }

    #[test]
    fn isolated_node_is_identity_row() {
        let g = build_graph::<f64>(&[], 1, false).unwrap();
        assert_eq!(normalized_laplacian(&g).to_dense(), ndarray::array![[1.0]]);
        let g = build_graph(&[(0, 1, 1.0f64)], 3, false).unwrap();
        let l = normalized_laplacian(&g);
        assert_eq!(l.row(2), (&[2usize][..], &[1.0][..]));
    }

    #[test]
    fn path3_spectrum() {
        // P3: L = [[1,-1/√2,0],[-1/√2,1,-1/√2],[0,-1/√2,1]]; characteristic
        // polynomial (1-λ)((1-λ)^2 - 1) has roots 0, 1, 2.
        let s = eigendecompose(&normalized_laplacian(&path3())).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([0.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn k2_eigenpairs() {
        let g = build_graph(&[(0, 1, 1.0f64)], 2, false).unwrap();
        let l = normalized_laplacian(&g);
        let s = eigendecompose(&l).unwrap();
        assert!((s.eigenvalues[0]).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 2.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.eigenvectors[[0, 0]].abs() - h).abs() < 1e-14);
        assert!((s.eigenvectors[[0, 1]] * s.eigenvectors[[1, 1]] + 0.5).abs() < 1e-14);
        assert!((lambda_max(&l, LambdaMode::Exact).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_eigendecomposition() {
        let d = SparseMatrix::<f64>::from_diagonal(&[1.0, 2.0, 3.0]);
        let s = eigendecompose(&d).unwrap();
        assert_eq!(s.eigenvalues.to_vec(), vec![1.0, 2.0, 3.0]);
        for i in 0..3 {
            assert!((s.eigenvectors[[i, i]].abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_lambda_max() {
        let i = SparseMatrix::<f64>::identity(5);
        assert!((lambda_max(&i, LambdaMode::Exact).unwrap() - 1.0).abs() < 1e-14);
        let est = lambda_max(&i, LambdaMode::PowerIteration).unwrap();
        assert!((1.0..=1.01).contains(&est));
    }

    #[test]
    fn oracle_refuses_large_matrices() {
        let big = SparseMatrix::<f64>::identity(ORACLE_LIMIT + 1);
        assert!(matches!(eigendecompose(&big), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn combinatorial_laplacian_rows_sum_to_zero() {
        let l = combinatorial_laplacian(&path3()).to_dense();
        for row in l.rows() {
            assert_eq!(row.sum(), 0.0);
        }
    }
}
