//! Undecimated graph framelet transforms.
//!
//! The crate builds Haar-type framelet decomposition operators on graph
//! Laplacians, either exactly (from an eigendecomposition) or through
//! Chebyshev polynomial surrogates materialized as sparse matrices. On top of
//! the transform sit soft-threshold shrinkage, a trainable framelet graph
//! convolution with hand-written gradients, framelet pooling, and a small
//! experiment harness.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root name the common instantiations.

pub mod error;
pub mod experiments;
pub mod fast;
pub mod filter;
pub mod framelet;
pub mod graph;
pub mod io;
pub mod nn;
pub mod scalar;
pub mod shrinkage;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
pub use fast::FastFrameletTransform;
pub use filter::{
    apply_matrix_polynomial, chebyshev_fit, haar_filter_bank, haar_scaling_functions,
    matrix_polynomial_sparse, verify_refinement, ChebyshevApprox, FilterBank, SpectralFunction,
};
pub use framelet::{
    block_energies, build_operators, compute_k, decompose, reconstruct, BlockId, CoefficientStack,
    DecompositionOperator, FrameletSystem, SpectralInfo, TransformMode, operators_for_graph,
};
pub use graph::{
    build_graph, eigendecompose, lambda_max, normalized_laplacian, normalized_spectral_bound, Graph, LambdaMode,
    LaplacianKind, Spectrum,
};
pub use scalar::Scalar;
pub use shrinkage::{
    compression_ratio, compute_threshold, shrink_stack, soft_threshold, ThresholdConfig,
    ThresholdMode,
};
pub use sparse::SparseMatrix;

pub type Graph64 = Graph<f64>;
pub type Graph32 = Graph<f32>;
pub type SparseMatrix64 = SparseMatrix<f64>;
pub type SparseMatrix32 = SparseMatrix<f32>;
pub type Spectrum64 = Spectrum<f64>;
pub type FrameletSystem64 = FrameletSystem<f64>;
pub type FrameletSystem32 = FrameletSystem<f32>;
pub type DecompositionOperator64 = DecompositionOperator<f64>;
pub type DecompositionOperator32 = DecompositionOperator<f32>;
pub type CoefficientStack64 = CoefficientStack<f64>;
pub type CoefficientStack32 = CoefficientStack<f32>;
