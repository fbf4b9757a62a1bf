use std::f64::consts::PI;

use ndarray::{array, Array2};
use proptest::prelude::*;
use ufg::experiments::data::{erdos_renyi, seeded_rng};
use ufg::verify::{cascade_error, parseval_error, random_matrix, relative_error, tightness_error};
use ufg::*;

fn exact(d: f64, levels: usize) -> FrameletSystem64 {
    FrameletSystem::haar(d, levels, TransformMode::Exact)
}

fn cheb(levels: usize, t: usize) -> FrameletSystem64 {
    FrameletSystem::haar(2.0, levels, TransformMode::Chebyshev).with_degree(t)
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `U diag(f(λ)) Uᵀ`.
fn spectral(s: &Spectrum64, f: impl Fn(f64) -> f64) -> Array2<f64> {
    let response: Vec<f64> = s.eigenvalues.iter().map(|&l| f(l)).collect();
    s.spectral_matrix(&response)
}

#[test]
fn compute_k_examples() {
    assert_eq!(compute_k(2.0, 2.0).unwrap(), 0);
    assert_eq!(compute_k(PI, 2.0).unwrap(), 0);
    assert_eq!(compute_k(10.0, 2.0).unwrap(), 2);
    assert_eq!(compute_k(10.0f32, 2.0).unwrap(), 2);
    assert!(compute_k(0.0, 2.0).is_err());
    assert!(compute_k(2.0, 1.0).is_err());
}

#[test]
fn single_node_graph() {
    let g = build_graph::<f64>(&[], 1, false).unwrap();
    let l = SparseMatrix64::zeros(1, 1);
    let op = build_operators(&exact(2.0, 1), &l, SpectralInfo::Spectrum(&eigendecompose(&l).unwrap())).unwrap();
    assert_eq!(op.block(BlockId { r: 0, j: 1 }).unwrap().to_dense(), array![[1.0]]);
    assert_eq!(op.block(BlockId { r: 1, j: 1 }).unwrap().to_dense(), array![[0.0]]);
    assert_eq!(op.stack_operator().to_dense(), array![[1.0], [0.0]]);

    let c = decompose(&op, array![[5.0]].view()).unwrap();
    assert_eq!(c.block(0).to_owned(), array![[5.0]]);
    assert_eq!(c.block(1).to_owned(), array![[0.0]]);
    let e = block_energies(&c);
    assert_eq!(e, vec![(BlockId { r: 0, j: 1 }, 25.0), (BlockId { r: 1, j: 1 }, 0.0)]);
    assert_eq!(g.num_nodes(), op.num_nodes());
}

#[test]
fn k2_high_pass_in_eigenbasis() {
    let g = build_graph(&[(0, 1, 1.0)], 2, false).unwrap();
    let op = operators_for_graph(&exact(2.0, 1), &g).unwrap();
    assert_eq!(op.provenance.k, 0);
    let w = op.block(BlockId { r: 1, j: 1 }).unwrap().to_dense();
    let s1 = 1f64.sin();
    let want = array![[0.5 * s1, -0.5 * s1], [-0.5 * s1, 0.5 * s1]];
    assert!(max_abs(&(w - want)) < 1e-15);
}

#[test]
fn stack_layout() {
    let g = build_graph(&[(0, 1, 1.0)], 2, false).unwrap();
    let op = operators_for_graph(&exact(2.0, 1), &g).unwrap();
    let stacked = op.stack_operator();
    assert_eq!(stacked.shape(), (4, 2));
    let low = op.block(BlockId { r: 0, j: 1 }).unwrap().to_dense();
    assert_eq!(stacked.to_dense().slice(ndarray::s![0..2, ..]), low);

    let g = erdos_renyi(10, 0.4, 0).unwrap();
    let op = operators_for_graph(&exact(2.0, 3), &g).unwrap();
    let ids: Vec<(usize, usize)> = op.block_ids().iter().map(|b| (b.r, b.j)).collect();
    assert_eq!(ids, vec![(0, 3), (1, 1), (1, 2), (1, 3)]);
    assert_eq!(op.num_blocks(), 4);
    assert_eq!(op.stacked_rows(), 40);
}

#[test]
fn exact_tightness_on_er30() {
    let g = erdos_renyi(30, 0.2, 5).unwrap();
    let op = operators_for_graph(&exact(2.0, 2), &g).unwrap();
    assert!(tightness_error(&op) <= 1e-10);
}

#[test]
fn zero_signal_and_zero_stack() {
    let g = erdos_renyi(25, 0.2, 1).unwrap();
    let op = operators_for_graph(&exact(2.0, 2), &g).unwrap();
    let c = decompose(&op, Array2::zeros((25, 3)).view()).unwrap();
    assert!(c.data().iter().all(|&v| v == 0.0));
    assert!(block_energies(&c).iter().all(|&(_, e)| e == 0.0));
    let z = CoefficientStack::zeros(25, op.block_ids().to_vec(), 3);
    assert!(reconstruct(&op, &z).unwrap().iter().all(|&v| v == 0.0));
}

#[test]
fn constant_signal_matches_eigenbasis_oracle() {
    let mut seed = 0;
    let g = loop {
        let g = erdos_renyi(30, 0.25, seed).unwrap();
        if g.neighbor_counts().iter().all(|&c| c > 0) {
            break g;
        }
        seed += 1;
    };
    let l = normalized_laplacian(&g);
    let s = eigendecompose(&l).unwrap();
    let op = build_operators(&exact(2.0, 2), &l, SpectralInfo::Spectrum(&s)).unwrap();
    let k = op.provenance.k;
    let x = Array2::from_elem((30, 1), 1.0);
    let c = decompose(&op, x.view()).unwrap();
    let a = |v: f64| (v / 2.0).cos();
    let b = |v: f64| (v / 2.0).sin();
    let sc = |j: i32| 2f64.powi(j - 1 - k);
    let oracles = [
        spectral(&s, |v| a(sc(2) * v) * a(sc(1) * v)),
        spectral(&s, |v| b(sc(1) * v)),
        spectral(&s, |v| b(sc(2) * v) * a(sc(1) * v)),
    ];
    for (i, oracle) in oracles.iter().enumerate() {
        let want = oracle.dot(&x);
        assert!(max_abs(&(c.block(i).to_owned() - want)) <= 1e-10, "block {i}");
    }
}

#[test]
fn telescoped_low_pass() {
    for (d, levels) in [(2.0, 1), (2.0, 3), (1.5, 2), (3.0, 2)] {
        let g = erdos_renyi(40, 0.15, 2).unwrap();
        let l = normalized_laplacian(&g);
        let s = eigendecompose(&l).unwrap();
        let op = build_operators(&exact(d, levels), &l, SpectralInfo::Spectrum(&s)).unwrap();
        let k = op.provenance.k;
        let oracle = spectral(&s, |v| {
            (1..=levels).map(|j| (d.powi(j as i32 - 1 - k) * v / 2.0).cos()).product::<f64>()
        });
        let low = op.block(BlockId { r: 0, j: levels }).unwrap().to_dense();
        assert!(max_abs(&(low - &oracle)) <= 1e-10);
        if d == 2.0 {
            let closed = spectral(&s, |v| {
                let u = v / 2f64.powi(k + 1);
                if u.abs() < 1e-300 {
                    1.0
                } else {
                    (2f64.powi(levels as i32) * u).sin() / (2f64.powi(levels as i32) * u.sin())
                }
            });
            assert!(max_abs(&(oracle - closed)) <= 1e-10);
        }
    }
}

#[test]
fn round_trip_er100_three_levels() {
    let g = erdos_renyi(100, 0.06, 7).unwrap();
    let op = operators_for_graph(&exact(2.0, 3), &g).unwrap();
    let x = random_matrix(100, 4, &mut seeded_rng(8));
    let y = reconstruct(&op, &decompose(&op, x.view()).unwrap()).unwrap();
    assert!(relative_error(y.view(), x.view()) <= 1e-10);
    assert!(parseval_error(&op, x.view()).unwrap() <= 1e-10);
}

#[test]
fn chebyshev_round_trip_and_agreement() {
    let g = erdos_renyi(50, 0.12, 3).unwrap();
    let l = normalized_laplacian(&g);
    let s = eigendecompose(&l).unwrap();
    let bound = normalized_spectral_bound(&l).unwrap();
    let ex = build_operators(&exact(2.0, 2), &l, SpectralInfo::Spectrum(&s)).unwrap();
    let ch16 = build_operators(&cheb(2, 16), &l, SpectralInfo::Bound(bound)).unwrap();
    let ch8 = build_operators(&cheb(2, 8), &l, SpectralInfo::Bound(bound)).unwrap();

    let x = random_matrix(50, 3, &mut seeded_rng(1));
    let y = reconstruct(&ch16, &decompose(&ch16, x.view()).unwrap()).unwrap();
    assert!(relative_error(y.view(), x.view()) <= 1e-6);

    let (e16, e8) = (tightness_error(&ch16), tightness_error(&ch8));
    assert!(e16 <= 1e-6 && e8 > e16, "t=8 {e8}, t=16 {e16}");

    let gap = |ch: &DecompositionOperator64| {
        ex.blocks()
            .zip(ch.blocks())
            .map(|((_, a), (_, b))| max_abs(&(a.to_dense() - b.to_dense())))
            .fold(0.0, f64::max)
    };
    assert!(gap(&ch16) <= 1e-6);
    assert!(gap(&ch8) > gap(&ch16));
}

#[test]
fn chebyshev_blocks_stay_sparse_on_sparse_graphs() {
    let g = erdos_renyi(300, 3.0 / 299.0, 4).unwrap();
    let op = operators_for_graph(&cheb(1, 4), &g).unwrap();
    assert!(op.nnz() < op.num_blocks() * 300 * 300);
}

#[test]
fn matrix_free_transform_matches_materialized() {
    let g = erdos_renyi(80, 0.06, 9).unwrap();
    let l = normalized_laplacian(&g);
    let bound = normalized_spectral_bound(&l).unwrap();
    for levels in [1, 2, 3] {
        let system = cheb(levels, 12);
        let op = build_operators(&system, &l, SpectralInfo::Bound(bound)).unwrap();
        let fast = FastFrameletTransform::new(&system, &l, bound).unwrap();
        assert_eq!(fast.num_blocks(), op.num_blocks());
        let x = random_matrix(80, 2, &mut seeded_rng(levels as u64));
        let a = decompose(&op, x.view()).unwrap();
        let b = fast.decompose(x.view()).unwrap();
        assert_eq!(a.block_ids(), b.block_ids());
        assert!(max_abs(&(a.data() - b.data())) <= 1e-12);
        let ya = reconstruct(&op, &a).unwrap();
        let yb = fast.reconstruct(&a).unwrap();
        assert!(max_abs(&(ya - yb)) <= 1e-12);
    }
}

#[test]
fn cascade_identity_per_level() {
    for (d, levels) in [(2.0, 3), (1.25, 2), (4.0, 2)] {
        let g = erdos_renyi(60, 0.1, 11).unwrap();
        let l = normalized_laplacian(&g);
        let s = eigendecompose(&l).unwrap();
        let system = exact(d, levels);
        let op = build_operators(&system, &l, SpectralInfo::Spectrum(&s)).unwrap();
        let x = random_matrix(60, 2, &mut seeded_rng(3));
        assert!(cascade_error(&op, &system, &s, x.view()).unwrap() <= 1e-9);
    }
}

#[test]
fn error_cases() {
    let g = erdos_renyi(10, 0.4, 0).unwrap();
    let l = normalized_laplacian(&g);
    assert!(matches!(build_operators(&exact(2.0, 1), &l, SpectralInfo::Bound(2.0)), Err(Error::MissingSpectrum)));
    assert!(matches!(build_operators(&cheb(1, 8), &l, SpectralInfo::Bound(0.5)), Err(Error::BoundViolated { .. })));
    assert!(build_operators(&exact(1.0, 1), &l, SpectralInfo::Bound(2.0)).is_err());
    assert!(build_operators(&exact(2.0, 0), &l, SpectralInfo::Bound(2.0)).is_err());

    let op = operators_for_graph(&exact(2.0, 2), &g).unwrap();
    assert!(matches!(decompose(&op, Array2::zeros((9, 1)).view()), Err(Error::DimensionMismatch(_))));
    let other = operators_for_graph(&exact(2.0, 1), &g).unwrap();
    let c = decompose(&other, Array2::zeros((10, 1)).view()).unwrap();
    assert!(matches!(reconstruct(&op, &c), Err(Error::DimensionMismatch(_))));
    assert!(CoefficientStack::new(10, op.block_ids().to_vec(), Array2::<f64>::zeros((29, 1))).is_err());
}

#[test]
fn single_precision_round_trip() {
    let g: Graph32 = build_graph(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 2.0)], 4, false).unwrap();
    let op = operators_for_graph(&FrameletSystem32::haar(2.0, 2, TransformMode::Exact), &g).unwrap();
    let x = Array2::from_shape_vec((4, 1), vec![1.0f32, -2.0, 0.5, 3.0]).unwrap();
    let y = reconstruct(&op, &decompose(&op, x.view()).unwrap()).unwrap();
    let err = (&y - &x).iter().map(|v| v * v).sum::<f32>().sqrt() / x.iter().map(|v| v * v).sum::<f32>().sqrt();
    assert!(err < 1e-5, "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exact_round_trip_and_parseval(
        n in 2usize..60,
        p in 0.02f64..0.5,
        levels in 1usize..4,
        d in prop::sample::select(vec![1.25, 1.5, 2.0, 3.0, 4.0]),
        features in 1usize..4,
        seed in any::<u64>(),
    ) {
        let g = erdos_renyi(n, p, seed).unwrap();
        let op = operators_for_graph(&exact(d, levels), &g).unwrap();
        let x = random_matrix(n, features, &mut seeded_rng(seed ^ 0x5eed));
        let c = decompose(&op, x.view()).unwrap();
        prop_assert_eq!(c.data().nrows(), (levels + 1) * n);
        let y = reconstruct(&op, &c).unwrap();
        prop_assert!(relative_error(y.view(), x.view()) <= 1e-10);
        prop_assert!(parseval_error(&op, x.view()).unwrap() <= 1e-10);
    }

    #[test]
    fn chebyshev_round_trip(n in 5usize..50, seed in any::<u64>(), levels in 1usize..4) {
        let g = erdos_renyi(n, 0.2, seed).unwrap();
        let op = operators_for_graph(&cheb(levels, 16), &g).unwrap();
        let x = random_matrix(n, 2, &mut seeded_rng(seed));
        let y = reconstruct(&op, &decompose(&op, x.view()).unwrap()).unwrap();
        prop_assert!(relative_error(y.view(), x.view()) <= 1e-6);
    }

    #[test]
    fn decomposition_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        let g = erdos_renyi(20, 0.3, seed).unwrap();
        let op = operators_for_graph(&exact(2.0, 2), &g).unwrap();
        let mut rng = seeded_rng(seed);
        let (x, y) = (random_matrix(20, 2, &mut rng), random_matrix(20, 2, &mut rng));
        let lhs = decompose(&op, (&x * alpha + &y).view()).unwrap();
        let rhs = decompose(&op, x.view()).unwrap().data() * alpha + decompose(&op, y.view()).unwrap().data();
        prop_assert!(max_abs(&(lhs.data() - &rhs)) <= 1e-12 * (1.0 + max_abs(&rhs)));
    }

    #[test]
    fn energies_are_nonnegative_and_ordered(seed in any::<u64>(), levels in 1usize..4) {
        let g = erdos_renyi(15, 0.3, seed).unwrap();
        let op = operators_for_graph(&exact(2.0, levels), &g).unwrap();
        let x = random_matrix(15, 1, &mut seeded_rng(seed));
        let e = block_energies(&decompose(&op, x.view()).unwrap());
        prop_assert_eq!(e.len(), levels + 1);
        prop_assert!(e[0].0.is_low_pass());
        prop_assert!(e.iter().all(|&(_, v)| v >= 0.0));
    }
}
