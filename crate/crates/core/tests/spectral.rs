use std::f64::consts::PI;

use ndarray::{array, Array2};
use proptest::prelude::*;
use ufg::experiments::data::{erdos_renyi, path_graph, seeded_rng};
use ufg::filter::linspace;
use ufg::graph::{power_iteration_bound, PowerIterationConfig};
use ufg::verify::random_matrix;
use ufg::*;

fn k2() -> Graph64 {
    build_graph(&[(0, 1, 1.0)], 2, false).unwrap()
}

#[test]
fn build_graph_examples() {
    let g = k2();
    assert_eq!(g.num_edges(), 1);
    assert!(g.has_edge(0, 1) && g.has_edge(1, 0));

    let g = build_graph(&[(0, 1, 1.0), (1, 0, 1.0)], 2, false).unwrap();
    assert_eq!(g.edges(), &[(0, 1, 2.0)]);

    let g = build_graph::<f64>(&[], 3, true).unwrap();
    assert_eq!(g.edges(), &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]);
}

#[test]
fn build_graph_rejects_bad_input() {
    assert!(matches!(build_graph(&[(0, 3, 1.0)], 3, false), Err(Error::NodeOutOfRange { index: 3, .. })));
    assert!(matches!(build_graph(&[(0, 1, -0.5)], 3, false), Err(Error::InvalidWeight { .. })));
    assert!(matches!(build_graph::<f64>(&[], 0, false), Err(Error::EmptyGraph)));
}

#[test]
fn laplacian_examples() {
    let l = normalized_laplacian(&k2()).to_dense();
    assert_eq!(l, array![[1.0, -1.0], [-1.0, 1.0]]);

    let p3 = normalized_laplacian(&path_graph(3).unwrap());
    let s = eigendecompose(&p3).unwrap();
    for (got, want) in s.eigenvalues.iter().zip([0.0, 1.0, 2.0]) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    let single = build_graph::<f64>(&[], 1, false).unwrap();
    assert_eq!(normalized_laplacian(&single).to_dense(), array![[1.0]]);
}

#[test]
fn isolated_nodes_get_identity_rows() {
    let g = build_graph(&[(0, 1, 1.0)], 3, false).unwrap();
    let l = normalized_laplacian(&g).to_dense();
    assert_eq!(l.row(2).to_vec(), vec![0.0, 0.0, 1.0]);
    assert_eq!(l.column(2).to_vec(), vec![0.0, 0.0, 1.0]);
}

#[test]
fn lambda_max_examples() {
    let l = normalized_laplacian(&k2());
    assert!((lambda_max(&l, LambdaMode::Exact).unwrap() - 2.0).abs() < 1e-12);

    let eye = SparseMatrix64::identity(5);
    assert!((lambda_max(&eye, LambdaMode::Exact).unwrap() - 1.0).abs() < 1e-12);
    let p = lambda_max(&eye, LambdaMode::PowerIteration).unwrap();
    assert!((1.0..=1.01 + 1e-12).contains(&p), "{p}");

    for seed in 0..10 {
        let g = erdos_renyi(60, 0.1, seed).unwrap();
        let l = normalized_laplacian(&g);
        assert!(normalized_spectral_bound(&l).unwrap() <= 2.02);
    }
}

#[test]
fn power_iteration_brackets_exact_value() {
    let mut converged = 0;
    for seed in 0..20 {
        let g = erdos_renyi(40, 0.15, seed).unwrap();
        let l = normalized_laplacian(&g);
        let exact = lambda_max(&l, LambdaMode::Exact).unwrap();
        match power_iteration_bound(&l, PowerIterationConfig::default()) {
            Ok(b) => {
                converged += 1;
                assert!(b >= exact - 1e-6 && b <= 1.02 * exact, "seed {seed}: {b} vs {exact}");
            }
            Err(Error::NotConverged { best_bound, .. }) => assert!(best_bound >= exact - 1e-6),
            Err(e) => panic!("{e}"),
        }
    }
    assert!(converged > 0);
}

#[test]
fn eigendecompose_examples() {
    let d = SparseMatrix64::from_diagonal(&[1.0, 2.0, 3.0]);
    let s = eigendecompose(&d).unwrap();
    assert_eq!(s.eigenvalues.to_vec(), vec![1.0, 2.0, 3.0]);
    let abs = s.eigenvectors.mapv(f64::abs);
    assert!((abs - Array2::<f64>::eye(3)).iter().all(|v| v.abs() < 1e-12));

    let s = eigendecompose(&normalized_laplacian(&k2())).unwrap();
    assert!(s.eigenvalues[0].abs() < 1e-12 && (s.eigenvalues[1] - 2.0).abs() < 1e-12);
    let h = 1.0 / 2f64.sqrt();
    let u0 = s.eigenvectors.column(0);
    let u1 = s.eigenvectors.column(1);
    assert!((u0[0].abs() - h).abs() < 1e-12 && (u0[0] - u0[1]).abs() < 1e-12);
    assert!((u1[0].abs() - h).abs() < 1e-12 && (u1[0] + u1[1]).abs() < 1e-12);

    let a = random_matrix(10, 10, &mut seeded_rng(4));
    let sym = &a + &a.t();
    let m = SparseMatrix64::from_dense(sym.view()).unwrap();
    let s = eigendecompose(&m).unwrap();
    assert!(s.reconstruction_error(&m) <= 1e-9);
    assert!(s.orthogonality_error() <= 1e-10);
}

#[test]
fn eigendecompose_refuses_large_graphs() {
    let g = build_graph::<f64>(&[], 2001, false).unwrap();
    assert!(matches!(eigendecompose(&normalized_laplacian(&g)), Err(Error::OracleTooLarge { .. })));
}

#[test]
fn haar_bank_examples() {
    let bank = haar_filter_bank::<f64>();
    let (a, b) = (&bank.low_pass, &bank.high_passes[0]);
    assert_eq!(bank.num_high_passes(), 1);
    assert_eq!((a.eval(0.0), b.eval(0.0)), (1.0, 0.0));
    assert!(a.eval(PI).abs() < 1e-15 && (b.eval(PI) - 1.0).abs() < 1e-15);
    let x = 1.234;
    assert!((a.eval(x).powi(2) + b.eval(x).powi(2) - 1.0).abs() < 1e-15);
    assert!(bank.partition_of_unity_deviation(&linspace(0.0, 2.0 * PI, 1001)) <= 1e-12);
}

#[test]
fn refinement_examples() {
    let bank = haar_filter_bank::<f64>();
    let scaling = haar_scaling_functions::<f64>();
    let report = verify_refinement(&bank, &scaling, &linspace(0.0, PI, 1001)).unwrap();
    assert!(report.low <= 1e-12 && report.high[0] <= 1e-12, "{report:?}");

    let at_zero = verify_refinement(&bank, &scaling, &[0.0]).unwrap();
    assert_eq!(at_zero.max(), 0.0);

    let mut wrong = haar_scaling_functions::<f64>();
    wrong.high = vec![SpectralFunction::new("wrong", |x: f64| (x / 2.0).sin())];
    assert!(verify_refinement(&bank, &wrong, &linspace(0.0, PI, 1001)).unwrap().high[0] > 0.1);
}

#[test]
fn chebyshev_fit_examples() {
    let one = SpectralFunction::new("one", |_: f64| 1.0);
    for t in [1, 2, 5, 8, 16, 31] {
        let fit = chebyshev_fit(&one, t, 0.0, 2.0).unwrap();
        assert_eq!(fit.coefficients[0], 1.0);
        assert!(fit.coefficients[1..].iter().all(|&c| c == 0.0), "t = {t}: {:?}", fit.coefficients);
        assert!(fit.max_error <= 1e-15);
    }

    let id = SpectralFunction::new("x", |x: f64| x);
    for t in [1, 4, 9] {
        let fit = chebyshev_fit(&id, t, -1.0, 1.0).unwrap();
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-14);
        for (k, c) in fit.coefficients.iter().enumerate().filter(|&(k, _)| k != 1) {
            assert!(c.abs() < 1e-14, "c{k} = {c}");
        }
    }

    let half_cos = SpectralFunction::new("cos", |x: f64| (x / 2.0).cos());
    let errors: Vec<f64> =
        [4, 8, 16].iter().map(|&t| chebyshev_fit(&half_cos, t, 0.0, PI).unwrap().max_error).collect();
    assert!(errors[2] <= 1e-10, "{errors:?}");
    assert!(errors[1] <= 1.1 * errors[0] && errors[2] <= 1.1 * errors[1], "{errors:?}");
}

#[test]
fn chebyshev_fit_rejects_bad_domains() {
    let one = SpectralFunction::new("one", |_: f64| 1.0);
    assert!(matches!(chebyshev_fit(&one, 4, 1.0, 1.0), Err(Error::DegenerateDomain { .. })));
    assert!(matches!(chebyshev_fit(&one, 4, 2.0, 1.0), Err(Error::DegenerateDomain { .. })));
    assert!(chebyshev_fit(&one, 0, 0.0, 1.0).is_err());
}

#[test]
fn matrix_polynomial_examples() {
    let x = random_matrix(3, 2, &mut seeded_rng(1));
    let m = SparseMatrix64::from_diagonal(&[0.0, 1.0, 2.0]);

    let one = chebyshev_fit(&SpectralFunction::new("one", |_: f64| 1.0), 6, 0.0, 2.0).unwrap();
    assert!((apply_matrix_polynomial(&one, &m, x.view()).unwrap() - &x).iter().all(|v| v.abs() < 1e-15));

    let id = chebyshev_fit(&SpectralFunction::new("x", |x: f64| x), 3, 0.0, 2.0).unwrap();
    let mx = m.mul_dense(x.view()).unwrap();
    assert!((apply_matrix_polynomial(&id, &m, x.view()).unwrap() - &mx).iter().all(|v| v.abs() < 1e-14));

    let low = chebyshev_fit(&haar_filter_bank::<f64>().low_pass, 16, 0.0, 2.0).unwrap();
    let y = apply_matrix_polynomial(&low, &m, x.view()).unwrap();
    for (i, lam) in [0.0f64, 1.0, 2.0].into_iter().enumerate() {
        for f in 0..2 {
            assert!((y[[i, f]] - (lam / 2.0).cos() * x[[i, f]]).abs() <= 1e-9);
            assert!((y[[i, f]] - low.eval(lam) * x[[i, f]]).abs() <= 1e-12);
        }
    }

    let sparse = matrix_polynomial_sparse(&low, &m).unwrap();
    assert!((sparse.mul_dense(x.view()).unwrap() - &y).iter().all(|v| v.abs() < 1e-12));
    assert!(matches!(apply_matrix_polynomial(&low, &m, random_matrix(4, 1, &mut seeded_rng(0)).view()), Err(Error::DimensionMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_is_symmetric_with_bounded_spectrum(n in 2usize..40, p in 0.0f64..0.6, seed in any::<u64>()) {
        let l = normalized_laplacian(&erdos_renyi(n, p, seed).unwrap());
        prop_assert!(l.max_asymmetry() <= 1e-14);
        let s = eigendecompose(&l).unwrap();
        prop_assert!(s.eigenvalues.iter().all(|&v| (-1e-10..=2.0 + 1e-10).contains(&v)));
        prop_assert!(s.eigenvalues.windows(2).into_iter().all(|w| w[0] <= w[1]));
        prop_assert!(s.orthogonality_error() <= 1e-10);
        prop_assert!(s.reconstruction_error(&l) <= 1e-9);
    }

    #[test]
    fn duplicate_edges_sum(u in 0usize..6, v in 0usize..6, w1 in 0.0f64..5.0, w2 in 0.0f64..5.0) {
        let g = build_graph(&[(u, v, w1), (v, u, w2)], 6, false).unwrap();
        prop_assert_eq!(g.edges(), &[(u.min(v), u.max(v), w1 + w2)]);
    }

    #[test]
    fn partition_of_unity_everywhere(x in 0.0f64..(4.0 * PI)) {
        let bank = haar_filter_bank::<f64>();
        prop_assert!(bank.partition_of_unity_deviation(&[x]) <= 1e-15);
    }

    #[test]
    fn matrix_polynomial_on_diagonal_is_elementwise(diag in prop::collection::vec(0.0f64..2.0, 1..12), t in 1usize..20) {
        let fit = chebyshev_fit(&haar_filter_bank::<f64>().high_passes[0], t, 0.0, 2.0).unwrap();
        let m = SparseMatrix64::from_diagonal(&diag);
        let x = Array2::from_elem((diag.len(), 1), 1.0);
        let y = apply_matrix_polynomial(&fit, &m, x.view()).unwrap();
        for (i, &d) in diag.iter().enumerate() {
            prop_assert!((y[[i, 0]] - fit.eval(d)).abs() <= 1e-12);
        }
    }
}
