use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use ufg::experiments::bench::{bench_transform, BenchConfig};
use ufg::experiments::config::{default_dilations, default_levels, ExperimentConfig, GraphData, HyperGrid, NodeData};
use ufg::experiments::data::*;
use ufg::experiments::denoise::{denoise_signal, mse};
use ufg::experiments::graph_cls::{majority_baseline, train_graph_classifier, GraphTrainConfig, Readout};
use ufg::experiments::metrics::{mean_std, MetricsRecord};
use ufg::experiments::node::{train_node_classifier, ConvVariant, NodeTrainConfig};
use ufg::experiments::perturb::{perturb, PerturbationModel, PerturbationSpec, PerturbationTarget};
use ufg::experiments::sweep::sensitivity_sweep;
use ufg::*;

const GAUSS: FeatureModel = FeatureModel::Gaussian { dim: 16, noise_std: 0.3 };

fn links(g: &Graph64) -> usize {
    g.edges().iter().filter(|&&(u, v, _)| u != v).count()
}

#[test]
fn sbm_cliques() {
    let cfg = SbmConfig { sizes: vec![5, 7], p_in: 1.0, p_out: 0.0, features: GAUSS };
    let d = generate_sbm(&cfg, 3).unwrap();
    assert_eq!(links(&d.graph), 10 + 21);
    for &(u, v, w) in d.graph.edges() {
        assert_eq!(d.labels[u], d.labels[v]);
        assert_eq!(w, 1.0);
    }
    assert_eq!(d.labels.iter().filter(|&&l| l == 0).count(), 5);
    assert_eq!(d.num_classes, 2);
}

#[test]
fn sbm_expected_edges() {
    let cfg = SbmConfig::three_block(GAUSS);
    let expected = cfg.expected_edges();
    assert!((expected - (3.0 * 4950.0 * 0.1 + 30000.0 * 0.01)).abs() < 1e-9);
    let mean = (0..50).map(|s| links(&generate_sbm(&cfg, s).unwrap().graph) as f64).sum::<f64>() / 50.0;
    assert!((mean - expected).abs() <= 0.05 * expected, "{mean} vs {expected}");
}

#[test]
fn sbm_deterministic_and_split() {
    let cfg = SbmConfig::three_block(GAUSS);
    let a = generate_sbm(&cfg, 9).unwrap();
    assert_eq!(a, generate_sbm(&cfg, 9).unwrap());
    assert_ne!(a.graph, generate_sbm(&cfg, 10).unwrap().graph);
    assert_eq!(a.num_nodes(), 300);
    assert_eq!(a.features.dim(), (300, 16));
    let s = &a.splits;
    assert_eq!((s.train.len(), s.val.len(), s.test.len()), (30, 60, 210));
    for c in 0..3 {
        assert_eq!(s.train.iter().filter(|&&i| a.labels[i] == c).count(), 10);
    }
    let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..300).collect::<Vec<_>>());
}

#[test]
fn sbm_errors() {
    let empty = SbmConfig { sizes: vec![5, 0], p_in: 0.5, p_out: 0.1, features: GAUSS };
    assert!(generate_sbm(&empty, 0).is_err());
    let none = SbmConfig { sizes: vec![], ..empty.clone() };
    assert!(generate_sbm(&none, 0).is_err());
    let bad = SbmConfig { sizes: vec![5, 5], p_in: 1.5, ..empty };
    assert!(generate_sbm(&bad, 0).is_err());
}

#[test]
fn binary_features_are_binary() {
    let cfg = SbmConfig::three_block(FeatureModel::Binary { dim: 30, p_on: 0.3, p_off: 0.05 });
    let d = generate_sbm(&cfg, 1).unwrap();
    assert!(d.features.iter().all(|&v| v == 0.0 || v == 1.0));
}

#[test]
fn graph_families() {
    let d = cycles_vs_stars(20, 10, 30, 4).unwrap();
    assert_eq!(d.samples.len(), 40);
    for s in &d.samples {
        let n = s.graph.num_nodes();
        assert!((10..=30).contains(&n));
        assert_eq!(links(&s.graph), if s.label == 0 { n } else { n - 1 });
        assert_eq!(s.features.dim(), (n, 2));
    }
    assert_eq!(d, cycles_vs_stars(20, 10, 30, 4).unwrap());
    assert!(cycles_vs_stars(5, 2, 10, 0).is_err());
    let f = sbm_graph_family(5, 12, 20, 0).unwrap();
    assert_eq!((f.samples.len(), f.num_classes), (15, 3));
    assert!(sbm_graph_family(5, 4, 20, 0).is_err());
}

#[test]
fn identity_perturbations_are_noops() {
    let d = generate_sbm(&SbmConfig::three_block(FeatureModel::Binary { dim: 8, p_on: 0.5, p_off: 0.1 }), 2).unwrap();
    for model in [
        PerturbationModel::BernoulliFlip { ratio: 0.0 },
        PerturbationModel::Gaussian { sigma: 0.0 },
        PerturbationModel::EdgeRatio { ratio: 1.0 },
    ] {
        let (g, x) = perturb(&d.graph, &d.features, &PerturbationSpec::new(model, 5)).unwrap();
        assert_eq!(g, d.graph);
        assert_eq!(x, d.features);
    }
}

#[test]
fn edge_ratio_counts() {
    let n = 40;
    let mut pairs = Vec::new();
    'outer: for u in 0..n {
        for v in u + 1..n {
            if (u * 7 + v * 3) % 5 == 0 {
                pairs.push((u, v, 1.0));
                if pairs.len() == 100 {
                    break 'outer;
                }
            }
        }
    }
    let g = build_graph(&pairs, n, false).unwrap();
    assert_eq!(links(&g), 100);
    let x = Array2::zeros((n, 1));
    let half = perturb(&g, &x, &PerturbationSpec::new(PerturbationModel::EdgeRatio { ratio: 0.5 }, 1)).unwrap().0;
    assert_eq!(links(&half), 50);
    assert!(half.edges().iter().all(|e| pairs.iter().any(|p| (p.0, p.1) == (e.0, e.1))));
    let double = perturb(&g, &x, &PerturbationSpec::new(PerturbationModel::EdgeRatio { ratio: 2.0 }, 1)).unwrap().0;
    assert_eq!(links(&double), 200);
    let again = perturb(&g, &x, &PerturbationSpec::new(PerturbationModel::EdgeRatio { ratio: 2.0 }, 1)).unwrap().0;
    assert_eq!(double, again);
    assert!(perturb(&g, &x, &PerturbationSpec::new(PerturbationModel::EdgeRatio { ratio: 100.0 }, 1)).is_err());
}

#[test]
fn bernoulli_flip_rate() {
    let g = path_graph(1000).unwrap();
    let ones = Array2::ones((1000, 100));
    let spec = PerturbationSpec::new(PerturbationModel::BernoulliFlip { ratio: 0.1 }, 11);
    let (_, x) = perturb(&g, &ones, &spec).unwrap();
    let flipped = x.iter().filter(|&&v| v == 0.0).count() as f64 / 1e5;
    assert!((flipped - 0.1).abs() <= 0.005, "{flipped}");

    let mut rng = seeded_rng(3);
    let sparse = Array2::from_shape_simple_fn((1000, 100), || if rng.random::<f64>() < 0.3 { 1.0 } else { 0.0 });
    let nnz = sparse.iter().filter(|&&v| v == 1.0).count() as f64;
    let (_, y) = perturb(&g, &sparse, &spec).unwrap();
    let flips = sparse.iter().zip(&y).filter(|(a, b)| a != b).count() as f64;
    assert!((flips / nnz - 0.1).abs() <= 0.005, "{}", flips / nnz);
    assert!(y.iter().all(|&v| v == 0.0 || v == 1.0));
}

#[test]
fn perturbation_errors() {
    let g = path_graph(5).unwrap();
    let x = Array2::from_elem((5, 2), 0.5);
    assert!(perturb(&g, &x, &PerturbationSpec::new(PerturbationModel::BernoulliFlip { ratio: 0.1 }, 0)).is_err());
    assert!(perturb(&g, &x, &PerturbationSpec::new(PerturbationModel::Gaussian { sigma: -1.0 }, 0)).is_err());
    let wrong = PerturbationSpec { target: PerturbationTarget::Edges, model: PerturbationModel::Gaussian { sigma: 0.1 }, seed: 0 };
    assert!(perturb(&g, &x, &wrong).is_err());
}

#[test]
fn gaussian_perturbation_statistics() {
    let g = path_graph(500).unwrap();
    let x = Array2::zeros((500, 40));
    let (_, y) = perturb(&g, &x, &PerturbationSpec::new(PerturbationModel::Gaussian { sigma: 0.15 }, 2)).unwrap();
    let (mean, std) = mean_std(&y.iter().copied().collect::<Vec<_>>());
    assert!(mean.abs() < 0.005);
    assert!((std - 0.15).abs() < 0.005);
}

fn path_op(n: usize, levels: usize) -> DecompositionOperator64 {
    operators_for_graph(&FrameletSystem::haar(2.0, levels, TransformMode::Exact), &path_graph(n).unwrap()).unwrap()
}

#[test]
fn denoise_sigma_zero_is_lossless() {
    let op = path_op(60, 2);
    let x = ufg::verify::random_matrix(60, 2, &mut seeded_rng(0));
    let r = denoise_signal(&op, x.view(), 0.0, Some(x.view())).unwrap();
    assert!(r.denoised.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-10));
    assert_eq!(r.compression_ratio, 1.0);
    assert!(r.mse_denoised.unwrap() < 1e-20);
    assert_eq!(r.mse_noisy, Some(0.0));
}

#[test]
fn denoise_error_bounded_by_removed_energy() {
    let n = 100;
    let op = path_op(n, 2);
    let f = Array2::from_shape_fn((n, 1), |(i, _)| (4.0 * std::f64::consts::PI * i as f64 / n as f64).sin());
    let c = decompose(&op, f.view()).unwrap();
    for sigma in [0.01, 0.05, 0.1] {
        let r = denoise_signal(&op, f.view(), sigma, Some(f.view())).unwrap();
        let shrunk = shrink_stack(&c, &ThresholdConfig::global(sigma));
        let removed: f64 = c.data().iter().zip(shrunk.data()).map(|(a, b)| (a - b) * (a - b)).sum();
        let err = r.mse_denoised.unwrap() * n as f64;
        assert!(err <= removed + 1e-12, "{err} > {removed}");
    }
}

#[test]
fn denoise_shape_mismatch() {
    let op = path_op(10, 1);
    let x = Array2::zeros((10, 1));
    let t = Array2::zeros((10, 2));
    assert!(denoise_signal(&op, x.view(), 1.0, Some(t.view())).is_err());
    assert!(denoise_signal(&op, Array2::zeros((9, 1)).view(), 1.0, None).is_err());
    assert_eq!(mse(x.view(), x.view()), 0.0);
}

#[test]
fn denoise_reduces_noise() {
    let n = 200;
    let op = path_op(n, 2);
    let f = Array2::from_shape_fn((n, 1), |(i, _)| (4.0 * std::f64::consts::PI * i as f64 / n as f64).sin());
    let rms = (f.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let mut rng = seeded_rng(21);
    let noise: Array2<f64> = Array2::from_shape_simple_fn((n, 1), || StandardNormal.sample(&mut rng));
    let noisy = &f + &(noise * (0.5 * rms));
    let r = denoise_signal(&op, noisy.view(), 1.0, Some(f.view())).unwrap();
    assert!(r.mse_denoised.unwrap() < r.mse_noisy.unwrap());
    assert!(r.compression_ratio < 1.0);
}

fn quick_node(variant: ConvVariant, seeds: std::ops::Range<u64>) -> NodeTrainConfig {
    NodeTrainConfig { variant, epochs: 100, seeds: seeds.collect(), ..Default::default() }
}

#[test]
fn node_classifier_learns_sbm() {
    let d = generate_sbm(&SbmConfig::three_block(GAUSS), 0).unwrap();
    let (rec, runs) = train_node_classifier(&d, &quick_node(ConvVariant::Relu, 0..3)).unwrap();
    assert_eq!(rec.label, "UFGConv-R");
    assert!(rec.mean >= 0.9, "{rec:?}");
    assert_eq!(runs.len(), 3);
    assert!(rec.compression_ratio.is_none());
    for r in &runs {
        assert!(r.best_epoch < 100);
        assert!(r.log.iter().all(|m| m.seed == r.seed && m.loss.is_finite()));
    }
    let (s, _) = train_node_classifier(&d, &quick_node(ConvVariant::Shrinkage, 0..3)).unwrap();
    assert_eq!(s.label, "UFGConv-S");
    let ratio = s.compression_ratio.unwrap();
    assert!(ratio > 0.0 && ratio <= 1.0);
}

#[test]
fn shuffled_labels_give_chance() {
    let d = generate_sbm(&SbmConfig::three_block(GAUSS), 0).unwrap();
    let cfg = NodeTrainConfig { shuffle_labels: true, ..quick_node(ConvVariant::Relu, 0..10) };
    let (rec, _) = train_node_classifier(&d, &cfg).unwrap();
    assert!((rec.mean - 1.0 / 3.0).abs() <= 0.05, "{}", rec.mean);
}

#[test]
fn node_training_is_reproducible() {
    let d = generate_sbm(&SbmConfig::three_block(GAUSS), 1).unwrap();
    let cfg = NodeTrainConfig { epochs: 30, ..quick_node(ConvVariant::Shrinkage, 4..6) };
    let (a, ra) = train_node_classifier(&d, &cfg).unwrap();
    let (b, rb) = train_node_classifier(&d, &cfg).unwrap();
    assert_eq!(a.per_seed, b.per_seed);
    assert_eq!(a.fingerprint, b.fingerprint);
    assert_eq!(a.compression_ratio, b.compression_ratio);
    assert_eq!(ra, rb);
    let other = NodeTrainConfig { lr: 0.02, ..cfg };
    assert_ne!(train_node_classifier(&d, &other).unwrap().0.fingerprint, a.fingerprint);
}

#[test]
fn node_config_errors() {
    let d = generate_sbm(&SbmConfig::three_block(GAUSS), 0).unwrap();
    for cfg in [
        NodeTrainConfig { epochs: 0, ..Default::default() },
        NodeTrainConfig { seeds: vec![], ..Default::default() },
        NodeTrainConfig { lr: 0.0, ..Default::default() },
    ] {
        assert!(train_node_classifier(&d, &cfg).is_err());
    }
}

fn quick_graph(readout: Readout, seeds: std::ops::Range<u64>) -> GraphTrainConfig {
    GraphTrainConfig { readout, seeds: seeds.collect(), ..Default::default() }
}

#[test]
fn single_class_graphs() {
    let mut d = cycles_vs_stars(20, 10, 20, 0).unwrap();
    for s in &mut d.samples {
        s.label = 0;
    }
    for readout in [Readout::Sum, Readout::Spectrum] {
        let cfg = GraphTrainConfig { patience: None, ..quick_graph(readout, 0..2) };
        let (rec, runs) = train_graph_classifier(&d, &cfg).unwrap();
        assert_eq!(rec.mean, 1.0);
        assert!(runs.iter().all(|r| r.test_loss < 0.05), "{:?}", runs.iter().map(|r| r.test_loss).collect::<Vec<_>>());
    }
    assert_eq!(majority_baseline(&d, 0), 1.0);
}

#[test]
fn pooling_beats_baseline_on_sbm_family() {
    let d = GraphData::SbmFamily { per_class: 60, min_size: 12, max_size: 30, seed: 0 }.load().unwrap();
    let base = (0..3).map(|s| majority_baseline(&d, s)).sum::<f64>() / 3.0;
    for readout in [Readout::Sum, Readout::Spectrum] {
        let (rec, _) = train_graph_classifier(&d, &quick_graph(readout, 0..3)).unwrap();
        assert_eq!(rec.label, readout.label());
        assert!(rec.mean >= base + 0.2, "{} {} vs {base}", rec.label, rec.mean);
    }
}

#[test]
fn graph_training_is_reproducible() {
    let d = cycles_vs_stars(15, 10, 20, 1).unwrap();
    let cfg = GraphTrainConfig { epochs: 15, ..quick_graph(Readout::Spectrum, 0..2) };
    let (a, ra) = train_graph_classifier(&d, &cfg).unwrap();
    let (b, rb) = train_graph_classifier(&d, &cfg).unwrap();
    assert_eq!(a.per_seed, b.per_seed);
    assert_eq!(ra, rb);
    let empty = GraphDataset { samples: vec![], num_classes: 2 };
    assert!(train_graph_classifier(&empty, &cfg).is_err());
}

#[test]
fn sweep_rows() {
    let d = generate_sbm(&SbmConfig::three_block(GAUSS), 0).unwrap();
    let base = NodeTrainConfig { epochs: 20, seeds: vec![0], ..Default::default() };
    let one = sensitivity_sweep(&d, &[2.0], &[], &base).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!((one[0].parameter.as_str(), one[0].dilation, one[0].levels), ("dilation", 2.0, 2));
    assert!(one[0].error.is_none() && one[0].std == 0.0);

    let rows = sensitivity_sweep(&d, &[1.5, 2.0], &[1, 2], &base).unwrap();
    assert_eq!(rows.len(), 4);
    let has = |p: &str, dil: f64, lv: usize| rows.iter().any(|r| r.parameter == p && r.dilation == dil && r.levels == lv);
    assert!(has("dilation", 2.0, 2) && has("levels", 2.0, 2));
    assert!(has("levels", 2.0, 1));
    assert!(sensitivity_sweep(&d, &[], &[], &base).is_err());

    let bad = sensitivity_sweep(&d, &[1.0, 2.0], &[], &base).unwrap();
    assert!(bad[0].error.is_some() && bad[0].mean.is_nan());
    assert!(bad[1].error.is_none());
    assert!(default_dilations().contains(&2.0) && default_levels().contains(&2));
    assert_eq!(default_dilations().len(), 12);
    assert_eq!(default_levels(), (1..=8).collect::<Vec<_>>());
}

#[test]
fn bench_single_repetition() {
    let cfg = BenchConfig { sizes: vec![100, 200], repetitions: 1, features: 4, ..Default::default() };
    let rows = bench_transform(&cfg).unwrap();
    assert_eq!(rows.len(), 2);
    for (row, n) in rows.iter().zip([100, 200]) {
        assert_eq!((row.n, row.repetitions, row.levels), (n, 1, 2));
        assert_eq!(row.decompose_median_ms, row.decompose_mean_ms);
        assert_eq!(row.block_nnz.len(), 3);
        assert!(row.edges > 0);
    }
    assert!(bench_transform(&BenchConfig { sizes: vec![200, 100], ..cfg.clone() }).is_err());
    assert!(bench_transform(&BenchConfig { repetitions: 0, ..cfg.clone() }).is_err());
    assert!(bench_transform(&BenchConfig { sizes: vec![], ..cfg }).is_err());
}

#[test]
fn bench_skips_materialization_above_limit() {
    let cfg = BenchConfig { sizes: vec![300], repetitions: 1, features: 2, materialize_max_nodes: 100, ..Default::default() };
    let rows = bench_transform(&cfg).unwrap();
    assert!(rows[0].block_nnz.is_empty());
    assert!(rows[0].decompose_median_ms > 0.0);
}

#[test]
fn bench_scaling() {
    let cfg = BenchConfig { sizes: vec![1000, 4000], repetitions: 5, materialize_max_nodes: 0, ..Default::default() };
    let rows = bench_transform(&cfg).unwrap();
    let total = |r: &ufg::experiments::bench::BenchRow| r.decompose_median_ms + r.reconstruct_median_ms;
    assert!(total(&rows[1]) >= 0.9 * total(&rows[0]), "{rows:?}");

    let j1 = bench_transform(&BenchConfig { sizes: vec![4000], levels: 1, ..cfg.clone() }).unwrap();
    let j2 = bench_transform(&BenchConfig { sizes: vec![4000], levels: 2, ..cfg }).unwrap();
    let ratio = j2[0].decompose_median_ms / j1[0].decompose_median_ms;
    let model = 5.0 / 3.0;
    assert!(ratio >= model / 1.5 && ratio <= model * 1.5, "{ratio}");
}

#[test]
fn metrics_summary() {
    let rec = MetricsRecord::from_values("x", "f", vec![0, 1, 2], vec![0.8, 0.9, 1.0]);
    assert!(rec.min <= rec.mean && rec.mean <= rec.max);
    assert!((rec.std - (0.02f64 / 3.0).sqrt()).abs() < 1e-12);
    let one = MetricsRecord::from_values("x", "f", vec![3], vec![0.7]);
    assert_eq!((one.mean, one.std, one.min, one.max), (0.7, 0.0, 0.7, 0.7));
    let same = MetricsRecord::from_values("x", "f", vec![0, 1, 2], vec![0.1; 3]);
    assert_eq!((same.mean, same.std), (0.1, 0.0));
    assert!(mean_std(&[]).0.is_nan());
}

#[test]
fn config_defaults_and_echo() {
    let cfg = ExperimentConfig::from_json(r#"{"task": "train_node"}"#).unwrap();
    let ExperimentConfig::TrainNode { data, train, grid, perturbation, .. } = &cfg else { panic!("{cfg:?}") };
    assert_eq!(*data, NodeData::default());
    assert_eq!(*train, NodeTrainConfig::default());
    assert!(grid.is_empty() && perturbation.is_none());
    assert_eq!((train.lr, train.weight_decay, train.hidden, train.dropout, train.epochs), (0.01, 0.005, 32, 0.5, 200));
    let echo = cfg.resolved();
    assert!(echo.contains("\"weight_decay\": 0.005"));
    assert_eq!(ExperimentConfig::from_json(&echo).unwrap(), cfg);

    let text = r#"{"task": "train_node", "data": {"source": "sbm", "seed": 4},
        "perturbation": {"kind": "bernoulli_flip", "ratio": 0.5},
        "train": {"variant": "shrinkage", "sigma": 2.0, "seeds": [1, 2]},
        "grid": {"lr": [0.01, 0.005], "hidden": [16, 32, 64]}}"#;
    let cfg = ExperimentConfig::from_json(text).unwrap();
    let ExperimentConfig::TrainNode { train, grid, perturbation, .. } = &cfg else { panic!() };
    assert_eq!((train.variant, train.sigma, train.seeds.clone()), (ConvVariant::Shrinkage, 2.0, vec![1, 2]));
    assert_eq!(*perturbation, Some(PerturbationModel::BernoulliFlip { ratio: 0.5 }));
    let expanded = grid.expand(train);
    assert_eq!(expanded.len(), 6);
    assert!(expanded.iter().all(|c| c.sigma == 2.0 && c.seeds == vec![1, 2]));
    assert_eq!(HyperGrid::default().expand(train), vec![train.clone()]);

    let g = ExperimentConfig::from_json(r#"{"task": "train_graph", "train": {"readout": "spectrum"}}"#).unwrap();
    let ExperimentConfig::TrainGraph { data, train } = g else { panic!() };
    assert_eq!(train.readout, Readout::Spectrum);
    assert_eq!(train.patience, Some(20));
    assert_eq!(data, GraphData::default());

    let s = ExperimentConfig::from_json(r#"{"task": "sweep"}"#).unwrap();
    let ExperimentConfig::Sweep { dilations, levels, .. } = s else { panic!() };
    assert_eq!((dilations.len(), levels.len()), (12, 8));
}

#[test]
fn config_errors() {
    for text in [
        r#"{"task": "train_node", "train": {"epochs": 0}}"#,
        r#"{"task": "bench", "config": {"sizes": [2000, 1000]}}"#,
        r#"{"task": "train_graph", "train": {"epochs": 0}}"#,
        r#"{"task": "unknown"}"#,
        r#"{"task": "train_node""#,
        r#"{"task": "train_node", "train": {"variant": "tanh"}}"#,
    ] {
        assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
    }
    match ExperimentConfig::from_json("{\n\"task\": ") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn perturbed_training_runs() {
    let d = generate_sbm(&SbmConfig::three_block(FeatureModel::Binary { dim: 30, p_on: 0.3, p_off: 0.05 }), 0).unwrap();
    let spec = PerturbationSpec::new(PerturbationModel::BernoulliFlip { ratio: 1.0 }, 0);
    let (_, x) = perturb(&d.graph, &d.features, &spec).unwrap();
    let noisy = NodeDataset { features: x, ..d.clone() };
    let t = Instant::now();
    let (rec, _) = train_node_classifier(&noisy, &quick_node(ConvVariant::Shrinkage, 0..2)).unwrap();
    assert!(rec.mean > 0.4, "{}", rec.mean);
    assert!(t.elapsed().as_secs() < 120);
}
