use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use ufg::experiments::bench::{bench_transform, BenchConfig, BenchRow};
use ufg::experiments::config::{perturb_dataset, ExperimentConfig, GraphData, NodeData};
use ufg::experiments::data::NodeDataset;
use ufg::experiments::denoise::denoise_signal;
use ufg::experiments::graph_cls::{majority_baseline, train_graph_classifier, GraphTrainConfig, Readout};
use ufg::experiments::metrics::{config_fingerprint, EpochMetrics, MetricsRecord, SeedFailure};
use ufg::experiments::node::{train_node_classifier, ConvVariant, NodeTrainConfig, SeedRun};
use ufg::experiments::perturb::{perturb, PerturbationModel, PerturbationSpec};
use ufg::experiments::sweep::sensitivity_sweep;
use ufg::framelet::Provenance;
use ufg::graph::normalized_spectral_bound;
use ufg::io::plot::{bench_csv, robustness_csv, sweep_csv, tradeoff_csv, RobustnessPoint, TradeoffPoint};
use ufg::io::{binary, text};
use ufg::nn::{ufg_pool, PoolMode};
use ufg::verify::{relative_error, run_verify, Status, VerifyConfig};
use ufg::{
    decompose, normalized_laplacian, operators_for_graph, reconstruct, CoefficientStack, DecompositionOperator, Error,
    FastFrameletTransform, FrameletSystem, Graph, TransformMode,
};

use crate::args::*;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    VerifyFailed(usize),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Settings read from `UFG_THREADS` and `UFG_DETERMINISTIC`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Runtime {
    /// Worker threads for independent seeds.
    pub threads: usize,
    pub deterministic: bool,
}

impl Runtime {
    pub fn from_env() -> CliResult<Self> {
        let threads = match std::env::var("UFG_THREADS") {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| CliError::Usage(format!("UFG_THREADS must be a positive integer, got `{v}`")))?,
            Err(_) => 1,
        };
        let deterministic = match std::env::var("UFG_DETERMINISTIC") {
            Ok(v) => match v.trim().to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "on" => true,
                "0" | "false" | "no" | "off" | "" => false,
                _ => return Err(CliError::Usage(format!("UFG_DETERMINISTIC must be a boolean, got `{v}`"))),
            },
            Err(_) => false,
        };
        Ok(Self { threads: if deterministic { 1 } else { threads }, deterministic })
    }
}

pub fn run(cmd: Command, rt: Runtime) -> CliResult {
    match cmd {
        Command::Transform(a) => transform(a),
        Command::Reconstruct(a) => reconstruct_cmd(a),
        Command::Denoise(a) => denoise(a),
        Command::Pool(a) => pool(a),
        Command::TrainNode(a) => train_node(a, rt),
        Command::TrainGraph(a) => train_graph(a, rt),
        Command::Perturb(a) => perturb_cmd(a),
        Command::Sweep(a) => sweep(a, rt),
        Command::Bench(a) => bench(a, rt),
        Command::Verify(a) => verify(a),
    }
}

fn require_file(path: &Path) -> CliResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("input file {} does not exist", path.display())))
    }
}

fn require_parent(path: &Path) -> CliResult {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => {
            Err(CliError::Usage(format!("output directory {} does not exist", p.display())))
        }
        _ => Ok(()),
    }
}

fn mode(m: ModeArg) -> TransformMode {
    match m {
        ModeArg::Exact => TransformMode::Exact,
        ModeArg::Chebyshev => TransformMode::Chebyshev,
    }
}

fn system(s: &SystemArgs) -> FrameletSystem<f64> {
    FrameletSystem::haar(s.dilation, s.levels, mode(s.mode)).with_degree(s.degree)
}

fn load_signal(graph: &Graph<f64>, path: &Path) -> CliResult<Array2<f64>> {
    let x = text::read_matrix(path)?;
    if x.nrows() != graph.num_nodes() {
        return Err(CliError::Runtime(format!(
            "{} has {} rows but the graph has {} nodes",
            path.display(),
            x.nrows(),
            graph.num_nodes()
        )));
    }
    Ok(x)
}

/// Tolerance printed for round trips.
fn round_trip_tolerance(m: TransformMode) -> f64 {
    match m {
        TransformMode::Exact => 1e-10,
        TransformMode::Chebyshev => 1e-6,
    }
}

/// Materialized operators in exact mode; the matrix-free transform in Chebyshev mode.
enum Transformer {
    Materialized(DecompositionOperator<f64>),
    MatrixFree(FastFrameletTransform<f64>),
}

impl Transformer {
    fn build(system: &FrameletSystem<f64>, graph: &Graph<f64>) -> CliResult<Self> {
        Ok(match system.mode {
            TransformMode::Exact => Transformer::Materialized(operators_for_graph(system, graph)?),
            TransformMode::Chebyshev => {
                let l = normalized_laplacian(graph);
                let bound = normalized_spectral_bound(&l)?;
                Transformer::MatrixFree(FastFrameletTransform::new(system, &l, bound)?)
            }
        })
    }

    fn provenance(&self) -> &Provenance<f64> {
        match self {
            Transformer::Materialized(op) => &op.provenance,
            Transformer::MatrixFree(t) => &t.provenance,
        }
    }

    fn decompose(&self, x: ArrayView2<'_, f64>) -> CliResult<CoefficientStack<f64>> {
        Ok(match self {
            Transformer::Materialized(op) => decompose(op, x)?,
            Transformer::MatrixFree(t) => t.decompose(x)?,
        })
    }

    fn reconstruct(&self, c: &CoefficientStack<f64>) -> CliResult<Array2<f64>> {
        Ok(match self {
            Transformer::Materialized(op) => reconstruct(op, c)?,
            Transformer::MatrixFree(t) => t.reconstruct(c)?,
        })
    }
}

/// Transform settings stored next to a coefficient file.
#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    provenance: Provenance<f64>,
}

fn sidecar_path(coeffs: &Path) -> PathBuf {
    let mut s = coeffs.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn transform(a: TransformArgs) -> CliResult {
    require_file(&a.graph)?;
    require_file(&a.signal)?;
    require_parent(&a.out)?;
    if let Some(csv) = &a.csv {
        require_parent(csv)?;
    }
    let graph = text::read_graph(&a.graph)?;
    let x = load_signal(&graph, &a.signal)?;
    let t = Transformer::build(&system(&a.system), &graph)?;
    let c = t.decompose(x.view())?;
    binary::write_coefficients(&a.out, &c)?;
    let sidecar = Sidecar { provenance: t.provenance().clone() };
    fs::write(sidecar_path(&a.out), serde_json::to_string_pretty(&sidecar)?)?;
    if let Some(csv) = &a.csv {
        fs::write(csv, binary::coefficients_csv(&c))?;
    }
    println!(
        "wrote {} blocks of {}x{} coefficients to {} (K = {})",
        c.block_ids().len(),
        c.num_nodes(),
        c.num_features(),
        a.out.display(),
        t.provenance().k
    );
    Ok(())
}

fn reconstruct_cmd(a: ReconstructArgs) -> CliResult {
    require_file(&a.graph)?;
    require_file(&a.coefficients)?;
    require_parent(&a.out)?;
    if let Some(r) = &a.reference {
        require_file(r)?;
    }
    let graph = text::read_graph(&a.graph)?;
    let c = binary::read_coefficients(&a.coefficients)?;
    if c.num_nodes() != graph.num_nodes() {
        return Err(CliError::Runtime(format!(
            "coefficients cover {} nodes, graph has {}",
            c.num_nodes(),
            graph.num_nodes()
        )));
    }
    let stored = match fs::read_to_string(sidecar_path(&a.coefficients)) {
        Ok(s) => Some(serde_json::from_str::<Sidecar>(&s)?.provenance),
        Err(_) => None,
    };
    let levels = c.block_ids().iter().map(|b| b.j).max().unwrap_or(1);
    let m = a.mode.map(mode).or(stored.as_ref().map(|p| p.mode)).unwrap_or(TransformMode::Exact);
    let dilation = a.dilation.or(stored.as_ref().map(|p| p.dilation)).unwrap_or(2.0);
    let degree = a.degree.or(stored.as_ref().map(|p| p.chebyshev_degree)).unwrap_or(16);
    let system = FrameletSystem::haar(dilation, levels, m).with_degree(degree);
    let t = Transformer::build(&system, &graph)?;
    let x = t.reconstruct(&c)?;
    text::write_matrix(&a.out, &x)?;
    println!("wrote {}x{} signal to {}", x.nrows(), x.ncols(), a.out.display());
    if let Some(r) = &a.reference {
        let reference = load_signal(&graph, r)?;
        if reference.dim() != x.dim() {
            return Err(CliError::Runtime("reference signal differs in shape".into()));
        }
        let err = relative_error(x.view(), reference.view());
        let tol = round_trip_tolerance(m);
        println!("relative error {err:.3e} (tolerance {tol:.0e})");
        if !(err <= tol) {
            return Err(CliError::Runtime(format!("round-trip error {err:.3e} exceeds {tol:.0e}")));
        }
    }
    Ok(())
}

fn denoise(a: DenoiseArgs) -> CliResult {
    require_file(&a.graph)?;
    require_file(&a.signal)?;
    if let Some(t) = &a.truth {
        require_file(t)?;
    }
    require_parent(&a.out)?;
    let graph = text::read_graph(&a.graph)?;
    let x = load_signal(&graph, &a.signal)?;
    let truth = a.truth.as_deref().map(|p| load_signal(&graph, p)).transpose()?;
    let op = operators_for_graph(&system(&a.system), &graph)?;
    let report = denoise_signal(&op, x.view(), a.sigma, truth.as_ref().map(|t| t.view()))?;
    text::write_matrix(&a.out, &report.denoised)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn pool(a: PoolArgs) -> CliResult {
    require_file(&a.graph)?;
    require_file(&a.signal)?;
    require_parent(&a.out)?;
    let graph = text::read_graph(&a.graph)?;
    let x = load_signal(&graph, &a.signal)?;
    let op = operators_for_graph(&system(&a.system), &graph)?;
    let pm = match a.pool {
        PoolArg::Sum => PoolMode::Sum,
        PoolArg::Spectrum => PoolMode::Spectrum,
    };
    let (pooled, _) = ufg_pool(&op, x.view(), pm)?;
    let row = pooled.insert_axis(Axis(0));
    text::write_matrix(&a.out, &row)?;
    println!("wrote {} pooled values to {}", row.ncols(), a.out.display());
    Ok(())
}

fn perturb_cmd(a: PerturbArgs) -> CliResult {
    require_file(&a.graph)?;
    require_file(&a.features)?;
    require_parent(&a.out_graph)?;
    require_parent(&a.out_features)?;
    let graph = text::read_graph(&a.graph)?;
    let x = load_signal(&graph, &a.features)?;
    let spec = PerturbationSpec::new(noise_model(a.model, a.amount), a.seed);
    let (g, f) = perturb(&graph, &x, &spec)?;
    text::write_graph(&a.out_graph, &g)?;
    text::write_matrix(&a.out_features, &f)?;
    println!("{} edges -> {}; wrote {} and {}", graph.num_edges(), g.num_edges(), a.out_graph.display(), a.out_features.display());
    Ok(())
}

fn noise_model(m: NoiseArg, amount: f64) -> PerturbationModel {
    match m {
        NoiseArg::Bernoulli => PerturbationModel::BernoulliFlip { ratio: amount },
        NoiseArg::Gaussian => PerturbationModel::Gaussian { sigma: amount },
        NoiseArg::EdgeRatio => PerturbationModel::EdgeRatio { ratio: amount },
    }
}

fn verify(a: VerifyArgs) -> CliResult {
    let cfg = VerifyConfig {
        mode: mode(a.mode),
        n: a.n,
        seed: a.seed,
        dilation: a.dilation,
        levels: a.levels,
        chebyshev_degree: a.degree,
        edge_probability: None,
    };
    let report = run_verify(&cfg)?;
    for c in &report.checks {
        println!("{c}");
    }
    let count = |s: Status| report.checks.iter().filter(|c| c.status == s).count();
    let failed = count(Status::Fail);
    println!("{} passed, {failed} failed, {} skipped", count(Status::Pass), count(Status::Skip));
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(())
}

// ---- experiments ----

fn load_experiment(path: Option<&Path>) -> CliResult<Option<ExperimentConfig>> {
    let Some(path) = path else { return Ok(None) };
    require_file(path)?;
    let text = fs::read_to_string(path)?;
    ExperimentConfig::from_json(&text).map(Some).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn wrong_task(expected: &str) -> CliError {
    CliError::Usage(format!("configuration file does not describe a `{expected}` task"))
}

fn seeds(current: &[u64], seed: Option<u64>, runs: Option<usize>) -> Vec<u64> {
    let start = seed.unwrap_or_else(|| current.first().copied().unwrap_or(0));
    let count = runs.unwrap_or(current.len().max(1));
    if seed.is_none() && runs.is_none() {
        return current.to_vec();
    }
    (start..start + count as u64).collect()
}

fn prepare_out_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))
}

#[derive(Serialize)]
struct Echo<'a> {
    experiment: &'a ExperimentConfig,
    runtime: Runtime,
}

fn write_resolved(dir: &Path, cfg: &ExperimentConfig, rt: Runtime) -> CliResult {
    let echo = serde_json::to_string_pretty(&Echo { experiment: cfg, runtime: rt })?;
    fs::write(dir.join("config.json"), &echo)?;
    Ok(())
}

/// Runs `job` on chunks of `seeds` across worker threads; results come back in seed order.
fn parallel_seeds<R: Send>(
    seeds: &[u64],
    threads: usize,
    job: impl Fn(Vec<u64>) -> ufg::Result<R> + Sync,
) -> Vec<(Vec<u64>, ufg::Result<R>)> {
    let workers = threads.clamp(1, seeds.len().max(1));
    if workers == 1 {
        return vec![(seeds.to_vec(), job(seeds.to_vec()))];
    }
    let chunks: Vec<Vec<u64>> = seeds.chunks(seeds.len().div_ceil(workers)).map(<[u64]>::to_vec).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = chunks.iter().map(|c| (c.clone(), s.spawn(|| job(c.clone())))).collect();
        handles.into_iter().map(|(c, h)| (c, h.join().expect("worker panicked"))).collect()
    })
}

fn node_runs(
    data: &NodeDataset,
    cfg: &NodeTrainConfig,
    rt: Runtime,
) -> CliResult<(MetricsRecord, Vec<SeedRun>)> {
    let start = Instant::now();
    let parts = parallel_seeds(&cfg.seeds, rt.threads, |chunk| {
        train_node_classifier(data, &NodeTrainConfig { seeds: chunk, ..cfg.clone() })
    });
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (chunk, part) in parts {
        match part {
            Ok((rec, r)) => {
                runs.extend(r);
                failures.extend(rec.failures);
            }
            Err(e @ Error::Diverged { .. }) => {
                failures.extend(chunk.into_iter().map(|seed| SeedFailure { seed, reason: e.to_string() }))
            }
            Err(e) => return Err(e.into()),
        }
    }
    if runs.is_empty() {
        return Err(CliError::Runtime("every seed diverged".into()));
    }
    let mut record = MetricsRecord::from_values(
        cfg.label(),
        &config_fingerprint(cfg),
        runs.iter().map(|r| r.seed).collect(),
        runs.iter().map(|r| r.test_accuracy).collect(),
    );
    let ratios: Vec<f64> = runs.iter().filter_map(|r| r.compression_ratio).collect();
    if !ratios.is_empty() {
        record.compression_ratio = Some(ratios.iter().sum::<f64>() / ratios.len() as f64);
    }
    record.failures = failures;
    record.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok((record, runs))
}

fn print_record(r: &MetricsRecord) {
    let ratio = r.compression_ratio.map(|c| format!(", compression ratio {c:.3}")).unwrap_or_default();
    println!(
        "{}: test accuracy {:.4} ± {:.4} over {} seeds{ratio} ({} failed, {:.1}s)",
        r.label,
        r.mean,
        r.std,
        r.per_seed.len(),
        r.failures.len(),
        r.wall_clock_secs
    );
}

fn write_metrics(dir: &Path, records: &[MetricsRecord], epochs: &[EpochMetrics]) -> CliResult {
    text::write_json_lines(&dir.join("metrics.jsonl"), records)?;
    text::write_json_lines(&dir.join("epochs.jsonl"), epochs)?;
    Ok(())
}

fn train_node(a: TrainNodeArgs, rt: Runtime) -> CliResult {
    if let Some(d) = &a.data_dir {
        if !d.is_dir() {
            return Err(CliError::Usage(format!("dataset directory {} does not exist", d.display())));
        }
    }
    let mut cfg = load_experiment(a.common.config.as_deref())?.unwrap_or(ExperimentConfig::TrainNode {
        data: NodeData::default(),
        perturbation: None,
        perturbation_seed: 0,
        train: NodeTrainConfig::default(),
        grid: Default::default(),
    });
    let ExperimentConfig::TrainNode { data, train, .. } = &mut cfg else {
        return Err(wrong_task("train_node"));
    };
    if let Some(dir) = &a.data_dir {
        *data = NodeData::Citation { dir: dir.clone() };
    }
    if let (Some(s), NodeData::Sbm { seed, .. }) = (a.common.seed, &mut *data) {
        *seed = s;
    }
    train.seeds = seeds(&train.seeds, a.common.seed, a.common.runs);
    if let Some(e) = a.common.epochs {
        train.epochs = e;
    }
    if let Some(v) = a.variant {
        train.variant = match v {
            VariantArg::Relu => ConvVariant::Relu,
            VariantArg::Shrinkage => ConvVariant::Shrinkage,
        };
    }
    if let Some(s) = a.sigma {
        train.sigma = s;
    }
    cfg.validate()?;
    prepare_out_dir(&a.common.out_dir)?;
    write_resolved(&a.common.out_dir, &cfg, rt)?;
    let ExperimentConfig::TrainNode { data, perturbation, perturbation_seed, train, grid } = &cfg else {
        unreachable!()
    };

    let (dataset, warnings) = data.load()?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let dataset = perturb_dataset(&dataset, *perturbation, *perturbation_seed)?;
    let noisy: Vec<(f64, NodeDataset)> = a
        .noise_grid
        .iter()
        .map(|&ratio| Ok((ratio, perturb_dataset(&dataset, Some(noise_model(a.noise_model, ratio)), *perturbation_seed)?)))
        .collect::<CliResult<_>>()?;

    let mut records = Vec::new();
    let mut epochs = Vec::new();
    let chosen = if grid.is_empty() {
        train.clone()
    } else {
        let mut best: Option<(f64, NodeTrainConfig)> = None;
        for candidate in grid.expand(train) {
            let (rec, runs) = node_runs(&dataset, &candidate, rt)?;
            let val = runs.iter().map(|r| r.best_val_accuracy).sum::<f64>() / runs.len() as f64;
            println!("grid point lr={} wd={} dropout={} hidden={} sigma={}: validation {val:.4}", candidate.lr, candidate.weight_decay, candidate.dropout, candidate.hidden, candidate.sigma);
            records.push(rec);
            if best.as_ref().is_none_or(|(b, _)| val > *b) {
                best = Some((val, candidate));
            }
        }
        best.expect("grid has at least one point").1
    };
    let (record, runs) = node_runs(&dataset, &chosen, rt)?;
    print_record(&record);
    records.push(record);
    epochs.extend(runs.into_iter().flat_map(|r| r.log));

    if !a.sigma_grid.is_empty() {
        let mut points = Vec::new();
        for &sigma in &a.sigma_grid {
            let c = NodeTrainConfig { variant: ConvVariant::Shrinkage, sigma, ..chosen.clone() };
            let (rec, _) = node_runs(&dataset, &c, rt)?;
            print_record(&rec);
            points.push(TradeoffPoint {
                sigma,
                compression_ratio: rec.compression_ratio.unwrap_or(1.0),
                accuracy_mean: rec.mean,
                accuracy_std: rec.std,
            });
            records.push(rec);
        }
        fs::write(a.common.out_dir.join("tradeoff.csv"), tradeoff_csv(&points)?)?;
    }
    if !noisy.is_empty() {
        let mut points = Vec::new();
        for (ratio, noisy) in &noisy {
            let ratio = *ratio;
            for variant in [ConvVariant::Relu, ConvVariant::Shrinkage] {
                let c = NodeTrainConfig { variant, ..chosen.clone() };
                let (rec, _) = node_runs(noisy, &c, rt)?;
                println!("noise {ratio}:");
                print_record(&rec);
                points.push(RobustnessPoint { noise_ratio: ratio, model: rec.label.clone(), mean: rec.mean, std: rec.std });
                records.push(rec);
            }
        }
        fs::write(a.common.out_dir.join("robustness.csv"), robustness_csv(&points)?)?;
    }
    write_metrics(&a.common.out_dir, &records, &epochs)
}

fn train_graph(a: TrainGraphArgs, rt: Runtime) -> CliResult {
    let mut cfg = load_experiment(a.common.config.as_deref())?
        .unwrap_or(ExperimentConfig::TrainGraph { data: GraphData::default(), train: GraphTrainConfig::default() });
    let ExperimentConfig::TrainGraph { data, train } = &mut cfg else {
        return Err(wrong_task("train_graph"));
    };
    let (per, lo, hi, dseed) = match *data {
        GraphData::CyclesVsStars { per_class, min_size, max_size, seed }
        | GraphData::SbmFamily { per_class, min_size, max_size, seed } => (per_class, min_size, max_size, seed),
    };
    let per = a.per_class.unwrap_or(per);
    let dseed = a.common.seed.unwrap_or(dseed);
    let sbm = match a.task {
        Some(t) => t == GraphTaskArg::SbmFamily,
        None => matches!(data, GraphData::SbmFamily { .. }),
    };
    *data = if sbm {
        GraphData::SbmFamily { per_class: per, min_size: lo, max_size: hi, seed: dseed }
    } else {
        GraphData::CyclesVsStars { per_class: per, min_size: lo, max_size: hi, seed: dseed }
    };
    train.seeds = seeds(&train.seeds, a.common.seed, a.common.runs);
    if let Some(e) = a.common.epochs {
        train.epochs = e;
    }
    if let Some(r) = a.readout {
        train.readout = match r {
            ReadoutArg::Sum => Readout::Sum,
            ReadoutArg::Spectrum => Readout::Spectrum,
            ReadoutArg::Mean => Readout::Mean,
        };
    }
    cfg.validate()?;
    prepare_out_dir(&a.common.out_dir)?;
    write_resolved(&a.common.out_dir, &cfg, rt)?;
    let ExperimentConfig::TrainGraph { data, train } = &cfg else { unreachable!() };

    let dataset = data.load()?;
    let start = Instant::now();
    let parts = parallel_seeds(&train.seeds, rt.threads, |chunk| {
        train_graph_classifier(&dataset, &GraphTrainConfig { seeds: chunk, ..train.clone() })
    });
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (chunk, part) in parts {
        match part {
            Ok((rec, r)) => {
                runs.extend(r);
                failures.extend(rec.failures);
            }
            Err(e @ Error::Diverged { .. }) => {
                failures.extend(chunk.into_iter().map(|seed| SeedFailure { seed, reason: e.to_string() }))
            }
            Err(e) => return Err(e.into()),
        }
    }
    if runs.is_empty() {
        return Err(CliError::Runtime("every seed diverged".into()));
    }
    let mut record = MetricsRecord::from_values(
        train.readout.label(),
        &config_fingerprint(train),
        runs.iter().map(|r| r.seed).collect(),
        runs.iter().map(|r| r.test_accuracy).collect(),
    );
    record.failures = failures;
    record.wall_clock_secs = start.elapsed().as_secs_f64();
    print_record(&record);
    let baseline: Vec<f64> = train.seeds.iter().map(|&s| majority_baseline(&dataset, s)).collect();
    let baseline = MetricsRecord::from_values("majority-class", &config_fingerprint(train), train.seeds.clone(), baseline);
    print_record(&baseline);
    let epochs: Vec<EpochMetrics> = runs.into_iter().flat_map(|r| r.log).collect();
    write_metrics(&a.common.out_dir, &[record, baseline], &epochs)
}

fn sweep(a: SweepArgs, rt: Runtime) -> CliResult {
    let mut cfg = load_experiment(a.common.config.as_deref())?.unwrap_or(ExperimentConfig::Sweep {
        data: NodeData::default(),
        dilations: ufg::experiments::config::default_dilations(),
        levels: ufg::experiments::config::default_levels(),
        base: NodeTrainConfig::default(),
    });
    let ExperimentConfig::Sweep { data, dilations, levels, base } = &mut cfg else {
        return Err(wrong_task("sweep"));
    };
    if let Some(d) = a.dilations {
        *dilations = d;
    }
    if let Some(l) = a.levels {
        *levels = l;
    }
    if let (Some(s), NodeData::Sbm { seed, .. }) = (a.common.seed, &mut *data) {
        *seed = s;
    }
    base.seeds = seeds(&base.seeds, a.common.seed, a.common.runs);
    if let Some(e) = a.common.epochs {
        base.epochs = e;
    }
    cfg.validate()?;
    prepare_out_dir(&a.common.out_dir)?;
    write_resolved(&a.common.out_dir, &cfg, rt)?;
    let ExperimentConfig::Sweep { data, dilations, levels, base } = &cfg else { unreachable!() };
    let (dataset, warnings) = data.load()?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let rows = sensitivity_sweep(&dataset, dilations, levels, base)?;
    for r in &rows {
        match &r.error {
            Some(e) => println!("{} = {}: error: {e}", r.parameter, r.value),
            None => println!("{} = {}: {:.4} ± {:.4}", r.parameter, r.value, r.mean, r.std),
        }
    }
    fs::write(a.common.out_dir.join("sweep.csv"), sweep_csv(&rows)?)?;
    Ok(())
}

fn bench(a: BenchArgs, rt: Runtime) -> CliResult {
    let mut cfg = load_experiment(a.config.as_deref())?
        .unwrap_or(ExperimentConfig::Bench { config: BenchConfig::default() });
    let ExperimentConfig::Bench { config } = &mut cfg else {
        return Err(wrong_task("bench"));
    };
    if let Some(s) = a.sizes {
        config.sizes = s;
    }
    if let Some(r) = a.repetitions {
        config.repetitions = r;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    cfg.validate()?;
    prepare_out_dir(&a.out_dir)?;
    write_resolved(&a.out_dir, &cfg, rt)?;
    let ExperimentConfig::Bench { config } = &cfg else { unreachable!() };
    let levels = a.levels.unwrap_or_else(|| vec![config.levels]);
    let mut rows: Vec<BenchRow> = Vec::new();
    for &j in &levels {
        let part = bench_transform(&BenchConfig { levels: j, ..config.clone() })?;
        for r in &part {
            println!(
                "N={} J={} edges={} decompose {:.3} ms, reconstruct {:.3} ms, build {:.3} ms{}",
                r.n,
                r.levels,
                r.edges,
                r.decompose_median_ms,
                r.reconstruct_median_ms,
                r.build_median_ms,
                r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
            );
        }
        rows.extend(part);
    }
    if levels.len() >= 2 {
        let (j0, j1) = (levels[0], levels[levels.len() - 1]);
        for &n in &config.sizes {
            let find = |j| rows.iter().find(|r| r.n == n && r.levels == j).map(|r| r.decompose_median_ms);
            if let (Some(a), Some(b)) = (find(j0), find(j1)) {
                println!("N={n}: decompose time J={j1} / J={j0} = {:.2}", b / a);
            }
        }
    }
    fs::write(a.out_dir.join("bench.csv"), bench_csv(&rows)?)?;
    Ok(())
}
