//! Graph classification: two GCN layers, a readout and a two-layer MLP.

use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::data::{seeded_rng, GraphDataset};
use crate::experiments::metrics::{config_fingerprint, EpochMetrics, MetricsRecord, SeedFailure};
use crate::framelet::{operators_for_graph, DecompositionOperator, FrameletSystem, TransformMode, DEFAULT_CHEBYSHEV_DEGREE};
use crate::nn::pool::{mean_pool_backward, PoolCache};
use crate::nn::{
    argmax_rows, gcn_backward, gcn_forward, gcn_propagation, mean_pool, softmax_cross_entropy, ufg_pool,
    ufg_pool_backward, Adam, AdamConfig, GcnParams, Mlp, Param, PoolMode,
};
use crate::sparse::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    #[default]
    Sum,
    Spectrum,
    /// Mean of node embeddings (baseline).
    Mean,
}

impl Readout {
    pub fn label(self) -> &'static str {
        match self {
            Readout::Sum => "UFGPool-Sum",
            Readout::Spectrum => "UFGPool-Spectrum",
            Readout::Mean => "MeanPool",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphTrainConfig {
    pub readout: Readout,
    pub dilation: f64,
    pub levels: usize,
    pub mode: TransformMode,
    pub chebyshev_degree: usize,
    pub hidden: usize,
    pub mlp_hidden: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub patience: Option<usize>,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
}

impl Default for GraphTrainConfig {
    fn default() -> Self {
        Self {
            readout: Readout::Sum,
            dilation: 2.0,
            levels: 2,
            mode: TransformMode::Exact,
            chebyshev_degree: DEFAULT_CHEBYSHEV_DEGREE,
            hidden: 16,
            mlp_hidden: 32,
            lr: 0.01,
            weight_decay: 0.0005,
            epochs: 200,
            patience: Some(20),
            batch_size: 32,
            seeds: (0..10).collect(),
        }
    }
}

impl GraphTrainConfig {
    pub fn system(&self) -> FrameletSystem<f64> {
        FrameletSystem::haar(self.dilation, self.levels, self.mode).with_degree(self.chebyshev_degree)
    }

    fn pooled_width(&self) -> usize {
        match self.readout {
            Readout::Mean => self.hidden,
            _ => self.hidden * self.system().num_blocks(),
        }
    }
}

/// Per-graph precomputation shared by all seeds.
struct Prepared {
    a_hat: SparseMatrix<f64>,
    op: Option<DecompositionOperator<f64>>,
}

struct Model {
    g1: GcnParams<f64>,
    g2: GcnParams<f64>,
    mlp: Mlp<f64>,
}

struct Grads {
    g1w: Array2<f64>,
    g1b: Array1<f64>,
    g2w: Array2<f64>,
    g2b: Array1<f64>,
}

enum ReadoutCache {
    Framelet(PoolCache<f64>),
    Mean(usize),
}

/// 80/10/10 split of graph indices.
pub fn graph_split(count: usize, seed: u64) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..count).collect();
    idx.shuffle(&mut seeded_rng(seed));
    let train = (0.8 * count as f64).round() as usize;
    let val = (0.1 * count as f64).round() as usize;
    let test = idx.split_off((train + val).min(count));
    let val_set = idx.split_off(train.min(idx.len()));
    (idx, val_set, test)
}

fn pool_mode(readout: Readout) -> PoolMode {
    match readout {
        Readout::Spectrum => PoolMode::Spectrum,
        _ => PoolMode::Sum,
    }
}

fn embed(
    model: &Model,
    data: &GraphDataset,
    prep: &[Prepared],
    cfg: &GraphTrainConfig,
    batch: &[usize],
) -> Result<(Array2<f64>, Vec<(crate::nn::gcn::GcnCache<f64>, crate::nn::gcn::GcnCache<f64>, ReadoutCache)>)> {
    let mut pooled = Array2::zeros((batch.len(), cfg.pooled_width()));
    let mut caches = Vec::with_capacity(batch.len());
    for (row, &g) in batch.iter().enumerate() {
        let p = &prep[g];
        let (h1, c1) = gcn_forward(&model.g1, &p.a_hat, data.samples[g].features.view(), true)?;
        let (h2, c2) = gcn_forward(&model.g2, &p.a_hat, h1.view(), true)?;
        let (v, rc) = match (&p.op, cfg.readout) {
            (_, Readout::Mean) => (mean_pool(h2.view()), ReadoutCache::Mean(h2.nrows())),
            (Some(op), mode) => {
                let (v, pc) = ufg_pool(op, h2.view(), pool_mode(mode))?;
                (v, ReadoutCache::Framelet(pc))
            }
            (None, _) => unreachable!("framelet readout without operator"),
        };
        pooled.row_mut(row).assign(&v);
        caches.push((c1, c2, rc));
    }
    Ok((pooled, caches))
}

fn evaluate(
    model: &Model,
    data: &GraphDataset,
    prep: &[Prepared],
    cfg: &GraphTrainConfig,
    set: &[usize],
) -> Result<(f64, f64)> {
    if set.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (pooled, _) = embed(model, data, prep, cfg, set)?;
    let (logits, _) = model.mlp.forward(pooled.view())?;
    let labels: Vec<usize> = set.iter().map(|&g| data.samples[g].label).collect();
    let rows: Vec<usize> = (0..set.len()).collect();
    let (loss, _) = softmax_cross_entropy(logits.view(), &labels, &rows)?;
    let pred = argmax_rows(logits.view());
    let acc = pred.iter().zip(&labels).filter(|(p, l)| p == l).count() as f64 / set.len() as f64;
    Ok((loss, acc))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphSeedRun {
    pub seed: u64,
    pub best_epoch: usize,
    pub test_accuracy: f64,
    pub test_loss: f64,
    pub log: Vec<EpochMetrics>,
}

fn prepare(data: &GraphDataset, cfg: &GraphTrainConfig) -> Result<Vec<Prepared>> {
    let system = cfg.system();
    data.samples
        .iter()
        .map(|s| {
            let op = match cfg.readout {
                Readout::Mean => None,
                _ => Some(operators_for_graph(&system, &s.graph)?),
            };
            Ok(Prepared { a_hat: gcn_propagation(&s.graph)?, op })
        })
        .collect()
}

fn train_seed(data: &GraphDataset, prep: &[Prepared], cfg: &GraphTrainConfig, seed: u64) -> Result<GraphSeedRun> {
    let in_dim = data.samples.first().map(|s| s.features.ncols()).unwrap_or(0);
    let mut rng = seeded_rng(seed);
    let mut model = Model {
        g1: GcnParams::init(in_dim, cfg.hidden, &mut rng),
        g2: GcnParams::init(cfg.hidden, cfg.hidden, &mut rng),
        mlp: Mlp::init(cfg.pooled_width(), cfg.mlp_hidden, data.num_classes, &mut rng),
    };
    let (mut train, val, test) = graph_split(data.samples.len(), seed);
    if train.is_empty() {
        return Err(Error::InvalidParameter("no training graphs".into()));
    }
    let mut adam = Adam::new(AdamConfig { lr: cfg.lr, weight_decay: cfg.weight_decay, ..AdamConfig::default() });
    let mut best: Option<(f64, f64, Model, usize)> = None;
    let mut since_best = 0usize;
    let mut log = Vec::new();
    for epoch in 1..=cfg.epochs {
        train.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut correct = 0usize;
        for batch in train.chunks(cfg.batch_size.max(1)) {
            let (pooled, caches) = embed(&model, data, prep, cfg, batch)?;
            let (logits, mc) = model.mlp.forward(pooled.view())?;
            let labels: Vec<usize> = batch.iter().map(|&g| data.samples[g].label).collect();
            let rows: Vec<usize> = (0..batch.len()).collect();
            let (loss, dlogits) = softmax_cross_entropy(logits.view(), &labels, &rows)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            epoch_loss += loss * batch.len() as f64;
            correct += argmax_rows(logits.view()).iter().zip(&labels).filter(|(p, l)| p == l).count();
            let mg = model.mlp.backward(&mc, dlogits.view());
            let mut grads = Grads {
                g1w: Array2::zeros(model.g1.weight.dim()),
                g1b: Array1::zeros(model.g1.bias.len()),
                g2w: Array2::zeros(model.g2.weight.dim()),
                g2b: Array1::zeros(model.g2.bias.len()),
            };
            for (row, (&g, (c1, c2, rc))) in batch.iter().zip(&caches).enumerate() {
                let p = &prep[g];
                let dv = mg.input.row(row);
                let dh2 = match rc {
                    ReadoutCache::Mean(n) => mean_pool_backward(*n, dv),
                    ReadoutCache::Framelet(pc) => {
                        ufg_pool_backward(p.op.as_ref().expect("operator"), pc, dv, pool_mode(cfg.readout))?
                    }
                };
                let b2 = gcn_backward(&model.g2, &p.a_hat, c2, dh2.view())?;
                let b1 = gcn_backward(&model.g1, &p.a_hat, c1, b2.input.view())?;
                grads.g2w += &b2.weight;
                grads.g2b += &b2.bias;
                grads.g1w += &b1.weight;
                grads.g1b += &b1.bias;
            }
            let dyn_grads = [
                grads.g1w.into_dyn(),
                grads.g1b.into_dyn(),
                grads.g2w.into_dyn(),
                grads.g2b.into_dyn(),
                mg.w1.into_dyn(),
                mg.b1.into_dyn(),
                mg.w2.into_dyn(),
                mg.b2.into_dyn(),
            ];
            let Model { g1, g2, mlp } = &mut model;
            adam.step(&mut [
                Param { value: g1.weight.view_mut().into_dyn(), grad: dyn_grads[0].view(), decay: true },
                Param { value: g1.bias.view_mut().into_dyn(), grad: dyn_grads[1].view(), decay: false },
                Param { value: g2.weight.view_mut().into_dyn(), grad: dyn_grads[2].view(), decay: true },
                Param { value: g2.bias.view_mut().into_dyn(), grad: dyn_grads[3].view(), decay: false },
                Param { value: mlp.w1.view_mut().into_dyn(), grad: dyn_grads[4].view(), decay: true },
                Param { value: mlp.b1.view_mut().into_dyn(), grad: dyn_grads[5].view(), decay: false },
                Param { value: mlp.w2.view_mut().into_dyn(), grad: dyn_grads[6].view(), decay: true },
                Param { value: mlp.b2.view_mut().into_dyn(), grad: dyn_grads[7].view(), decay: false },
            ])?;
        }
        let train_loss = epoch_loss / train.len() as f64;
        let (val_loss, val_acc) = evaluate(&model, data, prep, cfg, &val)?;
        log.push(EpochMetrics { seed, epoch, split: "train".into(), loss: train_loss, accuracy: correct as f64 / train.len() as f64, compression_ratio: None });
        log.push(EpochMetrics { seed, epoch, split: "val".into(), loss: val_loss, accuracy: val_acc, compression_ratio: None });
        let improved = match &best {
            None => true,
            Some((acc, loss, _, _)) => val_acc > *acc || (val_acc == *acc && val_loss < *loss),
        };
        if improved {
            let snapshot = Model { g1: model.g1.clone(), g2: model.g2.clone(), mlp: model.mlp.clone() };
            best = Some((val_acc, val_loss, snapshot, epoch));
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience.is_some_and(|p| since_best >= p) {
                break;
            }
        }
    }
    let (_, _, chosen, best_epoch) = best.expect("at least one epoch");
    let (test_loss, test_accuracy) = evaluate(&chosen, data, prep, cfg, &test)?;
    log.push(EpochMetrics { seed, epoch: best_epoch, split: "test".into(), loss: test_loss, accuracy: test_accuracy, compression_ratio: None });
    Ok(GraphSeedRun { seed, best_epoch, test_accuracy, test_loss, log })
}

pub fn train_graph_classifier(data: &GraphDataset, cfg: &GraphTrainConfig) -> Result<(MetricsRecord, Vec<GraphSeedRun>)> {
    if cfg.epochs == 0 || cfg.seeds.is_empty() || data.samples.is_empty() {
        return Err(Error::InvalidParameter("need epochs, seeds and graphs".into()));
    }
    let start = Instant::now();
    let prep = prepare(data, cfg)?;
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &seed in &cfg.seeds {
        match train_seed(data, &prep, cfg, seed) {
            Ok(r) => runs.push(r),
            Err(e @ Error::Diverged { .. }) => failures.push(SeedFailure { seed, reason: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    if runs.is_empty() {
        return Err(Error::Diverged { epoch: 0 });
    }
    let mut record = MetricsRecord::from_values(
        cfg.readout.label(),
        &config_fingerprint(cfg),
        runs.iter().map(|r| r.seed).collect(),
        runs.iter().map(|r| r.test_accuracy).collect(),
    );
    record.failures = failures;
    record.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok((record, runs))
}

/// Test accuracy of always predicting the most frequent training class.
pub fn majority_baseline(data: &GraphDataset, seed: u64) -> f64 {
    let (train, _, test) = graph_split(data.samples.len(), seed);
    let mut counts = vec![0usize; data.num_classes.max(1)];
    for &g in &train {
        counts[data.samples[g].label] += 1;
    }
    let majority = (0..counts.len()).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).unwrap_or(0);
    if test.is_empty() {
        return 0.0;
    }
    test.iter().filter(|&&g| data.samples[g].label == majority).count() as f64 / test.len() as f64
}

