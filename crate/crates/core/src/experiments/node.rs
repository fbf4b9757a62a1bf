//! Semi-supervised node classification with two framelet convolutions.

use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::data::{seeded_rng, NodeDataset};
use crate::experiments::metrics::{config_fingerprint, EpochMetrics, MetricsRecord, SeedFailure};
use crate::framelet::{operators_for_graph, DecompositionOperator, FrameletSystem, TransformMode, DEFAULT_CHEBYSHEV_DEGREE};
use crate::nn::{
    argmax_rows, dropout, init_params, softmax_cross_entropy, ufg_conv_backward, ufg_conv_forward, Activation, Adam,
    AdamConfig, ConvCache, ConvParams, Param,
};
use crate::shrinkage::{ThresholdConfig, ThresholdMode};

/// UFGConv-R (ReLU) or UFGConv-S (shrinkage).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvVariant {
    #[default]
    Relu,
    Shrinkage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NodeTrainConfig {
    pub variant: ConvVariant,
    pub sigma: f64,
    pub threshold_mode: ThresholdMode,
    pub dilation: f64,
    pub levels: usize,
    pub mode: TransformMode,
    pub chebyshev_degree: usize,
    pub hidden: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub epochs: usize,
    /// Stop after this many epochs without a better validation accuracy.
    pub patience: Option<usize>,
    pub seeds: Vec<u64>,
    /// Negative control: permute the labels before training.
    pub shuffle_labels: bool,
}

impl Default for NodeTrainConfig {
    fn default() -> Self {
        Self {
            variant: ConvVariant::Relu,
            sigma: 1.0,
            threshold_mode: ThresholdMode::EnergyScaled,
            dilation: 2.0,
            levels: 2,
            mode: TransformMode::Exact,
            chebyshev_degree: DEFAULT_CHEBYSHEV_DEGREE,
            hidden: 32,
            lr: 0.01,
            weight_decay: 0.005,
            dropout: 0.5,
            epochs: 200,
            patience: None,
            seeds: (0..10).collect(),
            shuffle_labels: false,
        }
    }
}

impl NodeTrainConfig {
    pub fn system(&self) -> FrameletSystem<f64> {
        FrameletSystem::haar(self.dilation, self.levels, self.mode).with_degree(self.chebyshev_degree)
    }

    pub fn label(&self) -> &'static str {
        match self.variant {
            ConvVariant::Relu => "UFGConv-R",
            ConvVariant::Shrinkage => "UFGConv-S",
        }
    }

    fn activations(&self) -> (Activation<f64>, Activation<f64>) {
        let shrink = Activation::Shrinkage(ThresholdConfig { sigma: self.sigma, mode: self.threshold_mode });
        match self.variant {
            ConvVariant::Relu => (Activation::Relu, Activation::None),
            ConvVariant::Shrinkage => (shrink.clone(), shrink),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.hidden == 0 || self.seeds.is_empty() {
            return Err(Error::InvalidParameter("epochs, hidden width and seed list must be nonempty".into()));
        }
        if !(self.lr > 0.0) || self.weight_decay < 0.0 {
            return Err(Error::InvalidParameter("learning rate must be positive, weight decay nonnegative".into()));
        }
        Ok(())
    }
}

/// Result of one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub test_accuracy: f64,
    pub compression_ratio: Option<f64>,
    pub log: Vec<EpochMetrics>,
}

struct Model {
    l1: ConvParams<f64>,
    l2: ConvParams<f64>,
}

struct Pass {
    logits: Array2<f64>,
    c1: ConvCache<f64>,
    mask: Array2<f64>,
    c2: ConvCache<f64>,
}

fn accuracy(logits: ArrayView2<'_, f64>, labels: &[usize], rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let pred = argmax_rows(logits);
    rows.iter().filter(|&&i| pred[i] == labels[i]).count() as f64 / rows.len() as f64
}

/// Trains one seed on a prepared operator.
pub fn train_node_seed(
    data: &NodeDataset,
    op: &DecompositionOperator<f64>,
    cfg: &NodeTrainConfig,
    seed: u64,
) -> Result<SeedRun> {
    cfg.validate()?;
    let mut rng = seeded_rng(seed);
    let mut labels = data.labels.clone();
    if cfg.shuffle_labels {
        labels.shuffle(&mut rng);
    }
    let rows = op.stacked_rows();
    let mut model = Model {
        l1: init_params(data.features.ncols(), cfg.hidden, rows, &mut rng),
        l2: init_params(cfg.hidden, data.num_classes, rows, &mut rng),
    };
    let (act1, act2) = cfg.activations();
    let mut adam = Adam::new(AdamConfig { lr: cfg.lr, weight_decay: cfg.weight_decay, ..AdamConfig::default() });
    let x = data.features.view();
    let splits = &data.splits;

    let forward = |model: &Model, training: bool, rng: &mut rand_chacha::ChaCha8Rng| -> Result<Pass> {
        let (h, c1) = ufg_conv_forward(&model.l1, op, x, &act1)?;
        let (h, mask) = dropout(h.view(), cfg.dropout, training, rng)?;
        let (logits, c2) = ufg_conv_forward(&model.l2, op, h.view(), &act2)?;
        Ok(Pass { logits, c1, mask, c2 })
    };

    let mut best = (f64::NEG_INFINITY, 0usize, 0.0f64, None);
    let mut log = Vec::new();
    let mut since_best = 0usize;
    for epoch in 1..=cfg.epochs {
        let pass = forward(&model, true, &mut rng)?;
        let (loss, dlogits) = softmax_cross_entropy(pass.logits.view(), &labels, &splits.train)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        let g2 = ufg_conv_backward(&model.l2, op, &pass.c2, dlogits.view())?;
        let dh = &g2.input * &pass.mask;
        let g1 = ufg_conv_backward(&model.l1, op, &pass.c1, dh.view())?;
        log.push(EpochMetrics {
            seed,
            epoch,
            split: "train".into(),
            loss,
            accuracy: accuracy(pass.logits.view(), &labels, &splits.train),
            compression_ratio: pass.c2.compression_ratio(),
        });
        {
            let (g1w, g1t, g1b) = (g1.weight.into_dyn(), g1.theta.into_dyn(), g1.bias.into_dyn());
            let (g2w, g2t, g2b) = (g2.weight.into_dyn(), g2.theta.into_dyn(), g2.bias.into_dyn());
            let Model { l1, l2 } = &mut model;
            adam.step(&mut [
                Param { value: l1.weight.view_mut().into_dyn(), grad: g1w.view(), decay: true },
                Param { value: l1.theta.view_mut().into_dyn(), grad: g1t.view(), decay: false },
                Param { value: l1.bias.view_mut().into_dyn(), grad: g1b.view(), decay: false },
                Param { value: l2.weight.view_mut().into_dyn(), grad: g2w.view(), decay: true },
                Param { value: l2.theta.view_mut().into_dyn(), grad: g2t.view(), decay: false },
                Param { value: l2.bias.view_mut().into_dyn(), grad: g2b.view(), decay: false },
            ])?;
        }

        let eval = forward(&model, false, &mut rng)?;
        if eval.logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        let ratio = eval.c2.compression_ratio();
        let val_acc = accuracy(eval.logits.view(), &labels, &splits.val);
        let val_loss = if splits.val.is_empty() {
            0.0
        } else {
            softmax_cross_entropy(eval.logits.view(), &labels, &splits.val)?.0
        };
        log.push(EpochMetrics { seed, epoch, split: "val".into(), loss: val_loss, accuracy: val_acc, compression_ratio: ratio });
        if val_acc > best.0 {
            let test_acc = accuracy(eval.logits.view(), &labels, &splits.test);
            best = (val_acc, epoch, test_acc, ratio);
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience.is_some_and(|p| since_best >= p) {
                break;
            }
        }
    }
    Ok(SeedRun {
        seed,
        best_epoch: best.1,
        best_val_accuracy: best.0,
        test_accuracy: best.2,
        compression_ratio: best.3,
        log,
    })
}

/// Trains every configured seed. A diverging seed is recorded as a failure.
pub fn train_node_classifier(data: &NodeDataset, cfg: &NodeTrainConfig) -> Result<(MetricsRecord, Vec<SeedRun>)> {
    cfg.validate()?;
    let start = Instant::now();
    let op = operators_for_graph(&cfg.system(), &data.graph)?;
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &seed in &cfg.seeds {
        match train_node_seed(data, &op, cfg, seed) {
            Ok(run) => runs.push(run),
            Err(e @ Error::Diverged { .. }) => failures.push(SeedFailure { seed, reason: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    if runs.is_empty() {
        return Err(Error::Diverged { epoch: 0 });
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
