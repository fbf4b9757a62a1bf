//! JSON experiment configuration.
//!
//! ```json
//! {"task": "train_node", "data": {"source": "sbm", "seed": 0}, "train": {"variant": "shrinkage"}}
//! ```
//!
//! Omitted fields take their defaults; [`ExperimentConfig::resolved`] echoes
//! the fully populated document.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::bench::BenchConfig;
use crate::experiments::citation::load_citation;
use crate::experiments::data::{
    cycles_vs_stars, generate_sbm, sbm_graph_family, FeatureModel, GraphDataset, NodeDataset, SbmConfig,
};
use crate::experiments::graph_cls::GraphTrainConfig;
use crate::experiments::node::NodeTrainConfig;
use crate::experiments::perturb::{perturb, PerturbationModel, PerturbationSpec};

/// Gaussian node features used by the default synthetic node task.
pub const DEFAULT_FEATURES: FeatureModel = FeatureModel::Gaussian { dim: 16, noise_std: 0.3 };

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum NodeData {
    Sbm {
        #[serde(default = "default_sbm")]
        config: SbmConfig,
        #[serde(default)]
        seed: u64,
    },
    Citation {
        dir: PathBuf,
    },
}

fn default_sbm() -> SbmConfig {
    SbmConfig::three_block(DEFAULT_FEATURES)
}

impl Default for NodeData {
    fn default() -> Self {
        NodeData::Sbm { config: default_sbm(), seed: 0 }
    }
}

impl NodeData {
    /// Generates or loads the dataset. Manifest discrepancies are returned as warnings.
    pub fn load(&self) -> Result<(NodeDataset, Vec<String>)> {
        match self {
            NodeData::Sbm { config, seed } => Ok((generate_sbm(config, *seed)?, Vec::new())),
            NodeData::Citation { dir } => {
                let loaded = load_citation(dir)?;
                Ok((loaded.data, loaded.warnings))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum GraphData {
    CyclesVsStars { per_class: usize, min_size: usize, max_size: usize, seed: u64 },
    SbmFamily { per_class: usize, min_size: usize, max_size: usize, seed: u64 },
}

impl Default for GraphData {
    fn default() -> Self {
        GraphData::CyclesVsStars { per_class: 100, min_size: 10, max_size: 30, seed: 0 }
    }
}

impl GraphData {
    pub fn load(&self) -> Result<GraphDataset> {
        match *self {
            GraphData::CyclesVsStars { per_class, min_size, max_size, seed } => {
                cycles_vs_stars(per_class, min_size, max_size, seed)
            }
            GraphData::SbmFamily { per_class, min_size, max_size, seed } => {
                sbm_graph_family(per_class, min_size, max_size, seed)
            }
        }
    }
}

/// Finite hyperparameter grid; an empty axis keeps the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperGrid {
    pub lr: Vec<f64>,
    pub weight_decay: Vec<f64>,
    pub dropout: Vec<f64>,
    pub hidden: Vec<usize>,
    pub sigma: Vec<f64>,
}

impl HyperGrid {
    pub fn is_empty(&self) -> bool {
        self.lr.is_empty()
            && self.weight_decay.is_empty()
            && self.dropout.is_empty()
            && self.hidden.is_empty()
            && self.sigma.is_empty()
    }

    /// Cartesian product over the nonempty axes, in a fixed order.
    pub fn expand(&self, base: &NodeTrainConfig) -> Vec<NodeTrainConfig> {
        fn axis<T: Copy>(values: &[T], base: T) -> Vec<T> {
            if values.is_empty() { vec![base] } else { values.to_vec() }
        }
        let mut out = Vec::new();
        for &lr in &axis(&self.lr, base.lr) {
            for &weight_decay in &axis(&self.weight_decay, base.weight_decay) {
                for &dropout in &axis(&self.dropout, base.dropout) {
                    for &hidden in &axis(&self.hidden, base.hidden) {
                        for &sigma in &axis(&self.sigma, base.sigma) {
                            out.push(NodeTrainConfig { lr, weight_decay, dropout, hidden, sigma, ..base.clone() });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum ExperimentConfig {
    TrainNode {
        #[serde(default)]
        data: NodeData,
        #[serde(default)]
        perturbation: Option<PerturbationModel>,
        #[serde(default)]
        perturbation_seed: u64,
        #[serde(default)]
        train: NodeTrainConfig,
        #[serde(default)]
        grid: HyperGrid,
    },
    TrainGraph {
        #[serde(default)]
        data: GraphData,
        #[serde(default)]
        train: GraphTrainConfig,
    },
    Sweep {
        #[serde(default)]
        data: NodeData,
        #[serde(default = "default_dilations")]
        dilations: Vec<f64>,
        #[serde(default = "default_levels")]
        levels: Vec<usize>,
        #[serde(default)]
        base: NodeTrainConfig,
    },
    Bench {
        #[serde(default)]
        config: BenchConfig,
    },
}

/// 1.25 to 4 in steps of 0.25.
pub fn default_dilations() -> Vec<f64> {
    (5..=16).map(|k| k as f64 * 0.25).collect()
}

pub fn default_levels() -> Vec<usize> {
    (1..=8).collect()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::Parse { path: "<config>".into(), line: e.line(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match self {
            ExperimentConfig::TrainNode { train, .. } | ExperimentConfig::Sweep { base: train, .. } => {
                if train.epochs == 0 {
                    return bad("epochs must be at least 1");
                }
            }
            ExperimentConfig::TrainGraph { train, .. } => {
                if train.epochs == 0 {
                    return bad("epochs must be at least 1");
                }
            }
            ExperimentConfig::Bench { config } => {
                if config.sizes.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("bench sizes must be strictly ascending");
                }
            }
        }
        Ok(())
    }

    /// Fully populated configuration, for provenance.
    pub fn resolved(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }
}

/// Applies an optional feature/edge perturbation to a node dataset.
pub fn perturb_dataset(data: &NodeDataset, model: Option<PerturbationModel>, seed: u64) -> Result<NodeDataset> {
    let Some(model) = model else { return Ok(data.clone()) };
    let (graph, features) = perturb(&data.graph, &data.features, &PerturbationSpec::new(model, seed))?;
    Ok(NodeDataset { graph, features, ..data.clone() })
}
