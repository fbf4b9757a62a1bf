//! Feature and edge perturbations.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::experiments::data::seeded_rng;
use crate::graph::{build_graph, Graph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationTarget {
    Features,
    Edges,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationModel {
    /// Flip 0/1 features. `ratio` is the expected number of flips relative
    /// to the number of nonzero entries, so it may exceed 1; the per-entry
    /// flip probability is `min(1, ratio · nnz / entries)`.
    BernoulliFlip { ratio: f64 },
    /// Additive `N(0, sigma²)` noise on every entry.
    Gaussian { sigma: f64 },
    /// Rescale the number of connected node pairs to `ratio · |E|`.
    EdgeRatio { ratio: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub target: PerturbationTarget,
    pub model: PerturbationModel,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(model: PerturbationModel, seed: u64) -> Self {
        let target = match model {
            PerturbationModel::EdgeRatio { .. } => PerturbationTarget::Edges,
            _ => PerturbationTarget::Features,
        };
        Self { target, model, seed }
    }

    fn validate(&self) -> Result<()> {
        let (value, target) = match self.model {
            PerturbationModel::BernoulliFlip { ratio } => (ratio, PerturbationTarget::Features),
            PerturbationModel::Gaussian { sigma } => (sigma, PerturbationTarget::Features),
            PerturbationModel::EdgeRatio { ratio } => (ratio, PerturbationTarget::Edges),
        };
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParameter(format!("perturbation strength {value}")));
        }
        if target != self.target {
            return Err(Error::InvalidParameter(format!("{:?} does not apply to {:?}", self.model, self.target)));
        }
        Ok(())
    }
}

/// Applies a perturbation; identity settings return exact copies.
pub fn perturb(graph: &Graph<f64>, features: &Array2<f64>, spec: &PerturbationSpec) -> Result<(Graph<f64>, Array2<f64>)> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    match spec.model {
        PerturbationModel::BernoulliFlip { ratio } => {
            if features.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::InvalidParameter("Bernoulli flips need 0/1 features".into()));
            }
            if ratio == 0.0 || features.is_empty() {
                return Ok((graph.clone(), features.clone()));
            }
            let nnz = features.iter().filter(|&&v| v != 0.0).count();
            let q = (ratio * nnz as f64 / features.len() as f64).min(1.0);
            let out = features.mapv(|v| if rng.random::<f64>() < q { 1.0 - v } else { v });
            Ok((graph.clone(), out))
        }
        PerturbationModel::Gaussian { sigma } => {
            if sigma == 0.0 {
                return Ok((graph.clone(), features.clone()));
            }
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let out = features.mapv(|v| v + normal.sample(&mut rng));
            Ok((graph.clone(), out))
        }
        PerturbationModel::EdgeRatio { ratio } => Ok((rescale_edges(graph, ratio, &mut rng)?, features.clone())),
    }
}

fn rescale_edges<R: Rng>(graph: &Graph<f64>, ratio: f64, rng: &mut R) -> Result<Graph<f64>> {
    let n = graph.num_nodes();
    let (loops, links): (Vec<_>, Vec<_>) = graph.edges().iter().copied().partition(|&(u, v, _)| u == v);
    let m = links.len();
    let target = (ratio * m as f64).round() as usize;
    if target == m {
        return Ok(graph.clone());
    }
    let mut edges: Vec<(usize, usize, f64)> = loops;
    if target < m {
        let mut keep = sample(rng, m, target).into_vec();
        keep.sort_unstable();
        edges.extend(keep.into_iter().map(|i| links[i]));
    } else {
        let capacity = n * n.saturating_sub(1) / 2;
        if target > capacity {
            return Err(Error::InvalidParameter(format!("{target} edges exceed the {capacity} node pairs")));
        }
        let mut present: BTreeSet<(usize, usize)> = links.iter().map(|&(u, v, _)| (u, v)).collect();
        edges.extend_from_slice(&links);
        while present.len() < target {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if present.insert(key) {
                edges.push((key.0, key.1, 1.0));
            }
        }
    }
    build_graph(&edges, n, false)
}
