//! Synthetic graph datasets.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Node index sets for semi-supervised training.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// A graph with node features and node labels.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeDataset {
    pub graph: Graph<f64>,
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub splits: Splits,
}

impl NodeDataset {
    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }
}

/// Unweighted Erdős–Rényi graph `G(n, p)` without self-loops.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph<f64>> {
    check_probability(p)?;
    let mut rng = seeded_rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    build_graph(&edges, n, false)
}

/// Path `0 – 1 – … – (n−1)` with unit weights.
pub fn path_graph(n: usize) -> Result<Graph<f64>> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    build_graph(&edges, n, false)
}

pub fn cycle_graph(n: usize) -> Result<Graph<f64>> {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    build_graph(&edges, n, false)
}

/// Star with centre 0 and `n − 1` leaves.
pub fn star_graph(n: usize) -> Result<Graph<f64>> {
    let edges: Vec<_> = (1..n).map(|i| (0, i, 1.0)).collect();
    build_graph(&edges, n, false)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// How node features are drawn for each block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureModel {
    /// Block mean (a random unit vector) plus i.i.d. `N(0, noise_std²)` noise.
    Gaussian { dim: usize, noise_std: f64 },
    /// 0/1 features. Each block owns a contiguous slice of the dimensions;
    /// entries in the own slice are on with `p_on`, all others with `p_off`.
    Binary { dim: usize, p_on: f64, p_off: f64 },
}

impl FeatureModel {
    pub fn dim(&self) -> usize {
        match *self {
            FeatureModel::Gaussian { dim, .. } | FeatureModel::Binary { dim, .. } => dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub features: FeatureModel,
}

impl SbmConfig {
    /// Three blocks of 100 nodes, `p_in = 0.1`, `p_out = 0.01`.
    pub fn three_block(features: FeatureModel) -> Self {
        Self { sizes: vec![100; 3], p_in: 0.1, p_out: 0.01, features }
    }

    pub fn expected_edges(&self) -> f64 {
        let mut within = 0.0;
        let mut total = 0.0;
        let n: usize = self.sizes.iter().sum();
        for &s in &self.sizes {
            within += (s * s.saturating_sub(1) / 2) as f64;
        }
        total += (n * n.saturating_sub(1) / 2) as f64;
        within * self.p_in + (total - within) * self.p_out
    }
}

/// Stochastic block model with block-dependent features and a stratified
/// 10/20/70 train/validation/test split.
pub fn generate_sbm(cfg: &SbmConfig, seed: u64) -> Result<NodeDataset> {
    check_probability(cfg.p_in)?;
    check_probability(cfg.p_out)?;
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(Error::InvalidParameter("every block needs at least one node".into()));
    }
    let mut rng = seeded_rng(seed);
    let labels: Vec<usize> =
        cfg.sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let n = labels.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { cfg.p_in } else { cfg.p_out };
            if rng.random::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    let graph = build_graph(&edges, n, false)?;
    let blocks = cfg.sizes.len();
    let features = match cfg.features {
        FeatureModel::Gaussian { dim, noise_std } => {
            let means: Vec<Vec<f64>> = (0..blocks).map(|_| random_unit_vector(dim, &mut rng)).collect();
            Array2::from_shape_fn((n, dim), |(i, k)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                means[labels[i]][k] + noise_std * z
            })
        }
        FeatureModel::Binary { dim, p_on, p_off } => {
            check_probability(p_on)?;
            check_probability(p_off)?;
            let width = (dim / blocks).max(1);
            Array2::from_shape_fn((n, dim), |(i, k)| {
                let own = k / width == labels[i];
                let p = if own { p_on } else { p_off };
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            })
        }
    };
    let splits = stratified_split(&labels, blocks, [0.1, 0.2], &mut rng);
    Ok(NodeDataset { graph, features, labels, num_classes: blocks, splits })
}

fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Per-class shuffled split: the first `fractions[0]` of each class trains,
/// the next `fractions[1]` validates, the rest tests. Index lists are sorted.
pub fn stratified_split<R: Rng>(labels: &[usize], classes: usize, fractions: [f64; 2], rng: &mut R) -> Splits {
    let mut splits = Splits::default();
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(rng);
        let m = members.len();
        let train = ((fractions[0] * m as f64).round() as usize).clamp(usize::from(m > 0), m);
        let val = ((fractions[1] * m as f64).round() as usize).min(m - train);
        splits.train.extend_from_slice(&members[..train]);
        splits.val.extend_from_slice(&members[train..train + val]);
        splits.test.extend_from_slice(&members[train + val..]);
    }
    splits.train.sort_unstable();
    splits.val.sort_unstable();
    splits.test.sort_unstable();
    splits
}

/// One labeled graph with node features.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample {
    pub graph: Graph<f64>,
    pub features: Array2<f64>,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphDataset {
    pub samples: Vec<GraphSample>,
    pub num_classes: usize,
}

/// Structural node features: a constant column and `ln(1 + degree)`.
pub fn structural_features(g: &Graph<f64>) -> Array2<f64> {
    let deg = g.neighbor_counts();
    Array2::from_shape_fn((g.num_nodes(), 2), |(i, k)| if k == 0 { 1.0 } else { (1.0 + deg[i] as f64).ln() })
}

/// Class 0: cycles, class 1: stars; sizes uniform in `[min_size, max_size]`.
pub fn cycles_vs_stars(per_class: usize, min_size: usize, max_size: usize, seed: u64) -> Result<GraphDataset> {
    if min_size < 3 || max_size < min_size {
        return Err(Error::InvalidParameter(format!("graph sizes {min_size}..={max_size}")));
    }
    let mut rng = seeded_rng(seed);
    let mut samples = Vec::with_capacity(2 * per_class);
    for label in 0..2 {
        for _ in 0..per_class {
            let n = rng.random_range(min_size..=max_size);
            let graph = if label == 0 { cycle_graph(n)? } else { star_graph(n)? };
            let features = structural_features(&graph);
            samples.push(GraphSample { graph, features, label });
        }
    }
    samples.shuffle(&mut rng);
    Ok(GraphDataset { samples, num_classes: 2 })
}

/// Class `c ∈ {0, 1, 2}`: block models with `c + 2` equal communities,
/// `p_in = 0.7`, `p_out = 0.03`, sizes uniform in `[min_size, max_size]`.
pub fn sbm_graph_family(per_class: usize, min_size: usize, max_size: usize, seed: u64) -> Result<GraphDataset> {
    if min_size < 8 || max_size < min_size {
        return Err(Error::InvalidParameter(format!("graph sizes {min_size}..={max_size}")));
    }
    let mut rng = seeded_rng(seed);
    let mut samples = Vec::with_capacity(3 * per_class);
    for label in 0..3 {
        let blocks = label + 2;
        for _ in 0..per_class {
            let n = rng.random_range(min_size..=max_size);
            let sizes: Vec<usize> = (0..blocks).map(|b| n / blocks + usize::from(b < n % blocks)).collect();
            let cfg = SbmConfig {
                sizes,
                p_in: 0.7,
                p_out: 0.03,
                features: FeatureModel::Gaussian { dim: 1, noise_std: 0.0 },
            };
            let graph = generate_sbm(&cfg, rng.random::<u64>())?.graph;
            let features = structural_features(&graph);
            samples.push(GraphSample { graph, features, label });
        }
    }
    samples.shuffle(&mut rng);
    Ok(GraphDataset { samples, num_classes: 3 })
}
