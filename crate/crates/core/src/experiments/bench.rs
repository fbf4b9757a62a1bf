//! Transform timing on sparse Erdős–Rényi graphs.

use std::time::Instant;

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::data::{erdos_renyi, seeded_rng};
use crate::fast::FastFrameletTransform;
use crate::framelet::{build_operators, FrameletSystem, SpectralInfo, TransformMode};
use crate::graph::{normalized_laplacian, normalized_spectral_bound};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// Expected degree; the edge probability is `avg_degree / (N − 1)`.
    pub avg_degree: f64,
    pub dilation: f64,
    pub levels: usize,
    pub chebyshev_degree: usize,
    pub features: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Also materialize the sparse operator blocks (for nnz reporting) on
    /// graphs with at most this many nodes.
    pub materialize_max_nodes: usize,
    /// Stored-entry limit for materialization.
    pub nnz_budget: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![1000, 2000, 4000, 8000],
            avg_degree: 5.0,
            dilation: 2.0,
            levels: 2,
            chebyshev_degree: 8,
            features: 16,
            repetitions: 100,
            seed: 0,
            materialize_max_nodes: 1000,
            nnz_budget: Some(20_000_000),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub levels: usize,
    pub edges: usize,
    pub repetitions: usize,
    pub build_median_ms: f64,
    pub build_mean_ms: f64,
    pub decompose_median_ms: f64,
    pub decompose_mean_ms: f64,
    pub reconstruct_median_ms: f64,
    pub reconstruct_mean_ms: f64,
    /// Stored entries per materialized block, in operator order.
    pub block_nnz: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn median_mean(mut v: Vec<f64>) -> (f64, f64) {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    (median, v.iter().sum::<f64>() / n as f64)
}

/// Matrix-free Chebyshev timings per size. Operator build covers the
/// `λ_max` estimate and all polynomial fits.
pub fn bench_transform(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.repetitions == 0 || cfg.sizes.is_empty() {
        return Err(Error::InvalidParameter("need at least one size and one repetition".into()));
    }
    if cfg.sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("sizes must be ascending".into()));
    }
    let system =
        FrameletSystem::haar(cfg.dilation, cfg.levels, TransformMode::Chebyshev).with_degree(cfg.chebyshev_degree);
    let mut rows = Vec::new();
    for (i, &n) in cfg.sizes.iter().enumerate() {
        let p = if n > 1 { (cfg.avg_degree / (n - 1) as f64).min(1.0) } else { 0.0 };
        let graph = erdos_renyi(n, p, cfg.seed.wrapping_add(i as u64))?;
        let l = normalized_laplacian(&graph);
        let mut rng = seeded_rng(cfg.seed ^ 0x5eed);
        let x = Array2::from_shape_simple_fn((n, cfg.features), || StandardNormal.sample(&mut rng));
        let (mut build, mut dec, mut rec) = (Vec::new(), Vec::new(), Vec::new());
        let mut transform = None;
        for _ in 0..cfg.repetitions {
            let t = Instant::now();
            let bound = normalized_spectral_bound(&l)?;
            let tr = FastFrameletTransform::new(&system, &l, bound)?;
            build.push(t.elapsed().as_secs_f64() * 1e3);
            transform = Some(tr);
        }
        let tr = transform.expect("at least one repetition");
        for _ in 0..cfg.repetitions {
            let t = Instant::now();
            let c = tr.decompose(x.view())?;
            dec.push(t.elapsed().as_secs_f64() * 1e3);
            let t = Instant::now();
            let back = tr.reconstruct(&c)?;
            rec.push(t.elapsed().as_secs_f64() * 1e3);
            std::hint::black_box(back);
        }
        let mut note = None;
        let mut block_nnz = Vec::new();
        if n > cfg.materialize_max_nodes {
            note = Some(format!("blocks not materialized above {} nodes", cfg.materialize_max_nodes));
        } else {
            let sys = FrameletSystem { nnz_budget: cfg.nnz_budget, ..system.clone() };
            match build_operators(&sys, &l, SpectralInfo::Bound(tr.provenance.lambda_bound)) {
                Ok(op) => block_nnz = op.blocks().map(|(_, b)| b.nnz()).collect(),
                Err(e @ Error::OperatorTooLarge { .. }) => note = Some(format!("blocks not materialized: {e}")),
                Err(e) => return Err(e),
            }
        }
        let (bm, ba) = median_mean(build);
        let (dm, da) = median_mean(dec);
        let (rm, ra) = median_mean(rec);
        rows.push(BenchRow {
            n,
            levels: cfg.levels,
            edges: graph.num_links(),
            repetitions: cfg.repetitions,
            build_median_ms: bm,
            build_mean_ms: ba,
            decompose_median_ms: dm,
            decompose_mean_ms: da,
            reconstruct_median_ms: rm,
            reconstruct_mean_ms: ra,
            block_nnz,
            note,
        });
    }
    Ok(rows)
}
