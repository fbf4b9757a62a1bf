//! Desk-scale experiments: synthetic data, perturbations, denoising,
//! training loops, sweeps and benchmarks. All experiment code runs in `f64`.

pub mod data;
pub mod denoise;
pub mod metrics;
pub mod perturb;
pub mod node;
pub mod graph_cls;
pub mod bench;
pub mod citation;
pub mod config;
pub mod sweep;
