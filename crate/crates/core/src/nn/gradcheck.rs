//! Central finite-difference gradient checks.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    /// Skip coordinates whose perturbed evaluations come closer than this to
    /// an activation kink.
    pub kink_guard: f64,
    pub max_coords: usize,
    pub seed: u64,
    /// Lower bound of the relative-error denominator.
    pub floor: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: 1e-6, kink_guard: 1e-4, max_coords: 200, seed: 0, floor: 1e-6 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FdReport {
    pub max_rel_error: f64,
    /// Coordinate attaining the maximum.
    pub worst: Option<usize>,
    pub checked: usize,
    pub excluded: usize,
}

/// Compares `analytic` against central differences of `f`.
///
/// `f` returns the loss and the distance of its evaluation point from the
/// nearest non-differentiable point. Relative error is
/// `|a − n| / max(|a|, |n|, floor)`.
pub fn finite_difference_check<F>(mut f: F, params: &[f64], analytic: &[f64], cfg: &FdConfig) -> FdReport
where
    F: FnMut(&[f64]) -> (f64, f64),
{
    assert_eq!(params.len(), analytic.len(), "gradient length");
    let n = params.len();
    let coords: Vec<usize> = if n <= cfg.max_coords {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut v = sample(&mut rng, n, cfg.max_coords).into_vec();
        v.sort_unstable();
        v
    };
    let (_, base_kink) = f(params);
    let mut report = FdReport::default();
    let mut x = params.to_vec();
    for &i in &coords {
        let orig = x[i];
        x[i] = orig + cfg.step;
        let (lp, kp) = f(&x);
        x[i] = orig - cfg.step;
        let (lm, km) = f(&x);
        x[i] = orig;
        if base_kink.min(kp).min(km) < cfg.kink_guard {
            report.excluded += 1;
            continue;
        }
        let numeric = (lp - lm) / (2.0 * cfg.step);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(cfg.floor);
        report.checked += 1;
        if rel > report.max_rel_error || report.worst.is_none() {
            report.max_rel_error = report.max_rel_error.max(rel);
            if rel >= report.max_rel_error {
                report.worst = Some(i);
            }
        }
    }
    report
}
