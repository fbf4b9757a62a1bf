//! Tidy CSV tables for plotting.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::experiments::bench::BenchRow;
use crate::experiments::sweep::SweepRow;
use crate::filter::ChebyshevApprox;

/// Compression/accuracy trade-off for one shrinkage level.
#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffPoint {
    pub sigma: f64,
    pub compression_ratio: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
}

/// Accuracy of one model at one noise level.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessPoint {
    pub noise_ratio: f64,
    pub model: String,
    pub mean: f64,
    pub std: f64,
}

fn nonempty<T>(rows: &[T]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no records to emit".into()));
    }
    Ok(())
}

pub fn tradeoff_csv(rows: &[TradeoffPoint]) -> Result<String> {
    nonempty(rows)?;
    let mut s = String::from("sigma,compression_ratio,accuracy_mean,accuracy_std\n");
    for r in rows {
        let _ = writeln!(s, "{:?},{:?},{:?},{:?}", r.sigma, r.compression_ratio, r.accuracy_mean, r.accuracy_std);
    }
    Ok(s)
}

pub fn robustness_csv(rows: &[RobustnessPoint]) -> Result<String> {
    nonempty(rows)?;
    let mut s = String::from("noise_ratio,model,mean,std\n");
    for r in rows {
        let _ = writeln!(s, "{:?},{},{:?},{:?}", r.noise_ratio, r.model, r.mean, r.std);
    }
    Ok(s)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    nonempty(rows)?;
    let mut s = String::from("parameter,value,dilation,levels,mean,std,error\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:?},{:?},{},{:?},{:?},{}",
            r.parameter,
            r.value,
            r.dilation,
            r.levels,
            r.mean,
            r.std,
            r.error.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    Ok(s)
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String> {
    nonempty(rows)?;
    let mut s = String::from(
        "n,levels,edges,repetitions,build_median_ms,build_mean_ms,decompose_median_ms,decompose_mean_ms,\
         reconstruct_median_ms,reconstruct_mean_ms,block_nnz,note\n",
    );
    for r in rows {
        let nnz: Vec<String> = r.block_nnz.iter().map(usize::to_string).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{},{}",
            r.n,
            r.levels,
            r.edges,
            r.repetitions,
            r.build_median_ms,
            r.build_mean_ms,
            r.decompose_median_ms,
            r.decompose_mean_ms,
            r.reconstruct_median_ms,
            r.reconstruct_mean_ms,
            nnz.join(";"),
            r.note.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    Ok(s)
}

/// `name,t,lo,hi,c0,…,ct`; rows may differ in length.
pub fn chebyshev_csv(fits: &[ChebyshevApprox<f64>]) -> String {
    let mut s = String::from("name,t,lo,hi,coefficients...\n");
    for f in fits {
        let _ = write!(s, "{},{},{:?},{:?}", f.name.replace(',', ";"), f.degree(), f.lo, f.hi);
        for c in &f.coefficients {
            let _ = write!(s, ",{c:?}");
        }
        s.push('\n');
    }
    s
}
