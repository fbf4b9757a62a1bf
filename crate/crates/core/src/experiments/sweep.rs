//! Sensitivity of node classification to dilation and scale level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::data::NodeDataset;
use crate::experiments::node::{train_node_classifier, NodeTrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `"dilation"` or `"levels"`.
    pub parameter: String,
    pub value: f64,
    pub dilation: f64,
    pub levels: usize,
    pub mean: f64,
    pub std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Dilation sweep at the base scale level, then scale sweep at dilation 2.
/// A failing grid point is reported in its row and the sweep continues.
pub fn sensitivity_sweep(
    data: &NodeDataset,
    dilations: &[f64],
    levels: &[usize],
    base: &NodeTrainConfig,
) -> Result<Vec<SweepRow>> {
    if dilations.is_empty() && levels.is_empty() {
        return Err(Error::InvalidParameter("both sweep grids are empty".into()));
    }
    let points = dilations
        .iter()
        .map(|&d| ("dilation", d, d, base.levels))
        .chain(levels.iter().map(|&j| ("levels", j as f64, 2.0, j)));
    let mut rows = Vec::new();
    for (parameter, value, dilation, lv) in points {
        let cfg = NodeTrainConfig { dilation, levels: lv, ..base.clone() };
        let mut row =
            SweepRow { parameter: parameter.into(), value, dilation, levels: lv, mean: f64::NAN, std: f64::NAN, error: None };
        match train_node_classifier(data, &cfg) {
            Ok((rec, _)) => {
                row.mean = rec.mean;
                row.std = rec.std;
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    Ok(rows)
}
