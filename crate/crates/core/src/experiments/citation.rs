//! User-supplied citation datasets stored as a directory of plain files:
//!
//! ```text
//! graph.txt      edge list (`N M` header, `u v [w]` lines)
//! features.csv   N rows of comma-separated values
//! labels.txt     one class index per line
//! splits.json    {"train": [...], "val": [...], "test": [...]}
//! manifest.json  {"name", "num_nodes", "num_features", "num_classes", "train", "val", "test"}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::data::{NodeDataset, Splits};
use crate::io::text::{format_labels, format_matrix, parse_labels, read_graph, read_matrix, write_graph};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationManifest {
    pub name: String,
    pub num_nodes: usize,
    pub num_features: usize,
    pub num_classes: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl CitationManifest {
    pub fn describe(name: &str, data: &NodeDataset) -> Self {
        Self {
            name: name.to_string(),
            num_nodes: data.num_nodes(),
            num_features: data.features.ncols(),
            num_classes: data.num_classes,
            train: data.splits.train.len(),
            val: data.splits.val.len(),
            test: data.splits.test.len(),
        }
    }
}

/// A loaded dataset plus any non-fatal discrepancies against its manifest.
#[derive(Clone, Debug)]
pub struct LoadedCitation {
    pub data: NodeDataset,
    pub manifest: CitationManifest,
    pub warnings: Vec<String>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse { path: path.display().to_string(), line: e.line(), message: e.to_string() })
}

pub fn load_citation(dir: &Path) -> Result<LoadedCitation> {
    if !dir.is_dir() {
        return Err(Error::InvalidParameter(format!("dataset directory {} does not exist", dir.display())));
    }
    let manifest: CitationManifest = read_json(&dir.join("manifest.json"))?;
    let graph = read_graph(&dir.join("graph.txt"))?;
    let features = read_matrix(&dir.join("features.csv"))?;
    let labels_path = dir.join("labels.txt");
    let labels = parse_labels(&fs::read_to_string(&labels_path)?, &labels_path.display().to_string())?;
    let splits: Splits = read_json(&dir.join("splits.json"))?;

    let n = graph.num_nodes();
    if features.nrows() != n || labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "graph has {n} nodes, features {} rows, labels {} entries",
            features.nrows(),
            labels.len()
        )));
    }
    if let Some(&bad) = splits.train.iter().chain(&splits.val).chain(&splits.test).find(|&&i| i >= n) {
        return Err(Error::NodeOutOfRange { index: bad, num_nodes: n });
    }
    let num_classes = labels.iter().max().map_or(0, |m| m + 1).max(manifest.num_classes);

    let mut warnings = Vec::new();
    let mut check = |what: &str, want: usize, got: usize| {
        if want != got {
            warnings.push(format!("{what}: manifest says {want}, found {got}"));
        }
    };
    check("nodes", manifest.num_nodes, n);
    check("features", manifest.num_features, features.ncols());
    check("classes", manifest.num_classes, num_classes);
    check("train split", manifest.train, splits.train.len());
    check("validation split", manifest.val, splits.val.len());
    check("test split", manifest.test, splits.test.len());

    Ok(LoadedCitation { data: NodeDataset { graph, features, labels, num_classes, splits }, manifest, warnings })
}

pub fn save_citation(dir: &Path, name: &str, data: &NodeDataset) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_graph(&dir.join("graph.txt"), &data.graph)?;
    fs::write(dir.join("features.csv"), format_matrix(&data.features))?;
    fs::write(dir.join("labels.txt"), format_labels(&data.labels))?;
    fs::write(dir.join("splits.json"), serde_json::to_string_pretty(&data.splits)?)?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&CitationManifest::describe(name, data))?)?;
    Ok(())
}
