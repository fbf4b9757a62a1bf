//! Text formats: edge lists, feature CSV, label lists, metrics JSON lines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph};

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), line, message: message.into() }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

/// Edge list: a header `N M`, then `M` lines `u v [w]` (weight defaults to
/// 1). `#` starts a comment. Edges are undirected.
pub fn parse_graph(text: &str, path: &str) -> Result<Graph<f64>> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(path, 0, "missing `N M` header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(parse_err(path, hl, "header must be `N M`"));
    }
    let n: usize = fields[0].parse().map_err(|_| parse_err(path, hl, "bad node count"))?;
    let m: usize = fields[1].parse().map_err(|_| parse_err(path, hl, "bad edge count"))?;
    let mut edges = Vec::with_capacity(m);
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&f.len()) {
            return Err(parse_err(path, ln, "expected `u v [w]`"));
        }
        let u: usize = f[0].parse().map_err(|_| parse_err(path, ln, format!("bad node index `{}`", f[0])))?;
        let v: usize = f[1].parse().map_err(|_| parse_err(path, ln, format!("bad node index `{}`", f[1])))?;
        let w: f64 = match f.get(2) {
            Some(s) => s.parse().map_err(|_| parse_err(path, ln, format!("bad weight `{s}`")))?,
            None => 1.0,
        };
        if u >= n || v >= n {
            return Err(parse_err(path, ln, format!("node index out of range for N = {n}")));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(parse_err(path, ln, format!("weight {w} must be finite and nonnegative")));
        }
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(parse_err(path, 0, format!("header declares {m} edges, found {}", edges.len())));
    }
    build_graph(&edges, n, false)
}

pub fn format_graph(g: &Graph<f64>) -> String {
    let mut s = format!("{} {}\n", g.num_nodes(), g.num_edges());
    for &(u, v, w) in g.edges() {
        let _ = writeln!(s, "{u} {v} {w}");
    }
    s
}

pub fn read_graph(path: &Path) -> Result<Graph<f64>> {
    parse_graph(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn write_graph(path: &Path, g: &Graph<f64>) -> Result<()> {
    Ok(fs::write(path, format_graph(g))?)
}

/// Comma-separated matrix, one row per line, no header.
pub fn parse_matrix(text: &str, path: &str) -> Result<Array2<f64>> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (ln, line) in content_lines(text) {
        let before = values.len();
        for field in line.split(',') {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| parse_err(path, ln, format!("bad number `{field}`")))?;
            values.push(v);
        }
        let width = values.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(parse_err(path, ln, format!("row has {width} columns, expected {c}")));
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err(path, 0, "empty matrix"))?;
    Ok(Array2::from_shape_vec((rows, cols), values).expect("row widths checked"))
}

/// Shortest decimal that round-trips each value.
pub fn format_matrix(m: &Array2<f64>) -> String {
    let mut s = String::new();
    for row in m.rows() {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v:?}");
        }
        s.push('\n');
    }
    s
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    parse_matrix(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn write_matrix(path: &Path, m: &Array2<f64>) -> Result<()> {
    Ok(fs::write(path, format_matrix(m))?)
}

/// One nonnegative integer label per line.
pub fn parse_labels(text: &str, path: &str) -> Result<Vec<usize>> {
    content_lines(text)
        .map(|(ln, l)| l.parse().map_err(|_| parse_err(path, ln, format!("bad label `{l}`"))))
        .collect()
}

pub fn format_labels(labels: &[usize]) -> String {
    labels.iter().map(|l| format!("{l}\n")).collect()
}

pub fn write_json_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut s = String::new();
    for item in items {
        s.push_str(&serde_json::to_string(item)?);
        s.push('\n');
    }
    Ok(fs::write(path, s)?)
}

pub fn parse_json_lines<T: DeserializeOwned>(text: &str, path: &str) -> Result<Vec<T>> {
    content_lines(text)
        .map(|(ln, l)| serde_json::from_str(l).map_err(|e| parse_err(path, ln, e.to_string())))
        .collect()
}

pub fn read_json_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    parse_json_lines(&fs::read_to_string(path)?, &path.display().to_string())
}
