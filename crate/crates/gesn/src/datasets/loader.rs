//! Reading and writing the on-disk dataset directory format.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeData, Split};
use crate::linalg::Matrix;

/// Loader failures carry the offending file and, for malformed content, the
/// 1-based line number.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl LoadError {
    fn io(path: &Path, source: std::io::Error) -> LoadError {
        LoadError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn malformed(path: &Path, line: usize, message: impl Into<String>) -> LoadError {
        LoadError::Malformed {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn invalid(path: &Path, message: impl Into<String>) -> LoadError {
        LoadError::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// A fully validated task: symmetric graph, node data, and the scaffold
/// splits found on disk (sorted by id).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub node_data: NodeData,
    pub splits: Vec<(usize, Split)>,
}

impl Dataset {
    pub fn split_by_id(&self, id: usize) -> Option<&Split> {
        self.splits.iter().find(|(k, _)| *k == id).map(|(_, s)| s)
    }

    pub fn split_ids(&self) -> Vec<usize> {
        self.splits.iter().map(|(k, _)| *k).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct SplitFile {
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
}

fn read_to_string(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|e| LoadError::io(path, e))
}

fn load_features(path: &Path) -> Result<Matrix, LoadError> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .enumerate()
            .map(|(col, field)| {
                field.trim().parse::<f64>().map_err(|_| {
                    LoadError::malformed(
                        path,
                        lineno + 1,
                        format!("feature column {} is not a number: {field:?}", col + 1),
                    )
                })
            })
            .collect::<Result<_, _>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(LoadError::malformed(
                    path,
                    lineno + 1,
                    format!("row has {} columns, expected {w}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(LoadError::invalid(path, "no feature rows"));
    }
    let cols = width.unwrap();
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn load_labels(path: &Path, num_nodes: usize) -> Result<(Vec<usize>, usize), LoadError> {
    let text = read_to_string(path)?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let label: usize = line.trim().parse().map_err(|_| {
            LoadError::malformed(
                path,
                lineno + 1,
                format!("label is not an integer: {line:?}"),
            )
        })?;
        labels.push(label);
    }
    if labels.len() != num_nodes {
        return Err(LoadError::invalid(
            path,
            format!("{} labels for {num_nodes} nodes", labels.len()),
        ));
    }
    let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
    Ok((labels, num_classes))
}

fn load_edges(path: &Path, num_nodes: usize) -> Result<Vec<(usize, usize)>, LoadError> {
    let text = read_to_string(path)?;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse = |field: Option<&str>| -> Result<usize, LoadError> {
            let field = field.ok_or_else(|| {
                LoadError::malformed(path, lineno + 1, "expected two node indices")
            })?;
            field.parse::<usize>().map_err(|_| {
                LoadError::malformed(
                    path,
                    lineno + 1,
                    format!("node index is not an integer: {field:?}"),
                )
            })
        };
        let u = parse(fields.next())?;
        let v = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(LoadError::malformed(
                path,
                lineno + 1,
                "expected exactly two node indices",
            ));
        }
        for idx in [u, v] {
            if idx >= num_nodes {
                return Err(LoadError::malformed(
                    path,
                    lineno + 1,
                    format!("node index {idx} out of range for {num_nodes} nodes"),
                ));
            }
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn load_splits(dir: &Path, num_nodes: usize) -> Result<Vec<(usize, Split)>, LoadError> {
    let entries = fs::read_dir(dir).map_err(|e| LoadError::io(dir, e))?;
    let mut splits = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| LoadError::io(dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        let Some(id) = name
            .strip_prefix("split_")
            .and_then(|rest| rest.strip_suffix(".json"))
            .and_then(|k| k.parse::<usize>().ok())
        else {
            continue;
        };
        let path = entry.path();
        let text = read_to_string(&path)?;
        let file: SplitFile = serde_json::from_str(&text)
            .map_err(|e| LoadError::invalid(&path, format!("bad split JSON: {e}")))?;
        let split = Split::from_indices(num_nodes, &file.train, &file.val, &file.test)
            .map_err(|e| LoadError::invalid(&path, e.to_string()))?;
        splits.push((id, split));
    }
    splits.sort_by_key(|(k, _)| *k);
    Ok(splits)
}

/// Loads and validates a dataset directory. The edge list is symmetrized; all
/// invariants (index ranges, mask disjointness, label coverage) are enforced
/// with file/line diagnostics.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset, LoadError> {
    let dir = dir.as_ref();
    let features = load_features(&dir.join("features.csv"))?;
    let num_nodes = features.rows();
    let (labels, num_classes) = load_labels(&dir.join("labels.csv"), num_nodes)?;
    let edges_path = dir.join("edges.tsv");
    let edges = load_edges(&edges_path, num_nodes)?;
    let graph = Graph::from_undirected_edges(num_nodes, &edges)
        .map_err(|e| LoadError::invalid(&edges_path, e.to_string()))?;
    let node_data = NodeData::new(features, labels, num_classes.max(1))
        .map_err(|e| LoadError::invalid(dir, e.to_string()))?;
    let splits = load_splits(dir, num_nodes)?;
    Ok(Dataset {
        graph,
        node_data,
        splits,
    })
}

/// Writes a dataset in the on-disk format. Each undirected edge is written
/// once (u ≤ v); the loader symmetrizes on the way back in.
pub fn write_dataset(
    dir: impl AsRef<Path>,
    graph: &Graph,
    node_data: &NodeData,
    splits: &[Split],
) -> std::io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut edges = fs::File::create(dir.join("edges.tsv"))?;
    for (v, u) in graph.edge_slots() {
        if v <= u {
            writeln!(edges, "{v}\t{u}")?;
        }
    }

    let mut features = fs::File::create(dir.join("features.csv"))?;
    for i in 0..node_data.num_nodes() {
        let row: Vec<String> = node_data
            .features
            .row(i)
            .iter()
            .map(|v| v.to_string())
            .collect();
        writeln!(features, "{}", row.join(","))?;
    }

    let mut labels = fs::File::create(dir.join("labels.csv"))?;
    for &y in &node_data.labels {
        writeln!(labels, "{y}")?;
    }

    for (k, split) in splits.iter().enumerate() {
        let indices = |mask: &[bool]| -> Vec<usize> {
            mask.iter()
                .enumerate()
                .filter_map(|(i, &m)| m.then_some(i))
                .collect()
        };
        let file = SplitFile {
            train: indices(&split.train),
            val: indices(&split.val),
            test: indices(&split.test),
        };
        let text = serde_json::to_string_pretty(&file).expect("split serialization");
        fs::write(dir.join(format!("split_{k}.json")), text)?;
    }
    Ok(())
}
