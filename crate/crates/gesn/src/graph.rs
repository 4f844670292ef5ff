//! Immutable sparse graph in compressed-row form, plus the node-level data
//! (features, labels, split masks) that node classification tasks carry.
//!
//! Adjacency is stored as directed edge slots. The usual entry point for
//! benchmark data is [`Graph::from_undirected_edges`], which symmetrizes and
//! deduplicates an edge list; self-loops present in the input are kept, none
//! are added.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Sparse adjacency in compressed-row form. Rows hold strictly increasing
/// column indices, so duplicate edges cannot be represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
}

impl Graph {
    /// Builds a symmetric graph from an edge list: both orientations of every
    /// edge are stored, duplicates are merged. A self-loop (v, v) occupies a
    /// single slot.
    pub fn from_undirected_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut slots = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            slots.push((u, v));
            if u != v {
                slots.push((v, u));
            }
        }
        Self::from_directed_edges(num_nodes, &slots)
    }

    /// Builds a graph from directed edge slots as given (deduplicated, no
    /// symmetrization).
    pub fn from_directed_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        if num_nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        for &(u, v) in edges {
            for idx in [u, v] {
                if idx >= num_nodes {
                    return Err(Error::NodeOutOfRange {
                        index: idx,
                        num_nodes,
                    });
                }
            }
        }
        let mut slots: Vec<(usize, usize)> = edges.to_vec();
        slots.sort_unstable();
        slots.dedup();

        let mut row_offsets = vec![0usize; num_nodes + 1];
        let mut col_indices = Vec::with_capacity(slots.len());
        let mut cur = 0usize;
        for (u, v) in slots {
            while cur < u {
                cur += 1;
                row_offsets[cur] = col_indices.len();
            }
            col_indices.push(v);
        }
        while cur < num_nodes {
            cur += 1;
            row_offsets[cur] = col_indices.len();
        }
        Ok(Graph {
            num_nodes,
            row_offsets,
            col_indices,
        })
    }

    /// Builds directly from compressed-row arrays, validating every invariant.
    pub fn from_csr(
        num_nodes: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
    ) -> Result<Graph> {
        if num_nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        if row_offsets.len() != num_nodes + 1 {
            return Err(Error::InvalidCsr(format!(
                "row_offsets length {} != num_nodes + 1 = {}",
                row_offsets.len(),
                num_nodes + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidCsr("row_offsets[0] != 0".into()));
        }
        if *row_offsets.last().unwrap() != col_indices.len() {
            return Err(Error::InvalidCsr(format!(
                "row_offsets[{}] = {} != number of edge slots {}",
                num_nodes,
                row_offsets[num_nodes],
                col_indices.len()
            )));
        }
        for w in row_offsets.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidCsr(
                    "row_offsets must be non-decreasing".into(),
                ));
            }
        }
        for v in 0..num_nodes {
            let row = &col_indices[row_offsets[v]..row_offsets[v + 1]];
            for pair in row.windows(2) {
                if pair[1] <= pair[0] {
                    return Err(Error::InvalidCsr(format!(
                        "row {v} column indices must be strictly increasing"
                    )));
                }
            }
            if let Some(&last) = row.last() {
                if last >= num_nodes {
                    return Err(Error::NodeOutOfRange {
                        index: last,
                        num_nodes,
                    });
                }
            }
        }
        Ok(Graph {
            num_nodes,
            row_offsets,
            col_indices,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of stored directed edge slots. A symmetric graph stores each
    /// undirected edge twice (self-loops once).
    pub fn num_edges(&self) -> usize {
        self.col_indices.len()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.row_offsets[v + 1] - self.row_offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes)
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// True when (u in row v) ⇔ (v in row u) for every slot.
    pub fn is_symmetric(&self) -> bool {
        (0..self.num_nodes).all(|v| self.neighbors(v).iter().all(|&u| self.has_edge(u, v)))
    }

    /// y = A x over the stored slots: `y[v] = Σ_{u ∈ N(v)} x[u]`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.num_nodes);
        let mut y = vec![0.0; self.num_nodes];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.num_nodes);
        assert_eq!(y.len(), self.num_nodes);
        for v in 0..self.num_nodes {
            y[v] = self.neighbors(v).iter().map(|&u| x[u]).sum();
        }
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    /// Iterates all stored (source, target) slots.
    pub fn edge_slots(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes).flat_map(move |v| self.neighbors(v).iter().map(move |&u| (v, u)))
    }
}

/// Dense per-node features and integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeData {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl NodeData {
    pub fn new(features: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<NodeData> {
        if labels.len() != features.rows() {
            return Err(Error::LabelLengthMismatch {
                expected: features.rows(),
                found: labels.len(),
            });
        }
        if num_classes == 0 {
            return Err(Error::InvalidConfig("num_classes must be >= 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::InvalidConfig(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        Ok(NodeData {
            features,
            labels,
            num_classes,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }
}

/// One train/validation/test partition as disjoint boolean masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl Split {
    pub fn new(train: Vec<bool>, val: Vec<bool>, test: Vec<bool>) -> Result<Split> {
        if train.len() != val.len() || val.len() != test.len() {
            return Err(Error::InvalidConfig(
                "split masks must have equal length".into(),
            ));
        }
        for i in 0..train.len() {
            let overlaps = (train[i] && val[i]) || (train[i] && test[i]) || (val[i] && test[i]);
            if overlaps {
                return Err(Error::InvalidConfig(format!(
                    "split masks overlap at node {i}"
                )));
            }
        }
        Ok(Split { train, val, test })
    }

    pub fn from_indices(
        num_nodes: usize,
        train: &[usize],
        val: &[usize],
        test: &[usize],
    ) -> Result<Split> {
        let mut masks = [
            vec![false; num_nodes],
            vec![false; num_nodes],
            vec![false; num_nodes],
        ];
        for (mask, idxs) in masks.iter_mut().zip([train, val, test]) {
            for &i in idxs {
                if i >= num_nodes {
                    return Err(Error::NodeOutOfRange {
                        index: i,
                        num_nodes,
                    });
                }
                mask[i] = true;
            }
        }
        let [train, val, test] = masks;
        Split::new(train, val, test)
    }

    pub fn num_nodes(&self) -> usize {
        self.train.len()
    }
}
