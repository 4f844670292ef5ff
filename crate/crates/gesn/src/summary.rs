//! Table-style dataset statistics: node/edge counts, spectral radius,
//! homophily measures, and shortest-path percentiles.

use serde::Serialize;

use crate::graph::{Graph, NodeData};
use crate::homophily::{edge_homophily, node_homophily};
use crate::paths::shortest_path_distribution;
use crate::spectral::spectral_radius;

/// Everything the `stats` report prints. Homophily fields are `None` when
/// undefined (no edges / all nodes isolated).
#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    /// Stored directed edge slots (symmetric graphs count each edge twice).
    pub edges: usize,
    pub spectral_radius: f64,
    pub spectral_radius_converged: bool,
    pub edge_homophily: Option<f64>,
    pub node_homophily: Option<f64>,
    pub feature_dim: usize,
    pub num_classes: usize,
    /// 50th/95th/100th percentiles of the shortest-path distribution; zero
    /// when no pair is reachable.
    pub path_length_p50: usize,
    pub path_length_p95: usize,
    pub path_length_max: usize,
    pub unreachable_pairs: u64,
}

pub fn summarize(graph: &Graph, data: &NodeData) -> GraphSummary {
    let radius = spectral_radius(graph);
    let paths = shortest_path_distribution(graph);
    GraphSummary {
        nodes: graph.num_nodes(),
        edges: graph.num_edges(),
        spectral_radius: radius.value,
        spectral_radius_converged: radius.converged,
        edge_homophily: edge_homophily(graph, &data.labels).ok(),
        node_homophily: node_homophily(graph, &data.labels).ok(),
        feature_dim: data.feature_dim(),
        num_classes: data.num_classes,
        path_length_p50: paths.percentile(50.0),
        path_length_p95: paths.percentile(95.0),
        path_length_max: paths.max_distance().unwrap_or(0),
        unreachable_pairs: paths.num_unreachable_pairs(),
    }
}
