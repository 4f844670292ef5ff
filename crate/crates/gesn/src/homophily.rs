//! Homophily measures: how often edges connect nodes of the same class.
//!
//! Both measures depend on the label assignment, not just on connectivity;
//! the same graph can score high under one labeling and low under another.

use crate::error::{Error, Result};
use crate::graph::Graph;

fn check_labels(graph: &Graph, labels: &[usize]) -> Result<()> {
    if labels.len() != graph.num_nodes() {
        return Err(Error::LabelLengthMismatch {
            expected: graph.num_nodes(),
            found: labels.len(),
        });
    }
    Ok(())
}

/// Intra-class edge ratio: the fraction of stored edge slots (v, u) whose
/// endpoints share a class. Self-loops count as intra-class.
pub fn edge_homophily(graph: &Graph, labels: &[usize]) -> Result<f64> {
    check_labels(graph, labels)?;
    if graph.num_edges() == 0 {
        return Err(Error::NoEdges);
    }
    let intra = graph
        .edge_slots()
        .filter(|&(v, u)| labels[v] == labels[u])
        .count();
    Ok(intra as f64 / graph.num_edges() as f64)
}

/// Mean over non-isolated nodes of the per-node neighbourhood homophily
/// ratio |{u ∈ N(v) : y_u = y_v}| / |N(v)|. Isolated nodes carry no defined
/// ratio and are excluded; a graph where every node is isolated is an error.
pub fn node_homophily(graph: &Graph, labels: &[usize]) -> Result<f64> {
    check_labels(graph, labels)?;
    let mut sum = 0.0;
    let mut counted = 0usize;
    for v in 0..graph.num_nodes() {
        let neighbors = graph.neighbors(v);
        if neighbors.is_empty() {
            continue;
        }
        let same = neighbors
            .iter()
            .filter(|&&u| labels[u] == labels[v])
            .count();
        sum += same as f64 / neighbors.len() as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::AllNodesIsolated);
    }
    Ok(sum / counted as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_triangle_is_fully_homophilic() {
        let g = Graph::from_undirected_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(edge_homophily(&g, &[1, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn single_cross_class_edge() {
        let g = Graph::from_undirected_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(edge_homophily(&g, &[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn zero_edges_is_an_error() {
        let g = Graph::from_undirected_edges(3, &[]).unwrap();
        assert!(matches!(
            edge_homophily(&g, &[0, 1, 2]),
            Err(Error::NoEdges)
        ));
        assert!(matches!(
            node_homophily(&g, &[0, 1, 2]),
            Err(Error::AllNodesIsolated)
        ));
    }

    #[test]
    fn self_loop_counts_intra_class() {
        let g = Graph::from_undirected_edges(2, &[(0, 0), (0, 1)]).unwrap();
        // Slots: (0,0), (0,1), (1,0) -> intra = 1 of 3.
        assert!((edge_homophily(&g, &[0, 1]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_clique_node_homophily() {
        let g = Graph::from_undirected_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
            .unwrap();
        assert_eq!(node_homophily(&g, &[2, 2, 2, 2]).unwrap(), 1.0);
    }

    #[test]
    fn star_with_opposite_leaves() {
        let g = Graph::from_undirected_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        // Centre class 0, leaves class 1: every neighbourhood is pure opposite.
        assert_eq!(node_homophily(&g, &[0, 1, 1, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn path_with_mixed_labels() {
        // a-b-c labelled A,A,B: ratios 1, 1/2, 0 -> mean 0.5.
        let g = Graph::from_undirected_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!((node_homophily(&g, &[0, 0, 1]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn isolated_nodes_are_excluded_from_the_mean() {
        // Node 3 is isolated; mean is over the path a-b-c only.
        let g = Graph::from_undirected_edges(4, &[(0, 1), (1, 2)]).unwrap();
        assert!((node_homophily(&g, &[0, 0, 1, 0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn homophily_is_a_labeling_property() {
        // Two 4-cliques joined by one bridge: block labels score high,
        // alternating labels score low, same connectivity.
        let mut edges = vec![(3, 4)];
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((u, v));
                edges.push((u + 4, v + 4));
            }
        }
        let g = Graph::from_undirected_edges(8, &edges).unwrap();
        let blocks = [0, 0, 0, 0, 1, 1, 1, 1];
        let stripes = [0, 1, 0, 1, 0, 1, 0, 1];
        let h_blocks = edge_homophily(&g, &blocks).unwrap();
        let h_stripes = edge_homophily(&g, &stripes).unwrap();
        assert!(h_blocks > 0.9);
        assert!(h_stripes < 0.5);
        assert_ne!(h_blocks, h_stripes);
    }
}
