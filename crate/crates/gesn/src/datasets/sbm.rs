//! Stochastic block model with class-informative features.
//!
//! Two knobs control the task difficulty independently: the edge
//! probabilities set the graph homophily (p_in > p_out is homophilic,
//! p_in < p_out heterophilic), and `feature_signal` sets how much the node
//! features reveal the class (0 = pure noise).

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeData};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    pub num_nodes: usize,
    pub num_classes: usize,
    /// Probability of an edge inside a class block.
    pub intra_edge_prob: f64,
    /// Probability of an edge across class blocks.
    pub inter_edge_prob: f64,
    pub feature_dim: usize,
    /// Separation of class feature means; 0 makes features uninformative.
    pub feature_signal: f64,
    pub seed: u64,
}

impl SbmSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("num_classes must be >= 2".into()));
        }
        if self.num_nodes < self.num_classes {
            return Err(Error::InvalidConfig(
                "num_nodes must be >= num_classes".into(),
            ));
        }
        for (name, p) in [
            ("intra_edge_prob", self.intra_edge_prob),
            ("inter_edge_prob", self.inter_edge_prob),
        ] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1]")));
            }
        }
        if self.feature_dim == 0 {
            return Err(Error::InvalidConfig("feature_dim must be >= 1".into()));
        }
        if !(self.feature_signal >= 0.0) || !self.feature_signal.is_finite() {
            return Err(Error::InvalidConfig("feature_signal must be >= 0".into()));
        }
        Ok(())
    }
}

/// Block labels: classes get ⌊n/C⌋ nodes each, the remainder goes to the
/// lowest class indices; blocks are contiguous from node 0.
pub fn block_labels(num_nodes: usize, num_classes: usize) -> Vec<usize> {
    let base = num_nodes / num_classes;
    let remainder = num_nodes % num_classes;
    let mut labels = Vec::with_capacity(num_nodes);
    for class in 0..num_classes {
        let size = base + usize::from(class < remainder);
        labels.extend(std::iter::repeat_n(class, size));
    }
    labels
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; 1 - u keeps the log argument strictly positive.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn draw(spec: &SbmSpec, seed: u64) -> Result<(Graph, NodeData)> {
    let n = spec.num_nodes;
    let labels = block_labels(n, spec.num_classes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] {
                spec.intra_edge_prob
            } else {
                spec.inter_edge_prob
            };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_undirected_edges(n, &edges)?;

    // Class mean: one-hot direction e_{c mod X}, scaled by the signal.
    let mut features = Matrix::zeros(n, spec.feature_dim);
    for i in 0..n {
        let mean_dim = labels[i] % spec.feature_dim;
        for j in 0..spec.feature_dim {
            let mean = if j == mean_dim {
                spec.feature_signal
            } else {
                0.0
            };
            features.set(i, j, mean + standard_normal(&mut rng));
        }
    }
    let node_data = NodeData::new(features, labels, spec.num_classes)?;
    Ok((graph, node_data))
}

/// Samples a graph and node data from the block model, deterministic in the
/// seed. If both edge probabilities are nonzero in effect but the draw comes
/// out edgeless, one resample (seed+1) is attempted before erroring.
pub fn generate_sbm(spec: &SbmSpec) -> Result<(Graph, NodeData)> {
    spec.validate()?;
    let (graph, data) = draw(spec, spec.seed)?;
    let probs_nonzero = spec.intra_edge_prob > 0.0 || spec.inter_edge_prob > 0.0;
    if graph.num_edges() == 0 && probs_nonzero {
        let (graph, data) = draw(spec, spec.seed.wrapping_add(1))?;
        if graph.num_edges() == 0 {
            return Err(Error::EmptySyntheticGraph);
        }
        return Ok((graph, data));
    }
    Ok((graph, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homophily::edge_homophily;

    fn spec(n: usize, c: usize, p_in: f64, p_out: f64, signal: f64, seed: u64) -> SbmSpec {
        SbmSpec {
            num_nodes: n,
            num_classes: c,
            intra_edge_prob: p_in,
            inter_edge_prob: p_out,
            feature_dim: 4,
            feature_signal: signal,
            seed,
        }
    }

    #[test]
    fn block_labels_distribute_remainder_to_low_classes() {
        assert_eq!(block_labels(7, 3), vec![0, 0, 0, 1, 1, 2, 2]);
        assert_eq!(block_labels(6, 3), vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn pure_intra_graph_has_homophily_one() {
        let (g, d) = generate_sbm(&spec(40, 2, 1.0, 0.0, 0.0, 3)).unwrap();
        assert_eq!(edge_homophily(&g, &d.labels).unwrap(), 1.0);
    }

    #[test]
    fn pure_inter_graph_has_homophily_zero() {
        let (g, d) = generate_sbm(&spec(40, 2, 0.0, 1.0, 0.0, 3)).unwrap();
        assert_eq!(edge_homophily(&g, &d.labels).unwrap(), 0.0);
    }

    #[test]
    fn matched_probabilities_give_half_homophily() {
        // Monte Carlo against the generative definition: with p_in = p_out
        // and two equal blocks, slightly under half of the edges are
        // intra-class (499 intra pairs vs 500 inter per node-pair budget).
        let mut mean = 0.0;
        let seeds = 20;
        for s in 0..seeds {
            let (g, d) = generate_sbm(&spec(500, 2, 0.1, 0.1, 0.0, s)).unwrap();
            mean += edge_homophily(&g, &d.labels).unwrap();
        }
        mean /= seeds as f64;
        assert!((mean - 0.5).abs() <= 0.03, "mean homophily {mean}");
    }

    #[test]
    fn output_always_satisfies_graph_invariants() {
        for s in 0..10 {
            let (g, d) = generate_sbm(&spec(57, 3, 0.15, 0.05, 1.0, s)).unwrap();
            assert!(g.is_symmetric());
            for v in 0..g.num_nodes() {
                let row = g.neighbors(v);
                for w in row.windows(2) {
                    assert!(w[1] > w[0], "row {v} not strictly increasing");
                }
            }
            assert_eq!(d.num_nodes(), 57);
            assert_eq!(g.num_nodes(), 57);
        }
    }

    #[test]
    fn edge_count_matches_analytic_expectation() {
        // Two blocks of 100: 2·C(100,2) intra pairs, 100·100 inter pairs.
        let (p_in, p_out) = (0.08, 0.02);
        let intra_pairs = 2.0 * (100.0 * 99.0 / 2.0);
        let inter_pairs = 100.0 * 100.0;
        let expected = intra_pairs * p_in + inter_pairs * p_out;
        let variance = intra_pairs * p_in * (1.0 - p_in) + inter_pairs * p_out * (1.0 - p_out);
        let seeds = 20;
        let mut mean = 0.0;
        for s in 0..seeds {
            let (g, _) = generate_sbm(&spec(200, 2, p_in, p_out, 0.0, 1000 + s)).unwrap();
            mean += (g.num_edges() / 2) as f64;
        }
        mean /= seeds as f64;
        let sigma_mean = (variance / seeds as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * sigma_mean,
            "mean {mean} vs expected {expected} (sigma {sigma_mean})"
        );
    }

    #[test]
    fn zero_signal_features_are_label_independent() {
        // Two-sample z-test on the first feature dimension must not reject
        // at the 1% level (|z| < 2.58) when the signal is zero.
        let (_, d) = generate_sbm(&spec(2000, 2, 0.01, 0.01, 0.0, 5)).unwrap();
        let (mut sum0, mut n0, mut sum1, mut n1) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..d.num_nodes() {
            if d.labels[i] == 0 {
                sum0 += d.features.at(i, 0);
                n0 += 1.0;
            } else {
                sum1 += d.features.at(i, 0);
                n1 += 1.0;
            }
        }
        let z = (sum0 / n0 - sum1 / n1) / (1.0 / n0 + 1.0 / n1).sqrt();
        assert!(z.abs() < 2.58, "z = {z}");

        // And with a strong signal the same test rejects decisively.
        let (_, d) = generate_sbm(&spec(2000, 2, 0.01, 0.01, 2.0, 5)).unwrap();
        let (mut sum0, mut n0, mut sum1, mut n1) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..d.num_nodes() {
            if d.labels[i] == 0 {
                sum0 += d.features.at(i, 0);
                n0 += 1.0;
            } else {
                sum1 += d.features.at(i, 0);
                n1 += 1.0;
            }
        }
        let z = (sum0 / n0 - sum1 / n1) / (1.0 / n0 + 1.0 / n1).sqrt();
        assert!(z.abs() > 10.0, "z = {z}");
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_sbm(&spec(60, 3, 0.2, 0.05, 0.5, 9)).unwrap();
        let b = generate_sbm(&spec(60, 3, 0.2, 0.05, 0.5, 9)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(generate_sbm(&spec(10, 1, 0.5, 0.5, 0.0, 0)).is_err());
        assert!(generate_sbm(&spec(10, 2, 1.5, 0.5, 0.0, 0)).is_err());
        assert!(generate_sbm(&spec(1, 2, 0.5, 0.5, 0.0, 0)).is_err());
    }
}
