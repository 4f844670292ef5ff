//! All-pairs shortest-path statistics for unweighted graphs.
//!
//! The histogram is exact and comes from a breadth-first search rooted at
//! every node, O(|V|(|V|+|E|)), which beats the cubic dense recurrence on the
//! sparse graphs this crate targets. Pair counts are over unordered node
//! pairs, so the adjacency is expected to be symmetric.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use rayon::prelude::*;

use crate::graph::Graph;

/// Histogram of shortest-path lengths over unordered node pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDistribution {
    counts: BTreeMap<usize, u64>,
    num_unreachable_pairs: u64,
    num_nodes: usize,
}

impl PathDistribution {
    /// Map from path length d ≥ 1 to the number of unordered pairs at
    /// distance exactly d.
    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn num_unreachable_pairs(&self) -> u64 {
        self.num_unreachable_pairs
    }

    pub fn num_reachable_pairs(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Longest finite distance, `None` when no pair is reachable.
    pub fn max_distance(&self) -> Option<usize> {
        self.counts.keys().next_back().copied()
    }

    /// Empirical cumulative distribution over reachable pairs: fraction of
    /// reachable pairs at distance ≤ d. Vacuously 1.0 when nothing is
    /// reachable.
    pub fn ecd(&self, d: usize) -> f64 {
        let total = self.num_reachable_pairs();
        if total == 0 {
            return 1.0;
        }
        let le: u64 = self.counts.range(..=d).map(|(_, &c)| c).sum();
        le as f64 / total as f64
    }

    /// Smallest distance d with ecd(d) ≥ p/100, for p in (0, 100]. Returns 0
    /// when no pair is reachable.
    pub fn percentile(&self, p: f64) -> usize {
        assert!(p > 0.0 && p <= 100.0, "percentile must be in (0, 100]");
        let total = self.num_reachable_pairs();
        if total == 0 {
            return 0;
        }
        let threshold = p / 100.0 * total as f64;
        let mut acc = 0u64;
        for (&d, &c) in &self.counts {
            acc += c;
            if acc as f64 >= threshold {
                return d;
            }
        }
        self.max_distance().unwrap_or(0)
    }
}

/// Exact shortest-path histogram via one BFS per source node. Sources are
/// processed in parallel; each contributes the pairs (s, t) with t > s, so
/// the merged histogram is independent of scheduling.
pub fn shortest_path_distribution(graph: &Graph) -> PathDistribution {
    let n = graph.num_nodes();
    let total_pairs = (n as u64) * (n as u64 - 1) / 2;

    let (hist, reachable) = (0..n)
        .into_par_iter()
        .map(|s| bfs_pair_histogram(graph, s))
        .reduce(
            || (Vec::new(), 0u64),
            |(mut ha, ra), (hb, rb)| {
                if hb.len() > ha.len() {
                    let (mut hb, ha_old) = (hb, ha);
                    for (i, v) in ha_old.into_iter().enumerate() {
                        hb[i] += v;
                    }
                    ha = hb;
                } else {
                    for (i, v) in hb.into_iter().enumerate() {
                        ha[i] += v;
                    }
                }
                (ha, ra + rb)
            },
        );

    let mut counts = BTreeMap::new();
    for (d, &c) in hist.iter().enumerate() {
        if d >= 1 && c > 0 {
            counts.insert(d, c);
        }
    }
    PathDistribution {
        counts,
        num_unreachable_pairs: total_pairs - reachable,
        num_nodes: n,
    }
}

/// Unweighted shortest-path distances from one source; `None` marks
/// unreachable nodes.
pub fn bfs_distances(graph: &Graph, source: usize) -> Vec<Option<usize>> {
    let n = graph.num_nodes();
    assert!(source < n, "source out of range");
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for &u in graph.neighbors(v) {
            if dist[u].is_none() {
                dist[u] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// BFS from `source`, counting targets t > source per distance. Returns the
/// distance histogram (indexed by distance) and the number of counted pairs.
fn bfs_pair_histogram(graph: &Graph, source: usize) -> (Vec<u64>, u64) {
    let n = graph.num_nodes();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);

    let mut hist: Vec<u64> = Vec::new();
    let mut reached = 0u64;
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if v > source {
            if hist.len() <= d {
                hist.resize(d + 1, 0);
            }
            hist[d] += 1;
            reached += 1;
        }
        for &u in graph.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = d + 1;
                queue.push_back(u);
            }
        }
    }
    (hist, reached)
}
