//! Reservoir diagnostics: stability regime of the state system, the
//! input-sensitivity upper bound, and a scalar separability statistic for
//! embedding quality.
//!
//! The state transition is contractive whenever ‖Ŵ‖·‖A‖ < 1, which makes the
//! iteration converge to a unique fixed point regardless of the initial
//! state; ρ(Ŵ)·α < 1 is merely necessary for that property. Violating the
//! contraction deliberately keeps contributions from long paths alive, which
//! is what lets the model exploit structure on low-homophily graphs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::reservoir::{Embeddings, Reservoir};

/// Classification of the reservoir/graph pair against the stability
/// conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityRegime {
    /// ‖Ŵ‖·‖A‖ < 1: contraction guaranteed, embeddings converge to a fixed
    /// point independent of initialization.
    Contractive,
    /// ρ(Ŵ)·α ≥ 1: even the necessary condition for stability is violated.
    NecessaryViolated,
    /// Between the two conditions; stability is neither guaranteed nor ruled
    /// out.
    Indeterminate,
}

/// Regime tag plus the estimates it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub regime: StabilityRegime,
    /// Estimated ‖Ŵ‖₂.
    pub recurrent_norm: f64,
    /// Estimated ρ(Ŵ).
    pub recurrent_radius: f64,
    /// Graph spectral radius α = ρ(A).
    pub adjacency_radius: f64,
    /// ‖A‖₂; equals α for the symmetric adjacencies this crate builds.
    pub adjacency_norm: f64,
    /// ‖Ŵ‖·‖A‖, the Lipschitz bound of the transition map.
    pub lipschitz_bound: f64,
    /// ρ(Ŵ)·α, the quantity tested by the necessary condition.
    pub necessary_product: f64,
}

/// Classifies the reservoir against the stability conditions for a graph of
/// spectral radius `alpha`. The adjacency is assumed symmetric, so ‖A‖ = α.
pub fn stability_regime(reservoir: &Reservoir, alpha: f64) -> StabilityReport {
    assert!(alpha > 0.0, "alpha must be positive");
    let recurrent_norm = reservoir.spectral_norm();
    let recurrent_radius = reservoir.achieved_radius();
    let lipschitz_bound = recurrent_norm * alpha;
    let necessary_product = recurrent_radius * alpha;
    let regime = if lipschitz_bound < 1.0 {
        StabilityRegime::Contractive
    } else if necessary_product >= 1.0 {
        StabilityRegime::NecessaryViolated
    } else {
        StabilityRegime::Indeterminate
    };
    StabilityReport {
        regime,
        recurrent_norm,
        recurrent_radius,
        adjacency_radius: alpha,
        adjacency_norm: alpha,
        lipschitz_bound,
        necessary_product,
    }
}

/// Per-path-length terms ‖Ŵ‖ˡ·‖W_in‖·(Aˡ)_{v,u} for ℓ = 0..K-1.
///
/// Their sum upper-bounds ‖∂h_v(K)/∂x_u‖. The walk counts (Aˡ)_{v,u} come
/// from repeated sparse products Aˡe_u; no dense power is ever formed.
pub fn sensitivity_bound_terms(
    reservoir: &Reservoir,
    graph: &Graph,
    iterations: usize,
    v: usize,
    u: usize,
) -> Result<Vec<f64>> {
    let n = graph.num_nodes();
    for idx in [v, u] {
        if idx >= n {
            return Err(Error::NodeOutOfRange {
                index: idx,
                num_nodes: n,
            });
        }
    }
    if iterations == 0 {
        return Err(Error::InvalidConfig("iterations must be >= 1".into()));
    }
    let w_norm = reservoir.spectral_norm();
    let in_norm = reservoir.input_norm();

    let mut walk_counts = vec![0.0; n];
    walk_counts[u] = 1.0;
    let mut terms = Vec::with_capacity(iterations);
    let mut w_power = 1.0;
    let mut buf = vec![0.0; n];
    for _ in 0..iterations {
        terms.push(w_power * in_norm * walk_counts[v]);
        graph.matvec_into(&walk_counts, &mut buf);
        std::mem::swap(&mut walk_counts, &mut buf);
        w_power *= w_norm;
    }
    Ok(terms)
}

/// Upper bound on the sensitivity ‖∂h_v(K)/∂x_u‖ of node v's embedding to
/// node u's input features, summed over all path lengths below K.
pub fn sensitivity_bound(
    reservoir: &Reservoir,
    graph: &Graph,
    iterations: usize,
    v: usize,
    u: usize,
) -> Result<f64> {
    Ok(sensitivity_bound_terms(reservoir, graph, iterations, v, u)?
        .iter()
        .sum())
}

/// Value returned when intra-class distances vanish but inter-class ones do
/// not (perfectly separated point clusters).
pub const SEPARABILITY_CAP: f64 = 1e12;

/// Node-count cap beyond which the statistic runs on a fixed-seed subsample.
pub const SEPARABILITY_SAMPLE_CAP: usize = 2_000;

/// Seed for the subsample shuffle, fixed so the statistic is a pure function
/// of its inputs.
const SUBSAMPLE_SEED: u64 = 0x5EBA_B1E5;

/// Mean inter-class pairwise distance divided by mean intra-class pairwise
/// distance; higher means better separated classes. Runs on a fixed-seed
/// subsample of at most [`SEPARABILITY_SAMPLE_CAP`] nodes, so repeated calls
/// agree. Classes with fewer than two sampled nodes contribute no intra-class
/// pairs; if no class has two, the statistic is undefined.
pub fn separability_statistic(embeddings: &Embeddings, labels: &[usize]) -> Result<f64> {
    let n = embeddings.num_nodes();
    if labels.len() != n {
        return Err(Error::LabelLengthMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let distinct = {
        let mut seen = std::collections::BTreeSet::new();
        for &y in labels {
            seen.insert(y);
        }
        seen.len()
    };
    if distinct < 2 {
        return Err(Error::DegenerateSeparability(
            "fewer than two classes present",
        ));
    }

    let sample: Vec<usize> = if n <= SEPARABILITY_SAMPLE_CAP {
        (0..n).collect()
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(SUBSAMPLE_SEED);
        idx.shuffle(&mut rng);
        idx.truncate(SEPARABILITY_SAMPLE_CAP);
        idx.sort_unstable();
        idx
    };

    let mut class_counts = std::collections::BTreeMap::new();
    for &i in &sample {
        *class_counts.entry(labels[i]).or_insert(0usize) += 1;
    }
    let included: std::collections::BTreeSet<usize> = class_counts
        .iter()
        .filter(|(_, &c)| c >= 2)
        .map(|(&y, _)| y)
        .collect();
    if included.is_empty() {
        return Err(Error::DegenerateSeparability(
            "no class has two sampled nodes",
        ));
    }
    if class_counts.len() < 2 {
        return Err(Error::DegenerateSeparability(
            "subsample contains a single class",
        ));
    }

    let states = embeddings.states();
    // Per-anchor partial sums, reduced in index order for determinism.
    let partials: Vec<(f64, u64, f64, u64)> = sample
        .par_iter()
        .enumerate()
        .map(|(pos, &i)| {
            let mut intra = (0.0, 0u64);
            let mut inter = (0.0, 0u64);
            let row_i = states.row(i);
            for &j in &sample[pos + 1..] {
                let d = euclidean(row_i, states.row(j));
                if labels[i] == labels[j] {
                    if included.contains(&labels[i]) {
                        intra.0 += d;
                        intra.1 += 1;
                    }
                } else {
                    inter.0 += d;
                    inter.1 += 1;
                }
            }
            (intra.0, intra.1, inter.0, inter.1)
        })
        .collect();
    let (intra_sum, intra_n, inter_sum, inter_n) = partials
        .iter()
        .fold((0.0, 0u64, 0.0, 0u64), |(a, b, c, d), &(w, x, y, z)| {
            (a + w, b + x, c + y, d + z)
        });

    if intra_n == 0 {
        return Err(Error::DegenerateSeparability(
            "no class has two sampled nodes",
        ));
    }
    let intra_mean = intra_sum / intra_n as f64;
    let inter_mean = if inter_n == 0 {
        0.0
    } else {
        inter_sum / inter_n as f64
    };
    if intra_mean == 0.0 && inter_mean == 0.0 {
        return Err(Error::DegenerateSeparability(
            "all sampled embeddings are identical",
        ));
    }
    if intra_mean == 0.0 {
        return Ok(SEPARABILITY_CAP);
    }
    Ok((inter_mean / intra_mean).min(SEPARABILITY_CAP))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
