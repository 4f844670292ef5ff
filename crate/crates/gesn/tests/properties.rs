//! Property tests for the structural invariants the crate relies on.

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gesn::homophily::{edge_homophily, node_homophily};
use gesn::linalg::Matrix;
use gesn::readout::fit_ridge_targets;
use gesn::reservoir::{compute_embeddings, init_reservoir, ReservoirConfig};
use gesn::spectral::spectral_radius;
use gesn::Graph;

/// Random undirected graph from a seed; at least one edge.
fn seeded_graph(n: usize, density: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < density {
                edges.push((u, v));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, n - 1));
    }
    Graph::from_undirected_edges(n, &edges).unwrap()
}

fn seeded_labels(n: usize, classes: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0..classes)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn edge_homophily_is_invariant_under_class_relabeling(
        n in 3usize..14,
        seed in 0u64..5000,
        classes in 2usize..5,
    ) {
        let g = seeded_graph(n, 0.4, seed);
        let labels = seeded_labels(n, classes, seed ^ 0xABCD);
        // A rotation is a bijection on class ids.
        let rotated: Vec<usize> = labels.iter().map(|&y| (y + 1) % classes).collect();
        let h1 = edge_homophily(&g, &labels).unwrap();
        let h2 = edge_homophily(&g, &rotated).unwrap();
        prop_assert_eq!(h1, h2);
    }

    #[test]
    fn uniform_labels_score_one_bipartite_coloring_scores_zero(
        left in 1usize..6,
        right in 1usize..6,
        seed in 0u64..5000,
    ) {
        // Random bipartite graph with a proper 2-coloring.
        let n = left + right;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..left {
            for v in 0..right {
                if rng.random::<f64>() < 0.5 {
                    edges.push((u, left + v));
                }
            }
        }
        if edges.is_empty() {
            edges.push((0, left));
        }
        let g = Graph::from_undirected_edges(n, &edges).unwrap();
        let coloring: Vec<usize> = (0..n).map(|i| usize::from(i >= left)).collect();
        prop_assert_eq!(edge_homophily(&g, &coloring).unwrap(), 0.0);
        prop_assert_eq!(edge_homophily(&g, &vec![3usize; n]).unwrap(), 1.0);
    }

    #[test]
    fn spectral_radius_sits_between_degree_bounds(
        n in 3usize..16,
        seed in 0u64..5000,
    ) {
        let g = seeded_graph(n, 0.35, seed);
        let est = spectral_radius(&g).value;
        let max_deg = g.max_degree() as f64;
        prop_assert!(est <= max_deg * (1.0 + 1e-6) + 1e-9);
        prop_assert!(est * (1.0 + 1e-6) + 1e-9 >= max_deg.sqrt());
    }

    #[test]
    fn embeddings_are_permutation_equivariant(
        n in 3usize..10,
        seed in 0u64..2000,
    ) {
        let g = seeded_graph(n, 0.4, seed);
        let features = {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF00D);
            Matrix::from_fn(n, 3, |_, _| rng.random_range(-1.0..1.0))
        };
        // Relabel node i -> (i + 1) mod n.
        let perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let permuted_edges: Vec<(usize, usize)> = g
            .edge_slots()
            .filter(|(v, u)| v <= u)
            .map(|(v, u)| (perm[v], perm[u]))
            .collect();
        let pg = Graph::from_undirected_edges(n, &permuted_edges).unwrap();
        let pfeatures = {
            let mut m = Matrix::zeros(n, 3);
            for i in 0..n {
                m.row_mut(perm[i]).copy_from_slice(features.row(i));
            }
            m
        };
        let cfg = ReservoirConfig {
            hidden_units: 6,
            target_radius: 0.6,
            input_scaling: 0.8,
            recurrent_density: 1.0,
            iterations: 4,
            seed: seed ^ 0xBEEF,
        };
        let res = init_reservoir(&cfg, 3).unwrap();
        let e = compute_embeddings(&res, &g, &features).unwrap();
        let pe = compute_embeddings(&res, &pg, &pfeatures).unwrap();
        for i in 0..n {
            for j in 0..6 {
                let diff = (e.states().at(i, j) - pe.states().at(perm[i], j)).abs();
                prop_assert!(diff < 1e-9, "node {i} unit {j}: diff {diff}");
            }
        }
    }

    #[test]
    fn first_iteration_is_adjacency_independent(
        n in 3usize..10,
        seed_a in 0u64..2000,
        seed_b in 0u64..2000,
    ) {
        let ga = seeded_graph(n, 0.5, seed_a);
        let gb = seeded_graph(n, 0.5, seed_b.wrapping_add(7919));
        let features = {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            Matrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0))
        };
        let cfg = ReservoirConfig {
            hidden_units: 5,
            target_radius: 1.2,
            input_scaling: 1.0,
            recurrent_density: 1.0,
            iterations: 1,
            seed: 11,
        };
        let res = init_reservoir(&cfg, 2).unwrap();
        let ea = compute_embeddings(&res, &ga, &features).unwrap();
        let eb = compute_embeddings(&res, &gb, &features).unwrap();
        prop_assert_eq!(ea.states(), eb.states());
    }

    #[test]
    fn embeddings_stay_strictly_inside_unit_interval(
        n in 3usize..10,
        seed in 0u64..2000,
        radius in 0.1f64..30.0,
        k in 1usize..20,
    ) {
        let g = seeded_graph(n, 0.5, seed);
        let features = {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xE);
            Matrix::from_fn(n, 2, |_, _| rng.random_range(-5.0..5.0))
        };
        let cfg = ReservoirConfig {
            hidden_units: 4,
            target_radius: radius,
            input_scaling: 1.0,
            recurrent_density: 1.0,
            iterations: k,
            seed,
        };
        let res = init_reservoir(&cfg, 2).unwrap();
        let emb = compute_embeddings(&res, &g, &features).unwrap();
        for &v in emb.states().data() {
            prop_assert!(v > -1.0 && v < 1.0);
        }
    }

    #[test]
    fn ridge_solution_norm_shrinks_monotonically(
        seed in 0u64..5000,
        n in 6usize..30,
        h in 1usize..8,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let design = Matrix::from_fn(n, h, |_, _| rng.random_range(-1.0..1.0));
        let targets = Matrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
        let mask = vec![true; n];
        let mut prev: Option<f64> = None;
        for lambda in [1e-4, 1e-2, 1.0, 1e2, 1e4] {
            let (w, b) = fit_ridge_targets(&design, &targets, &mask, lambda, true).unwrap();
            let norm = (w.data().iter().map(|v| v * v).sum::<f64>()
                + b.iter().map(|v| v * v).sum::<f64>())
            .sqrt();
            if let Some(p) = prev {
                prop_assert!(norm <= p + 1e-9, "norm grew: {p} -> {norm} at lambda {lambda}");
            }
            prev = Some(norm);
        }
    }

    #[test]
    fn node_homophily_stays_in_unit_interval(
        n in 2usize..14,
        seed in 0u64..5000,
        classes in 2usize..4,
    ) {
        let g = seeded_graph(n, 0.4, seed);
        let labels = seeded_labels(n, classes, seed);
        let h = node_homophily(&g, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&h));
    }
}
