//! Randomly initialized, untrained reservoir encoder for graph nodes.
//!
//! Node states evolve under the fixed-point iteration
//!
//! ```text
//! h_v(k) = tanh( W_in · x_v  +  Σ_{u ∈ N(v)} Ŵ · h_u(k-1) ),   h_v(0) = 0,
//! ```
//!
//! iterated exactly K times; the final state is the node embedding. Both
//! weight matrices are drawn uniformly from [-1, 1], then the input weights
//! are scaled by the input-scaling factor and the recurrent weights rescaled
//! so their estimated spectral radius hits the requested target. Nothing is
//! ever trained: a `Reservoir` is frozen at construction.
//!
//! The input projection W_in·x_v does not change across iterations, so it is
//! computed once up front; per-iteration work is the neighbour sum (one pass
//! over edge slots) plus one sparse recurrent product per node.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{CsrMatrix, Matrix};
use crate::spectral::{csr_radius_modulus, csr_spectral_norm, dense_spectral_norm, RadiusEstimate};

/// Tolerance for the recurrent-matrix spectral-radius estimate.
pub const RESERVOIR_RADIUS_TOL: f64 = 1e-6;
/// Iteration cap for the recurrent-matrix spectral-radius estimate.
pub const RESERVOIR_RADIUS_MAX_ITERS: usize = 5_000;

/// Estimated radii below this are treated as a degenerate draw (for example a
/// nilpotent sparsity pattern) and trigger a redraw.
const DEGENERATE_RADIUS_FLOOR: f64 = 1e-12;

/// Largest double strictly below 1: embeddings stay inside the open interval
/// (-1, 1) even where `tanh` saturates to exactly ±1.0 in floating point.
const TANH_CLAMP: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
fn bounded_tanh(x: f64) -> f64 {
    x.tanh().clamp(-TANH_CLAMP, TANH_CLAMP)
}

/// Construction parameters for a reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirConfig {
    pub hidden_units: usize,
    pub target_radius: f64,
    pub input_scaling: f64,
    /// Fraction of nonzero entries in the recurrent matrix, in (0, 1].
    pub recurrent_density: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl ReservoirConfig {
    /// Default recurrent density: about ten nonzeros per reservoir row, which
    /// keeps the per-iteration state projection linear in the number of units.
    pub fn default_density(hidden_units: usize) -> f64 {
        (10.0 / hidden_units as f64).min(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_units == 0 {
            return Err(Error::InvalidConfig("hidden_units must be >= 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        if !(self.target_radius > 0.0) || !self.target_radius.is_finite() {
            return Err(Error::InvalidConfig("target_radius must be > 0".into()));
        }
        if !(self.input_scaling > 0.0) || !self.input_scaling.is_finite() {
            return Err(Error::InvalidConfig("input_scaling must be > 0".into()));
        }
        let h = self.hidden_units as f64;
        if !(self.recurrent_density > 0.0 && self.recurrent_density <= 1.0) {
            return Err(Error::InvalidConfig(
                "recurrent_density must be in (0, 1]".into(),
            ));
        }
        if self.recurrent_density * h * h < h {
            return Err(Error::InvalidConfig(
                "recurrent_density too low: expected nonzeros per row < 1".into(),
            ));
        }
        Ok(())
    }
}

/// Frozen reservoir weights plus the spectral estimates taken at build time.
#[derive(Debug, Clone)]
pub struct Reservoir {
    input_weights: Matrix,
    recurrent: CsrMatrix,
    radius_estimate: RadiusEstimate,
    spectral_norm: f64,
    input_norm: f64,
    config: ReservoirConfig,
}

impl Reservoir {
    /// Wraps externally built weights (hand-set fixtures, serialized models).
    /// Spectral estimates are measured here, exactly as in [`init_reservoir`].
    pub fn from_parts(
        input_weights: Matrix,
        recurrent: CsrMatrix,
        config: ReservoirConfig,
    ) -> Result<Reservoir> {
        if recurrent.rows() != config.hidden_units || recurrent.cols() != config.hidden_units {
            return Err(Error::DimensionMismatch {
                expected: config.hidden_units,
                found: recurrent.rows(),
            });
        }
        if input_weights.rows() != config.hidden_units {
            return Err(Error::DimensionMismatch {
                expected: config.hidden_units,
                found: input_weights.rows(),
            });
        }
        let radius_estimate =
            csr_radius_modulus(&recurrent, RESERVOIR_RADIUS_TOL, RESERVOIR_RADIUS_MAX_ITERS);
        let spectral_norm = csr_spectral_norm(&recurrent, 1e-10, 50_000).value;
        let input_norm = dense_spectral_norm(&input_weights, 1e-10, 50_000).value;
        Ok(Reservoir {
            input_weights,
            recurrent,
            radius_estimate,
            spectral_norm,
            input_norm,
            config,
        })
    }

    pub fn hidden_units(&self) -> usize {
        self.config.hidden_units
    }

    pub fn input_dim(&self) -> usize {
        self.input_weights.cols()
    }

    /// Input-to-reservoir weights, H×X.
    pub fn input_weights(&self) -> &Matrix {
        &self.input_weights
    }

    /// Recurrent weights, H×H sparse.
    pub fn recurrent(&self) -> &CsrMatrix {
        &self.recurrent
    }

    /// Estimated spectral radius ρ(Ŵ) of the (rescaled) recurrent matrix.
    pub fn achieved_radius(&self) -> f64 {
        self.radius_estimate.value
    }

    pub fn radius_estimate(&self) -> RadiusEstimate {
        self.radius_estimate
    }

    /// Estimated spectral norm ‖Ŵ‖₂.
    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }

    /// Estimated spectral norm ‖W_in‖₂.
    pub fn input_norm(&self) -> f64 {
        self.input_norm
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.config
    }
}

fn draw_recurrent(rng: &mut ChaCha8Rng, h: usize, density: f64) -> CsrMatrix {
    let mut triplets = Vec::with_capacity((density * (h * h) as f64).ceil() as usize);
    for i in 0..h {
        for j in 0..h {
            if rng.random::<f64>() < density {
                triplets.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
    }
    CsrMatrix::from_triplets(h, h, triplets).expect("indices in range by construction")
}

/// Draws and freezes a reservoir: dense W_in ~ U[-1,1]·input_scaling, sparse
/// Ŵ ~ U[-1,1] at the configured density rescaled to the target spectral
/// radius. Bit-identical output for identical config, seed, and input_dim.
///
/// A draw whose estimated radius is (numerically) zero cannot be rescaled;
/// it is redrawn with a perturbed seed up to three times before giving up.
pub fn init_reservoir(config: &ReservoirConfig, input_dim: usize) -> Result<Reservoir> {
    config.validate()?;
    if input_dim == 0 {
        return Err(Error::InvalidConfig("input_dim must be >= 1".into()));
    }

    let h = config.hidden_units;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scaling = config.input_scaling;
    let input_weights = Matrix::from_fn(h, input_dim, |_, _| rng.random_range(-1.0..1.0) * scaling);

    const MAX_RETRIES: usize = 3;
    let mut recurrent = draw_recurrent(&mut rng, h, config.recurrent_density);
    let mut raw_estimate =
        csr_radius_modulus(&recurrent, RESERVOIR_RADIUS_TOL, RESERVOIR_RADIUS_MAX_ITERS);
    let mut retries = 0;
    while raw_estimate.value < DEGENERATE_RADIUS_FLOOR {
        if retries == MAX_RETRIES {
            return Err(Error::DegenerateReservoir { retries });
        }
        retries += 1;
        let perturbed = config
            .seed
            .wrapping_add((retries as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut redraw_rng = ChaCha8Rng::seed_from_u64(perturbed);
        recurrent = draw_recurrent(&mut redraw_rng, h, config.recurrent_density);
        raw_estimate =
            csr_radius_modulus(&recurrent, RESERVOIR_RADIUS_TOL, RESERVOIR_RADIUS_MAX_ITERS);
    }

    recurrent.scale(config.target_radius / raw_estimate.value);
    let radius_estimate =
        csr_radius_modulus(&recurrent, RESERVOIR_RADIUS_TOL, RESERVOIR_RADIUS_MAX_ITERS);
    let spectral_norm = csr_spectral_norm(&recurrent, 1e-10, 50_000).value;
    let input_norm = dense_spectral_norm(&input_weights, 1e-10, 50_000).value;

    Ok(Reservoir {
        input_weights,
        recurrent,
        radius_estimate,
        spectral_norm,
        input_norm,
        config: config.clone(),
    })
}

/// Per-node states after K iterations of the state system.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    states: Matrix,
    iterations_used: usize,
}

impl Embeddings {
    pub fn new(states: Matrix, iterations_used: usize) -> Embeddings {
        Embeddings {
            states,
            iterations_used,
        }
    }

    /// |V|×H state matrix; every entry lies strictly inside (-1, 1).
    pub fn states(&self) -> &Matrix {
        &self.states
    }

    pub fn num_nodes(&self) -> usize {
        self.states.rows()
    }

    pub fn hidden_units(&self) -> usize {
        self.states.cols()
    }

    pub fn iterations_used(&self) -> usize {
        self.iterations_used
    }
}

fn check_dimensions(reservoir: &Reservoir, graph: &Graph, features: &Matrix) -> Result<()> {
    if features.cols() != reservoir.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: reservoir.input_dim(),
            found: features.cols(),
        });
    }
    if features.rows() != graph.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_nodes(),
            found: features.rows(),
        });
    }
    Ok(())
}

/// W_in applied to every feature row, |V|×H, reused across all iterations.
fn input_projection(reservoir: &Reservoir, features: &Matrix) -> Matrix {
    let n = features.rows();
    let h = reservoir.hidden_units();
    let mut proj = Matrix::zeros(n, h);
    proj.data_mut()
        .par_chunks_mut(h)
        .enumerate()
        .for_each(|(v, row)| {
            row.copy_from_slice(&reservoir.input_weights.matvec(features.row(v)));
        });
    proj
}

/// One synchronous update of all node states. Each output row depends only on
/// the previous iteration, so rows are computed in parallel; accumulation per
/// row follows the stored column order, making the result independent of the
/// worker count.
fn step(
    reservoir: &Reservoir,
    graph: &Graph,
    projection: &Matrix,
    current: &Matrix,
    next: &mut Matrix,
) {
    let h = reservoir.hidden_units();
    next.data_mut().par_chunks_mut(h).enumerate().for_each_init(
        || vec![0.0; h],
        |neighbor_sum, (v, row)| {
            neighbor_sum.iter_mut().for_each(|s| *s = 0.0);
            for &u in graph.neighbors(v) {
                for (s, x) in neighbor_sum.iter_mut().zip(current.row(u)) {
                    *s += x;
                }
            }
            let proj_row = projection.row(v);
            reservoir.recurrent.matvec_into(neighbor_sum, row);
            for (r, p) in row.iter_mut().zip(proj_row) {
                *r = bounded_tanh(*r + p);
            }
        },
    );
}

/// Runs the state system for `iterations` steps from `initial` (the all-zeros
/// state when `None`), invoking `observer(k, states)` after every step.
pub fn iterate_embeddings<F>(
    reservoir: &Reservoir,
    graph: &Graph,
    features: &Matrix,
    initial: Option<&Matrix>,
    iterations: usize,
    mut observer: F,
) -> Result<Embeddings>
where
    F: FnMut(usize, &Matrix),
{
    check_dimensions(reservoir, graph, features)?;
    if iterations == 0 {
        return Err(Error::InvalidConfig("iterations must be >= 1".into()));
    }
    let n = graph.num_nodes();
    let h = reservoir.hidden_units();
    let mut current = match initial {
        Some(m) => {
            if m.rows() != n || m.cols() != h {
                return Err(Error::DimensionMismatch {
                    expected: n * h,
                    found: m.rows() * m.cols(),
                });
            }
            m.clone()
        }
        None => Matrix::zeros(n, h),
    };
    let projection = input_projection(reservoir, features);
    let mut next = Matrix::zeros(n, h);
    for k in 1..=iterations {
        step(reservoir, graph, &projection, &current, &mut next);
        std::mem::swap(&mut current, &mut next);
        observer(k, &current);
    }
    Ok(Embeddings::new(current, iterations))
}

/// Node embeddings after the configured number of iterations, starting from
/// the all-zeros state.
pub fn compute_embeddings(
    reservoir: &Reservoir,
    graph: &Graph,
    features: &Matrix,
) -> Result<Embeddings> {
    iterate_embeddings(
        reservoir,
        graph,
        features,
        None,
        reservoir.config.iterations,
        |_, _| {},
    )
}

/// Like [`compute_embeddings`] but from an explicit initial state and with the
/// max-norm update residual ‖h(k) − h(k−1)‖∞ recorded per iteration. Used to
/// check convergence towards a fixed point under contractive dynamics.
pub fn compute_embeddings_with_residuals(
    reservoir: &Reservoir,
    graph: &Graph,
    features: &Matrix,
    initial: Option<&Matrix>,
    iterations: usize,
) -> Result<(Embeddings, Vec<f64>)> {
    let n = graph.num_nodes();
    let h = reservoir.hidden_units();
    let mut prev = match initial {
        Some(m) => m.clone(),
        None => Matrix::zeros(n, h),
    };
    let mut residuals = Vec::with_capacity(iterations);
    let embeddings = iterate_embeddings(
        reservoir,
        graph,
        features,
        initial,
        iterations,
        |_, states| {
            residuals.push(crate::linalg::max_abs_diff(states.data(), prev.data()));
            prev = states.clone();
        },
    )?;
    Ok((embeddings, residuals))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(
        h: usize,
        radius: f64,
        scaling: f64,
        density: f64,
        k: usize,
        seed: u64,
    ) -> ReservoirConfig {
        ReservoirConfig {
            hidden_units: h,
            target_radius: radius,
            input_scaling: scaling,
            recurrent_density: density,
            iterations: k,
            seed,
        }
    }

    #[test]
    fn same_seed_gives_bit_identical_weights() {
        let cfg = config(32, 0.9, 0.5, 0.3, 5, 1234);
        let a = init_reservoir(&cfg, 7).unwrap();
        let b = init_reservoir(&cfg, 7).unwrap();
        assert_eq!(a.input_weights, b.input_weights);
        assert_eq!(a.recurrent, b.recurrent);
        assert_eq!(a.achieved_radius(), b.achieved_radius());
    }

    #[test]
    fn different_seed_gives_different_weights() {
        let a = init_reservoir(&config(32, 0.9, 0.5, 0.3, 5, 1), 7).unwrap();
        let b = init_reservoir(&config(32, 0.9, 0.5, 0.3, 5, 2), 7).unwrap();
        assert_ne!(a.input_weights, b.input_weights);
    }

    #[test]
    fn input_scaling_bounds_input_weights() {
        let res = init_reservoir(&config(16, 0.9, 0.25, 0.5, 5, 99), 10).unwrap();
        let max = res
            .input_weights()
            .data()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max <= 0.25);
        assert!(max > 0.2, "uniform draw should come close to the bound");
    }

    #[test]
    fn rescaled_radius_matches_dense_eigen_oracle() {
        // Oracle: eigenvalues of the materialized recurrent matrix, via an
        // iteration-capped Schur decomposition.
        let res = init_reservoir(&config(64, 0.9, 1.0, 0.1, 5, 7), 3).unwrap();
        let dense = res.recurrent().to_dense();
        let d = nalgebra::DMatrix::from_fn(64, 64, |i, j| dense.at(i, j));
        let rho = nalgebra::linalg::Schur::try_new(d, 1e-13, 200_000)
            .expect("Schur iteration did not converge")
            .complex_eigenvalues()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(rho >= 0.899 && rho <= 0.901, "oracle radius {rho}");
        assert!((res.achieved_radius() - 0.9).abs() / 0.9 <= 1e-3);
    }

    #[test]
    fn spectral_norm_dominates_radius() {
        let res = init_reservoir(&config(48, 1.5, 1.0, 0.2, 5, 21), 3).unwrap();
        assert!(res.spectral_norm() + 1e-9 >= res.achieved_radius());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(init_reservoir(&config(0, 0.9, 1.0, 0.5, 5, 0), 3).is_err());
        assert!(init_reservoir(&config(8, 0.0, 1.0, 0.5, 5, 0), 3).is_err());
        assert!(init_reservoir(&config(8, 0.9, 0.0, 0.5, 5, 0), 3).is_err());
        assert!(init_reservoir(&config(8, 0.9, 1.0, 0.0, 5, 0), 3).is_err());
        assert!(init_reservoir(&config(8, 0.9, 1.0, 1.0, 0, 0), 3).is_err());
        // Density below one expected nonzero per row.
        assert!(init_reservoir(&config(100, 0.9, 1.0, 0.001, 5, 0), 3).is_err());
        assert!(init_reservoir(&config(8, 0.9, 1.0, 1.0, 5, 0), 0).is_err());
    }

    #[test]
    fn one_iteration_ignores_adjacency() {
        let g = Graph::from_undirected_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let cfg = config(8, 2.0, 0.7, 0.5, 1, 5);
        let res = init_reservoir(&cfg, 3).unwrap();
        let features = Matrix::from_fn(4, 3, |i, j| (i as f64 + 1.0) * 0.1 - j as f64 * 0.05);
        let emb = compute_embeddings(&res, &g, &features).unwrap();
        for v in 0..4 {
            let expected: Vec<f64> = res
                .input_weights()
                .matvec(features.row(v))
                .iter()
                .map(|&x| x.tanh())
                .collect();
            for (a, b) in emb.states().row(v).iter().zip(&expected) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn edgeless_graph_embeddings_are_iteration_independent() {
        let g = Graph::from_undirected_edges(5, &[]).unwrap();
        let features = Matrix::from_fn(5, 2, |i, j| (i * 2 + j) as f64 * 0.1);
        let mut cfg = config(6, 0.9, 1.0, 0.5, 1, 3);
        let res1 = init_reservoir(&cfg, 2).unwrap();
        let e1 = compute_embeddings(&res1, &g, &features).unwrap();
        cfg.iterations = 17;
        let res17 = init_reservoir(&cfg, 2).unwrap();
        let e17 = compute_embeddings(&res17, &g, &features).unwrap();
        assert_eq!(e1.states(), e17.states());
    }

    #[test]
    fn matches_naive_scalar_iteration_on_path_graph() {
        // Independent nested-loop reference for the state recursion.
        let g = Graph::from_undirected_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let h = 2;
        let x_dim = 2;
        let k = 3;
        let input = Matrix::from_vec(h, x_dim, vec![0.3, -0.2, 0.1, 0.4]);
        let recurrent = CsrMatrix::from_triplets(
            h,
            h,
            vec![(0, 0, 0.2), (0, 1, -0.1), (1, 0, 0.05), (1, 1, 0.3)],
        )
        .unwrap();
        let features = Matrix::from_vec(3, x_dim, vec![1.0, 0.5, -0.5, 0.25, 0.0, -1.0]);
        let cfg = config(h, 0.3, 1.0, 1.0, k, 0);
        let res = Reservoir::from_parts(input.clone(), recurrent.clone(), cfg).unwrap();
        let emb = compute_embeddings(&res, &g, &features).unwrap();

        // Naive reference: explicit loops over nodes, units, and neighbours.
        let w_rec = recurrent.to_dense();
        let mut state = vec![vec![0.0f64; h]; 3];
        for _ in 0..k {
            let mut next = vec![vec![0.0f64; h]; 3];
            for v in 0..3 {
                for i in 0..h {
                    let mut pre = 0.0;
                    for j in 0..x_dim {
                        pre += input.at(i, j) * features.at(v, j);
                    }
                    for &u in g.neighbors(v) {
                        for j in 0..h {
                            pre += w_rec.at(i, j) * state[u][j];
                        }
                    }
                    next[v][i] = pre.tanh();
                }
            }
            state = next;
        }
        for v in 0..3 {
            for i in 0..h {
                assert!(
                    (emb.states().at(v, i) - state[v][i]).abs() < 1e-12,
                    "node {v} unit {i}"
                );
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected_before_compute() {
        let g = Graph::from_undirected_edges(3, &[(0, 1)]).unwrap();
        let res = init_reservoir(&config(4, 0.9, 1.0, 1.0, 2, 0), 3).unwrap();
        let bad_width = Matrix::zeros(3, 2);
        assert!(matches!(
            compute_embeddings(&res, &g, &bad_width),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
        let bad_rows = Matrix::zeros(2, 3);
        assert!(compute_embeddings(&res, &g, &bad_rows).is_err());
    }

    #[test]
    fn saturating_dynamics_stay_strictly_inside_unit_interval() {
        let g = Graph::from_undirected_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)])
            .unwrap();
        // Radius far beyond stability: pre-activations blow up and tanh
        // saturates hard.
        let res = init_reservoir(&config(16, 25.0, 1.0, 0.5, 100, 3), 2).unwrap();
        let features = Matrix::from_fn(6, 2, |i, _| 10.0 + i as f64);
        let emb = compute_embeddings(&res, &g, &features).unwrap();
        for &v in emb.states().data() {
            assert!(v > -1.0 && v < 1.0, "entry {v} escaped (-1, 1)");
        }
    }

    #[test]
    fn residual_trace_has_one_entry_per_iteration() {
        let g = Graph::from_undirected_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let res = init_reservoir(&config(4, 0.2, 0.5, 1.0, 6, 8), 2).unwrap();
        let features = Matrix::from_fn(4, 2, |i, j| 0.1 * (i + j) as f64);
        let (emb, residuals) =
            compute_embeddings_with_residuals(&res, &g, &features, None, 6).unwrap();
        assert_eq!(residuals.len(), 6);
        assert_eq!(emb.iterations_used(), 6);
        assert!(residuals.iter().all(|r| r.is_finite()));
    }
}
