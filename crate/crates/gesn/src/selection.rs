//! Model selection and the experiment protocol: grid search over reservoir
//! hyperparameters with per-split seed averaging, single training runs, the
//! iteration/accuracy curve, and the radius×scaling accuracy surface.
//!
//! Reservoir radii are specified as multiples of 1/α and resolved against
//! the measured adjacency spectral radius at run time, which makes grids
//! transferable across graphs. Embeddings are reused across the λ sub-grid
//! (λ only touches the readout); every other reservoir parameter changes the
//! weights and forces a fresh draw.
//!
//! Every run's seed is derived from the master seed by a counter-based hash
//! of (split id, reservoir-config index, repetition) — see [`derive_seed`] —
//! so any single run can be reproduced in isolation and results do not
//! depend on scheduling or worker count.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeData, Split};
use crate::linalg::Matrix;
use crate::paths::shortest_path_distribution;
use crate::readout::{
    accumulate_ridge_stats, accuracy, fit_ridge, one_hot_targets, predict, solve_ridge,
    RidgeReadout,
};
use crate::reservoir::{
    compute_embeddings, init_reservoir, iterate_embeddings, Embeddings, ReservoirConfig,
};
use crate::spectral::spectral_radius;

/// How the number of state-system iterations K is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "value")]
pub enum KChoice {
    /// Use exactly this K.
    Fixed(usize),
    /// Set K to the 95th percentile of the shortest-path distribution + 1,
    /// enough iterations for messages to cross nearly every reachable pair.
    AutoPercentile95,
}

/// Resolves a [`KChoice`] against a concrete graph.
pub fn resolve_k(choice: KChoice, graph: &Graph) -> usize {
    match choice {
        KChoice::Fixed(k) => k,
        KChoice::AutoPercentile95 => shortest_path_distribution(graph).percentile(95.0) + 1,
    }
}

/// Counter-based per-run seed derivation (splitmix64 finalizer over a linear
/// combination of the coordinates). Runs can be re-executed individually and
/// in any order without changing their seeds.
pub fn derive_seed(master: u64, split_id: u64, config_index: u64, repetition: u64) -> u64 {
    let mut z = master
        .wrapping_add(split_id.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(config_index.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(repetition.wrapping_mul(0x94D0_49BB_1331_11EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hyperparameters of one model (no seed; seeds come from the protocol).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    pub units: usize,
    /// Reservoir spectral radius as a multiple of 1/α.
    pub radius_multiple: f64,
    pub input_scaling: f64,
    pub lambda: f64,
    /// Recurrent density; defaults to about ten nonzeros per row when absent.
    pub density: Option<f64>,
    pub iterations: KChoice,
}

impl ModelConfig {
    fn reservoir_config(&self, alpha: f64, k: usize, seed: u64) -> ReservoirConfig {
        ReservoirConfig {
            hidden_units: self.units,
            target_radius: self.radius_multiple / alpha,
            input_scaling: self.input_scaling,
            recurrent_density: self
                .density
                .unwrap_or_else(|| ReservoirConfig::default_density(self.units)),
            iterations: k,
            seed,
        }
    }
}

/// Grid over reservoir hyperparameters plus the protocol bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub units: Vec<usize>,
    /// Radii as multiples of 1/α.
    pub radius_multiples: Vec<f64>,
    pub input_scalings: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub iterations: KChoice,
    pub seeds_per_config: usize,
    /// Which scaffold splits of the dataset to run.
    pub split_ids: Vec<usize>,
    pub recurrent_density: Option<f64>,
    pub master_seed: u64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("units", self.units.is_empty()),
            ("radius_multiples", self.radius_multiples.is_empty()),
            ("input_scalings", self.input_scalings.is_empty()),
            ("lambdas", self.lambdas.is_empty()),
            ("split_ids", self.split_ids.is_empty()),
        ] {
            if empty {
                return Err(Error::InvalidConfig(format!("grid list {name} is empty")));
            }
        }
        if self.radius_multiples.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidConfig(
                "radius multiples must be positive".into(),
            ));
        }
        if self.seeds_per_config == 0 {
            return Err(Error::InvalidConfig("seeds_per_config must be >= 1".into()));
        }
        Ok(())
    }

    /// Reservoir configurations in deterministic grid order: units, then
    /// radius, then scaling.
    fn reservoir_grid(&self) -> Vec<(usize, f64, f64)> {
        let mut grid = Vec::new();
        for &units in &self.units {
            for &radius in &self.radius_multiples {
                for &scaling in &self.input_scalings {
                    grid.push((units, radius, scaling));
                }
            }
        }
        grid
    }
}

/// One (split, reservoir seed, λ) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub split_id: usize,
    /// Reservoir-config ordinal in grid order.
    pub config_index: usize,
    pub seed_index: usize,
    pub seed: u64,
    pub units: usize,
    pub radius_multiple: f64,
    pub target_radius: f64,
    pub input_scaling: f64,
    pub lambda: f64,
    pub train_accuracy: Option<f64>,
    pub val_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    #[serde(skip)]
    pub embed_seconds: f64,
    #[serde(skip)]
    pub fit_seconds: f64,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

/// Winning configuration for one split with its seed-averaged accuracies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedConfig {
    pub split_id: usize,
    pub config_index: usize,
    pub units: usize,
    pub radius_multiple: f64,
    pub input_scaling: f64,
    pub lambda: f64,
    pub mean_train_accuracy: f64,
    pub mean_val_accuracy: f64,
    pub mean_test_accuracy: f64,
    pub std_test_accuracy: f64,
    pub seeds_counted: usize,
}

/// Failure surfaced by the grid search, one per failed run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunFailure {
    pub split_id: usize,
    pub config_index: usize,
    pub seed: u64,
    pub error: String,
}

/// Full grid-search outcome: the per-run table plus the per-split selections
/// and the aggregate statistics, all recomputable from the table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub alpha: f64,
    pub k_used: usize,
    pub selected: Vec<SelectedConfig>,
    /// Mean over splits of the per-split mean test accuracy.
    pub mean_test_accuracy: Option<f64>,
    /// Sample standard deviation over splits (0 for a single split).
    pub std_test_accuracy: Option<f64>,
    pub failed_runs: usize,
    pub failures: Vec<RunFailure>,
    #[serde(skip)]
    pub runs: Vec<RunRecord>,
}

fn masked_accuracy(pred: &[usize], labels: &[usize], mask: &[bool]) -> Result<f64> {
    accuracy(pred, labels, mask)
}

/// Evaluates the λ sub-grid on shared embeddings: the sufficient statistics
/// are accumulated once, each λ adds its diagonal and solves.
fn evaluate_lambdas(
    data: &NodeData,
    split: &Split,
    embeddings: &Embeddings,
    lambdas: &[f64],
    base: &RunRecord,
    out: &mut [RunRecord],
) {
    debug_assert_eq!(lambdas.len(), out.len());
    let stats = one_hot_targets(&data.labels, data.num_classes).and_then(|targets| {
        accumulate_ridge_stats(embeddings.states(), &targets, &split.train, true)
    });
    let stats = match stats {
        Ok(s) => s,
        Err(e) => {
            for (li, slot) in out.iter_mut().enumerate() {
                let mut record = base.clone();
                record.lambda = lambdas[li];
                record.error = Some(e.to_string());
                *slot = record;
            }
            return;
        }
    };

    for (li, &lambda) in lambdas.iter().enumerate() {
        let mut record = base.clone();
        record.lambda = lambda;
        let t_fit = Instant::now();
        match solve_ridge(&stats, lambda) {
            Ok((weights, bias)) => {
                let readout = RidgeReadout::new(weights, bias, lambda);
                let pred = predict(&readout, embeddings);
                record.fit_seconds = t_fit.elapsed().as_secs_f64();
                let accs = (
                    masked_accuracy(&pred, &data.labels, &split.train),
                    masked_accuracy(&pred, &data.labels, &split.val),
                    masked_accuracy(&pred, &data.labels, &split.test),
                );
                match accs {
                    (Ok(tr), Ok(va), Ok(te)) => {
                        record.train_accuracy = Some(tr);
                        record.val_accuracy = Some(va);
                        record.test_accuracy = Some(te);
                    }
                    (tr, va, te) => {
                        let err = [tr.err(), va.err(), te.err()]
                            .into_iter()
                            .flatten()
                            .next()
                            .expect("one accuracy failed");
                        record.error = Some(err.to_string());
                    }
                }
            }
            Err(e) => {
                record.fit_seconds = t_fit.elapsed().as_secs_f64();
                record.error = Some(e.to_string());
            }
        }
        out[li] = record;
    }
}

/// Runs the full grid: for every split and reservoir configuration, averages
/// validation accuracy over `seeds_per_config` reservoir draws, selects the
/// configuration with the highest mean validation accuracy (ties break to
/// the first in grid order), and reports its seed-averaged test accuracy.
pub fn grid_search(
    grid: &GridSpec,
    graph: &Graph,
    data: &NodeData,
    splits: &[(usize, Split)],
) -> Result<ExperimentResult> {
    grid.validate()?;
    let mut chosen_splits = Vec::with_capacity(grid.split_ids.len());
    for &id in &grid.split_ids {
        let split = splits
            .iter()
            .find(|(k, _)| *k == id)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::InvalidConfig(format!("split id {id} not found")))?;
        chosen_splits.push((id, split));
    }

    let alpha_est = spectral_radius(graph);
    let alpha = alpha_est.value;
    if !(alpha > 0.0) {
        return Err(Error::InvalidConfig(
            "graph spectral radius is zero; radii in units of 1/alpha are undefined".into(),
        ));
    }
    let k = resolve_k(grid.iterations, graph);
    if k == 0 {
        return Err(Error::InvalidConfig("iterations must be >= 1".into()));
    }

    let reservoir_grid = grid.reservoir_grid();
    let n_rc = reservoir_grid.len();
    let n_lambda = grid.lambdas.len();
    let n_seeds = grid.seeds_per_config;
    let total_runs = chosen_splits.len() * n_rc * n_seeds * n_lambda;

    let placeholder = RunRecord {
        split_id: 0,
        config_index: 0,
        seed_index: 0,
        seed: 0,
        units: 0,
        radius_multiple: 0.0,
        target_radius: 0.0,
        input_scaling: 0.0,
        lambda: 0.0,
        train_accuracy: None,
        val_accuracy: None,
        test_accuracy: None,
        embed_seconds: 0.0,
        fit_seconds: 0.0,
        error: None,
    };
    let mut runs = vec![placeholder; total_runs];

    // One work item per (split, reservoir config, seed): the reservoir and
    // its embeddings are shared across the λ sub-grid.
    runs.par_chunks_mut(n_lambda)
        .enumerate()
        .for_each(|(item, out)| {
            let seed_idx = item % n_seeds;
            let rc_idx = (item / n_seeds) % n_rc;
            let split_pos = item / (n_seeds * n_rc);
            let (split_id, split) = chosen_splits[split_pos];
            let (units, radius_multiple, input_scaling) = reservoir_grid[rc_idx];
            let seed = derive_seed(
                grid.master_seed,
                split_id as u64,
                rc_idx as u64,
                seed_idx as u64,
            );
            let density = grid
                .recurrent_density
                .unwrap_or_else(|| ReservoirConfig::default_density(units));
            let cfg = ReservoirConfig {
                hidden_units: units,
                target_radius: radius_multiple / alpha,
                input_scaling,
                recurrent_density: density,
                iterations: k,
                seed,
            };
            let base = RunRecord {
                split_id,
                config_index: rc_idx,
                seed_index: seed_idx,
                seed,
                units,
                radius_multiple,
                target_radius: cfg.target_radius,
                input_scaling,
                lambda: 0.0,
                train_accuracy: None,
                val_accuracy: None,
                test_accuracy: None,
                embed_seconds: 0.0,
                fit_seconds: 0.0,
                error: None,
            };

            let t_embed = Instant::now();
            let embeddings = init_reservoir(&cfg, data.feature_dim())
                .and_then(|res| compute_embeddings(&res, graph, &data.features));
            match embeddings {
                Ok(embeddings) => {
                    let mut with_time = base;
                    with_time.embed_seconds = t_embed.elapsed().as_secs_f64();
                    evaluate_lambdas(data, split, &embeddings, &grid.lambdas, &with_time, out);
                }
                Err(e) => {
                    for (li, slot) in out.iter_mut().enumerate() {
                        let mut record = base.clone();
                        record.lambda = grid.lambdas[li];
                        record.embed_seconds = t_embed.elapsed().as_secs_f64();
                        record.error = Some(e.to_string());
                        *slot = record;
                    }
                }
            }
        });

    // Selection: per split, mean validation accuracy per (reservoir config, λ)
    // over seeds; failed runs are excluded from means and surfaced.
    let mut selected = Vec::new();
    for (split_pos, &(split_id, _)) in chosen_splits.iter().enumerate() {
        let mut best: Option<(usize, usize, f64)> = None; // (rc, li, mean_val)
        for rc in 0..n_rc {
            for li in 0..n_lambda {
                let mut val_sum = 0.0;
                let mut n_ok = 0usize;
                for s in 0..n_seeds {
                    let idx = (((split_pos * n_rc) + rc) * n_seeds + s) * n_lambda + li;
                    if let Some(v) = runs[idx].val_accuracy {
                        val_sum += v;
                        n_ok += 1;
                    }
                }
                if n_ok == 0 {
                    continue;
                }
                let mean_val = val_sum / n_ok as f64;
                let better = match best {
                    None => true,
                    Some((_, _, cur)) => mean_val > cur,
                };
                if better {
                    best = Some((rc, li, mean_val));
                }
            }
        }
        let Some((rc, li, mean_val)) = best else {
            continue; // every run of this split failed; surfaced below
        };
        let (units, radius_multiple, input_scaling) = reservoir_grid[rc];
        let mut tests = Vec::new();
        let mut trains = Vec::new();
        for s in 0..n_seeds {
            let idx = (((split_pos * n_rc) + rc) * n_seeds + s) * n_lambda + li;
            if let (Some(te), Some(tr)) = (runs[idx].test_accuracy, runs[idx].train_accuracy) {
                tests.push(te);
                trains.push(tr);
            }
        }
        let mean_test = tests.iter().sum::<f64>() / tests.len() as f64;
        let std_test = sample_std(&tests);
        let mean_train = trains.iter().sum::<f64>() / trains.len() as f64;
        selected.push(SelectedConfig {
            split_id,
            config_index: rc,
            units,
            radius_multiple,
            input_scaling,
            lambda: grid.lambdas[li],
            mean_train_accuracy: mean_train,
            mean_val_accuracy: mean_val,
            mean_test_accuracy: mean_test,
            std_test_accuracy: std_test,
            seeds_counted: tests.len(),
        });
    }

    let split_means: Vec<f64> = selected.iter().map(|s| s.mean_test_accuracy).collect();
    let mean_test_accuracy = (!split_means.is_empty())
        .then(|| split_means.iter().sum::<f64>() / split_means.len() as f64);
    let std_test_accuracy = (!split_means.is_empty()).then(|| sample_std(&split_means));

    let failures: Vec<RunFailure> = runs
        .iter()
        .filter_map(|r| {
            r.error.as_ref().map(|e| RunFailure {
                split_id: r.split_id,
                config_index: r.config_index,
                seed: r.seed,
                error: e.clone(),
            })
        })
        .collect();

    Ok(ExperimentResult {
        alpha,
        k_used: k,
        selected,
        mean_test_accuracy,
        std_test_accuracy,
        failed_runs: failures.len(),
        failures,
        runs,
    })
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Per-run CSV, one row per (split, config, seed, λ); header first, numbers
/// at full round-trip precision. Timing columns are the only fields expected
/// to differ between repeated executions.
pub fn runs_csv(result: &ExperimentResult) -> String {
    let mut out = String::from(
        "split_id,config_index,seed_index,seed,units,radius_multiple,target_radius,input_scaling,lambda,train_accuracy,val_accuracy,test_accuracy,embed_seconds,fit_seconds,wall_seconds,status\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &result.runs {
        let status = if r.succeeded() { "ok" } else { "failed" };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.split_id,
            r.config_index,
            r.seed_index,
            r.seed,
            r.units,
            r.radius_multiple,
            r.target_radius,
            r.input_scaling,
            r.lambda,
            opt(r.train_accuracy),
            opt(r.val_accuracy),
            opt(r.test_accuracy),
            r.embed_seconds,
            r.fit_seconds,
            r.embed_seconds + r.fit_seconds,
            status,
        ));
    }
    out
}

/// Deterministic summary (selected configs, aggregates, failures; no wall
/// times), identical byte-for-byte across executions and worker counts.
pub fn summary_json(grid: &GridSpec, result: &ExperimentResult) -> String {
    #[derive(Serialize)]
    struct Summary<'a> {
        grid: &'a GridSpec,
        alpha: f64,
        k_used: usize,
        selected: &'a [SelectedConfig],
        mean_test_accuracy: Option<f64>,
        std_test_accuracy: Option<f64>,
        num_runs: usize,
        failed_runs: usize,
        failures: &'a [RunFailure],
    }
    serde_json::to_string_pretty(&Summary {
        grid,
        alpha: result.alpha,
        k_used: result.k_used,
        selected: &result.selected,
        mean_test_accuracy: result.mean_test_accuracy,
        std_test_accuracy: result.std_test_accuracy,
        num_runs: result.runs.len(),
        failed_runs: result.failed_runs,
        failures: &result.failures,
    })
    .expect("summary serialization")
}

/// Copy of the node data with features replaced by a single constant column,
/// for the "graph structure only" ablation.
pub fn replace_features_constant(data: &NodeData) -> NodeData {
    NodeData {
        features: Matrix::from_fn(data.num_nodes(), 1, |_, _| 1.0),
        labels: data.labels.clone(),
        num_classes: data.num_classes,
    }
}

/// Outcome of a single train/evaluate run.
#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub alpha: f64,
    pub k_used: usize,
    pub target_radius: f64,
    pub seed: u64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
    pub embed_seconds: f64,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
    #[serde(skip)]
    pub predictions: Vec<usize>,
}

/// Like [`train_once`] but also hands back the reservoir, embeddings, and
/// fitted readout for export.
pub fn train_artifacts(
    graph: &Graph,
    data: &NodeData,
    split: &Split,
    model: &ModelConfig,
    seed: u64,
) -> Result<(
    TrainReport,
    crate::reservoir::Reservoir,
    Embeddings,
    crate::readout::RidgeReadout,
)> {
    let alpha_est = spectral_radius(graph);
    let alpha = alpha_est.value;
    if !(alpha > 0.0) {
        return Err(Error::InvalidConfig(
            "graph spectral radius is zero; radii in units of 1/alpha are undefined".into(),
        ));
    }
    let k = resolve_k(model.iterations, graph);
    let cfg = model.reservoir_config(alpha, k, seed);

    let t_embed = Instant::now();
    let reservoir = init_reservoir(&cfg, data.feature_dim())?;
    let embeddings = compute_embeddings(&reservoir, graph, &data.features)?;
    let embed_seconds = t_embed.elapsed().as_secs_f64();

    let t_fit = Instant::now();
    let readout = fit_ridge(
        &embeddings,
        &data.labels,
        data.num_classes,
        &split.train,
        model.lambda,
    )?;
    let fit_seconds = t_fit.elapsed().as_secs_f64();

    let t_predict = Instant::now();
    let predictions = predict(&readout, &embeddings);
    let predict_seconds = t_predict.elapsed().as_secs_f64();

    let report = TrainReport {
        alpha,
        k_used: k,
        target_radius: cfg.target_radius,
        seed,
        train_accuracy: accuracy(&predictions, &data.labels, &split.train)?,
        val_accuracy: accuracy(&predictions, &data.labels, &split.val)?,
        test_accuracy: accuracy(&predictions, &data.labels, &split.test)?,
        embed_seconds,
        fit_seconds,
        predict_seconds,
        predictions,
    };
    Ok((report, reservoir, embeddings, readout))
}

/// One embedding + fit + evaluate pass with the given seed. Timings separate
/// the untrained embedding phase from readout fitting and inference.
pub fn train_once(
    graph: &Graph,
    data: &NodeData,
    split: &Split,
    model: &ModelConfig,
    seed: u64,
) -> Result<TrainReport> {
    train_artifacts(graph, data, split, model, seed).map(|(report, _, _, _)| report)
}

/// One point of the iteration curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub k: usize,
    pub mean_test_accuracy: f64,
    /// Shortest-path ECD evaluated at distance k-1.
    pub ecd_at_k_minus_1: f64,
}

/// Test accuracy as a function of the iteration count K, averaged over
/// seeds, next to the shortest-path ECD at K-1. All requested K values are
/// taken from a single sweep to max(K), so the whole curve costs one long
/// run per seed.
pub fn iteration_curve(
    graph: &Graph,
    data: &NodeData,
    split: &Split,
    model: &ModelConfig,
    k_list: &[usize],
    num_seeds: usize,
    master_seed: u64,
) -> Result<Vec<CurvePoint>> {
    if k_list.is_empty() || k_list.contains(&0) {
        return Err(Error::InvalidConfig(
            "k list must be non-empty and positive".into(),
        ));
    }
    if num_seeds == 0 {
        return Err(Error::InvalidConfig("num_seeds must be >= 1".into()));
    }
    let alpha = spectral_radius(graph).value;
    if !(alpha > 0.0) {
        return Err(Error::InvalidConfig(
            "graph spectral radius is zero; radii in units of 1/alpha are undefined".into(),
        ));
    }
    let mut ks: Vec<usize> = k_list.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let k_max = *ks.last().unwrap();

    let paths = shortest_path_distribution(graph);

    let mut acc_by_k: Vec<f64> = vec![0.0; ks.len()];
    for rep in 0..num_seeds {
        let seed = derive_seed(master_seed, 0, 0, rep as u64);
        let cfg = model.reservoir_config(alpha, k_max, seed);
        let reservoir = init_reservoir(&cfg, data.feature_dim())?;
        let mut errors: Vec<Error> = Vec::new();
        let mut pos = 0usize;
        iterate_embeddings(
            &reservoir,
            graph,
            &data.features,
            None,
            k_max,
            |k, states| {
                if pos < ks.len() && ks[pos] == k {
                    let emb = Embeddings::new(states.clone(), k);
                    match fit_ridge(
                        &emb,
                        &data.labels,
                        data.num_classes,
                        &split.train,
                        model.lambda,
                    ) {
                        Ok(readout) => {
                            let pred = predict(&readout, &emb);
                            match accuracy(&pred, &data.labels, &split.test) {
                                Ok(a) => acc_by_k[pos] += a,
                                Err(e) => errors.push(e),
                            }
                        }
                        Err(e) => errors.push(e),
                    }
                    pos += 1;
                }
            },
        )?;
        if let Some(e) = errors.into_iter().next() {
            return Err(e);
        }
    }

    Ok(ks
        .iter()
        .enumerate()
        .map(|(pos, &k)| CurvePoint {
            k,
            mean_test_accuracy: acc_by_k[pos] / num_seeds as f64,
            ecd_at_k_minus_1: paths.ecd(k - 1),
        })
        .collect())
}

/// One cell of the radius×scaling accuracy surface.
#[derive(Debug, Clone, Serialize)]
pub struct HeatmapCell {
    pub radius_multiple: f64,
    pub input_scaling: f64,
    pub mean_test_accuracy: Option<f64>,
    pub failed_runs: usize,
}

/// Mean test accuracy per (radius multiple, input scaling) cell with the
/// remaining hyperparameters fixed. Cells run in parallel; output order is
/// row-major over the given lists.
pub fn heatmap(
    graph: &Graph,
    data: &NodeData,
    split: &Split,
    model: &ModelConfig,
    radius_multiples: &[f64],
    input_scalings: &[f64],
    num_seeds: usize,
    master_seed: u64,
) -> Result<Vec<HeatmapCell>> {
    if radius_multiples.is_empty() || input_scalings.is_empty() {
        return Err(Error::InvalidConfig(
            "heatmap lists must be non-empty".into(),
        ));
    }
    if num_seeds == 0 {
        return Err(Error::InvalidConfig("num_seeds must be >= 1".into()));
    }
    let cells: Vec<(usize, f64, f64)> = radius_multiples
        .iter()
        .enumerate()
        .flat_map(|(ri, &r)| {
            input_scalings
                .iter()
                .enumerate()
                .map(move |(si, &s)| (ri * input_scalings.len() + si, r, s))
        })
        .collect();

    cells
        .par_iter()
        .map(|&(cell_index, radius_multiple, input_scaling)| {
            let cell_model = ModelConfig {
                radius_multiple,
                input_scaling,
                ..model.clone()
            };
            let mut accs = Vec::new();
            let mut failed = 0usize;
            for rep in 0..num_seeds {
                let seed = derive_seed(master_seed, 0, cell_index as u64, rep as u64);
                match train_once(graph, data, split, &cell_model, seed) {
                    Ok(report) => accs.push(report.test_accuracy),
                    Err(_) => failed += 1,
                }
            }
            let mean = (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64);
            Ok(HeatmapCell {
                radius_multiple,
                input_scaling,
                mean_test_accuracy: mean,
                failed_runs: failed,
            })
        })
        .collect()
}
