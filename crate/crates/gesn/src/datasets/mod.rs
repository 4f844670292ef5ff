//! Dataset ingestion and synthesis.
//!
//! On-disk format, one directory per task:
//!
//! * `edges.tsv` — two whitespace-separated 0-based node indices per line;
//! * `features.csv` — one row per node, comma-separated reals;
//! * `labels.csv` — one integer per line;
//! * `split_<k>.json` — `{"train": [...], "val": [...], "test": [...]}`
//!   integer index arrays, one file per scaffold split.
//!
//! Loading symmetrizes the edge list (self-loops are kept, never added) and
//! validates every structural invariant, reporting file and line on failure.
//! [`sbm::generate_sbm`] synthesizes graphs with controllable homophily so
//! the whole pipeline is testable without downloading benchmarks.

mod loader;
pub mod sbm;

pub use loader::{load_dataset, write_dataset, Dataset, LoadError};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Split;

/// Scaffold proportions used for synthetic data: 48% train, 32% validation,
/// 20% test.
pub const DEFAULT_SPLIT_FRACTIONS: (f64, f64, f64) = (0.48, 0.32, 0.20);

/// Stratified splits: each class is shuffled and divided by the given
/// fractions (train and validation sizes round down, the remainder is test).
/// Split `k` shuffles with seed `seed + k·0x9E3779B97F4A7C15`, so individual
/// splits are reproducible in isolation.
pub fn stratified_splits(
    labels: &[usize],
    num_classes: usize,
    num_splits: usize,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<Vec<Split>> {
    let (f_train, f_val, f_test) = fractions;
    if !(f_train > 0.0 && f_val >= 0.0 && f_test >= 0.0) {
        return Err(Error::InvalidConfig(
            "split fractions must be positive".into(),
        ));
    }
    if f_train + f_val + f_test > 1.0 + 1e-9 {
        return Err(Error::InvalidConfig("split fractions exceed 1".into()));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &y) in labels.iter().enumerate() {
        if y >= num_classes {
            return Err(Error::InvalidConfig(format!(
                "label {y} out of range for {num_classes} classes"
            )));
        }
        by_class[y].push(i);
    }

    let mut splits = Vec::with_capacity(num_splits);
    for k in 0..num_splits {
        let split_seed = seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
        let n = labels.len();
        let (mut train, mut val, mut test) = (vec![false; n], vec![false; n], vec![false; n]);
        for class_nodes in &by_class {
            let mut nodes = class_nodes.clone();
            nodes.shuffle(&mut rng);
            let n_train = (nodes.len() as f64 * f_train).floor() as usize;
            let n_val = (nodes.len() as f64 * f_val).floor() as usize;
            for (pos, &i) in nodes.iter().enumerate() {
                if pos < n_train {
                    train[i] = true;
                } else if pos < n_train + n_val {
                    val[i] = true;
                } else {
                    test[i] = true;
                }
            }
        }
        splits.push(Split::new(train, val, test)?);
    }
    Ok(splits)
}
