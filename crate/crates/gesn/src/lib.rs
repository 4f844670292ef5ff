//! Graph echo state networks for semi-supervised node classification.
//!
//! The model encodes every graph node with a randomly initialized, untrained
//! recursive reservoir and trains only a ridge-regression readout on top of
//! the frozen embeddings. Alongside the model, the crate ships the
//! diagnostics that explain when and why it works: homophily measures,
//! spectral-radius estimation, stability-regime classification, an input
//! sensitivity bound, shortest-path distributions, and a reproducible grid
//! search protocol.
//!
//! A minimal end-to-end run on synthetic data:
//!
//! ```
//! use gesn::datasets::sbm::{generate_sbm, SbmSpec};
//! use gesn::datasets::{stratified_splits, DEFAULT_SPLIT_FRACTIONS};
//! use gesn::reservoir::{compute_embeddings, init_reservoir, ReservoirConfig};
//! use gesn::readout::{accuracy, fit_ridge, predict};
//!
//! let (graph, data) = generate_sbm(&SbmSpec {
//!     num_nodes: 120,
//!     num_classes: 2,
//!     intra_edge_prob: 0.2,
//!     inter_edge_prob: 0.02,
//!     feature_dim: 8,
//!     feature_signal: 1.0,
//!     seed: 7,
//! })?;
//! let split = &stratified_splits(&data.labels, 2, 1, DEFAULT_SPLIT_FRACTIONS, 3)?[0];
//!
//! let config = ReservoirConfig {
//!     hidden_units: 64,
//!     target_radius: 0.9,
//!     input_scaling: 1.0,
//!     recurrent_density: ReservoirConfig::default_density(64),
//!     iterations: 8,
//!     seed: 42,
//! };
//! let reservoir = init_reservoir(&config, data.feature_dim())?;
//! let embeddings = compute_embeddings(&reservoir, &graph, &data.features)?;
//! let readout = fit_ridge(&embeddings, &data.labels, data.num_classes, &split.train, 1e-3)?;
//! let predictions = predict(&readout, &embeddings);
//! let test_accuracy = accuracy(&predictions, &data.labels, &split.test)?;
//! assert!(test_accuracy > 0.6);
//! # Ok::<(), gesn::Error>(())
//! ```

pub mod datasets;
pub mod diagnostics;
pub mod error;
pub mod export;
pub mod graph;
pub mod homophily;
pub mod linalg;
pub mod paths;
pub mod readout;
pub mod reservoir;
pub mod selection;
pub mod spectral;
pub mod summary;

pub use error::{Error, Result};
pub use graph::{Graph, NodeData, Split};
pub use linalg::{CsrMatrix, Matrix};
pub use paths::{shortest_path_distribution, PathDistribution};
pub use readout::{accuracy, fit_ridge, predict, RidgeReadout};
pub use reservoir::{compute_embeddings, init_reservoir, Embeddings, Reservoir, ReservoirConfig};
pub use spectral::{spectral_radius, RadiusEstimate};
