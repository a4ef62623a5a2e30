//! Profile undirected graphical models.
//!
//! A profile graph describes how the conditional-independence structure of a
//! response vector changes across the levels of an external factor. This
//! crate provides the graph type and its label-indexed separation queries,
//! the enumeration of the Markov properties it induces together with its
//! compatible two-block LWF chain graphs, a Gaussian parameterisation fitted
//! by spike-and-slab EM, a simulation generator and edge-recovery metrics.

pub mod bayes_em;
pub mod error;
pub mod evaluation;
pub mod gaussian;
pub mod io;
pub mod linalg;
pub mod markov;
pub mod profile_graph;
pub mod scalar;
pub mod simulation;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use profile_graph::{EdgeClass, LevelSet, MultipleGraphs, ProfileGraph, StateSpace, VertexKind};
pub use scalar::Real;

pub use bayes_em::{EmState, FitConfig, Hyperparameters, PosteriorSummaries};
pub use gaussian::{GaussianProfileParams, ProfileDataset};

/// Double-precision aliases for the generic numeric types.
pub type Params = GaussianProfileParams<f64>;
pub type Dataset = ProfileDataset<f64>;
pub type Summaries = PosteriorSummaries<f64>;
pub type Hyper = Hyperparameters<f64>;
pub type Fit = EmState<f64>;
