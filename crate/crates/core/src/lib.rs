//! Bayesian analysis of variable-order reversible Markov chains.
//!
//! A conjugate prior on reversible chains of order `r` is given by a
//! reinforced random walk on the de Bruijn graph of `r`-grams. This crate
//! computes exact marginal likelihoods of observed trajectories under that
//! prior, Bayes factors between history sets, posterior samples of the
//! stationary measure, and posterior expectations of cycle probabilities,
//! along with ordinary Markov-chain utilities (stationary distributions,
//! spectra, reversibility checks).

pub mod counts;
pub mod formats;
pub mod gram;
pub mod inference;
pub mod markov;
pub mod metastable;
pub mod path;
pub mod prior;
pub mod sequence;
pub mod walk;

pub use counts::{CountsError, TransitionCounts};
pub use path::{Path, PathError};
pub use prior::{uniform_model, ModelError, ModelParams, ModelViolation, PriorModel, StationaryWeights};
pub use sequence::{HistorySet, Seq, SeqError, Symbol};
pub use walk::{log_evidence, simulate, WalkError, WalkState};
