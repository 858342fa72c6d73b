//! A clustered random walk whose lumped, subsampled trajectory is not
//! Markov, and the replicated model-comparison experiment built on it.
//!
//! Macrostates sit on a line `0 - 1 - … - (k-1)`. The slow macrostate (the
//! middle one) is a path of micro-states entered and left at opposite ends;
//! every other macrostate is a complete graph. Neighbouring macrostates are
//! joined by a single bridge edge and every micro-state has a self-loop.
//! After entering the slow macrostate the walk tends to leave on the side it
//! came from, so the lumped process remembers its last macrostate while it
//! is in the slow one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::inference::InferenceError;
use crate::markov::{lump, sample_index, subsample, ChainError, OrderRChain};
use crate::path::Path;
use crate::prior::{uniform_model, ModelError};
use crate::sequence::{HistorySet, Seq, Symbol};
use crate::walk::log_evidence;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("{0}")]
    Config(String),
}

/// Edge weights of the clustered graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MetastableGraph {
    pub n_macro: usize,
    pub n_micro: usize,
    /// Weight of the edges inside each complete macrostate.
    pub intra_weight: f64,
    /// Weight of the edges along the slow macrostate's path.
    pub path_weight: f64,
    pub bridge_weight: f64,
    pub self_loop: f64,
}

impl Default for MetastableGraph {
    fn default() -> Self {
        MetastableGraph {
            n_macro: 3,
            n_micro: 3,
            intra_weight: 4.0,
            path_weight: 1.0,
            bridge_weight: 8.0,
            self_loop: 1.0,
        }
    }
}

impl MetastableGraph {
    /// Index of the slow macrostate.
    pub fn slow(&self) -> usize {
        self.n_macro / 2
    }

    /// Random walk on the graph, and the micro → macro partition.
    pub fn chain(&self) -> Result<(OrderRChain, Vec<Symbol>), ChainError> {
        let weights = [self.intra_weight, self.path_weight, self.bridge_weight, self.self_loop];
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) || self.n_micro == 0 || self.n_macro == 0 {
            return Err(ChainError::Circuit(
                "metastable graph parameters must be positive".into(),
            ));
        }
        let k = self.n_micro;
        let n = k * self.n_macro;
        let mut w = vec![0.0; n * n];
        let mut edge = |i: usize, j: usize, x: f64| {
            w[i * n + j] += x;
            if i != j {
                w[j * n + i] += x;
            }
        };
        for mac in 0..self.n_macro {
            let base = mac * k;
            for i in 0..k {
                edge(base + i, base + i, self.self_loop);
            }
            if mac == self.slow() {
                for i in 0..k - 1 {
                    edge(base + i, base + i + 1, self.path_weight);
                }
            } else {
                for i in 0..k {
                    for j in i + 1..k {
                        edge(base + i, base + j, self.intra_weight);
                    }
                }
            }
            if mac + 1 < self.n_macro {
                // last micro-state of this macrostate to the first of the next
                edge(base + k - 1, base + k, self.bridge_weight);
            }
        }
        let partition = (0..n).map(|i| (i / k) as Symbol).collect();
        Ok((OrderRChain::from_weights(n, 1, &w)?, partition))
    }
}

/// The default surrogate graph with the given intra-macrostate weight and
/// sizes.
pub fn metastable_example_chain(
    intra_weight: f64,
    n_micro_per_macro: usize,
    n_macro: usize,
) -> Result<(OrderRChain, Vec<Symbol>), ChainError> {
    MetastableGraph {
        n_macro,
        n_micro: n_micro_per_macro,
        intra_weight,
        ..MetastableGraph::default()
    }
    .chain()
}

/// Parameters of the replicated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Example1Config {
    pub graph: MetastableGraph,
    pub stride: usize,
    /// Length of the lumped, subsampled observation.
    pub length: usize,
    pub order: usize,
    pub w: f64,
    pub c: f64,
    pub replications: usize,
}

impl Default for Example1Config {
    fn default() -> Self {
        Example1Config {
            graph: MetastableGraph::default(),
            stride: 10,
            length: 1000,
            order: 2,
            w: 2.0,
            c: 1.0,
            replications: 30,
        }
    }
}

/// Candidate history sets: first order, memory on one macrostate at a time,
/// and full order `r`.
pub fn example1_models(n_macro: usize, order: usize) -> Vec<(String, HistorySet)> {
    let m = n_macro;
    let mut out = vec![("first order".to_string(), HistorySet::all_singletons(m))];
    if order == 2 {
        for s in 0..m as Symbol {
            out.push((
                format!("memory on {s}"),
                HistorySet::singletons_except(m, &[s]),
            ));
        }
    }
    out.push((
        if order == 2 {
            "second order".to_string()
        } else {
            format!("order {order}")
        },
        HistorySet::empty(),
    ));
    out
}

/// The lumped, subsampled observation of one replication.
pub fn example1_observation(config: &Example1Config, seed: u64) -> Result<Vec<Symbol>, ExperimentError> {
    let (chain, partition) = config.graph.chain()?;
    let pi = chain.stationary()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = sample_index(&pi, &mut rng) as Symbol;
    let micro_steps = (config.length - 1) * config.stride;
    let path = chain.simulate_with(&Seq::new(vec![start]).expect("non-empty"), micro_steps, &mut rng)?;
    let lumped = lump(path.symbols(), &partition)?;
    Ok(subsample(&lumped, config.stride)?)
}

/// Log-evidence of each candidate model on one replication.
pub fn example1_replication(
    config: &Example1Config,
    seed: u64,
) -> Result<Vec<(String, f64)>, ExperimentError> {
    if config.length <= config.order {
        return Err(ExperimentError::Config(format!(
            "length {} must exceed the order {}",
            config.length, config.order
        )));
    }
    let obs = example1_observation(config, seed)?;
    let path = Path::from_symbols(config.order, obs).expect("length > order");
    let v0 = path.initial_state();
    example1_models(config.graph.n_macro, config.order)
        .into_iter()
        .map(|(name, h)| {
            let model = uniform_model(config.graph.n_macro, config.order, h, v0.clone(), config.w, config.c)?;
            let ev = log_evidence(&model, &path).map_err(InferenceError::from)?;
            Ok((name, ev))
        })
        .collect()
}

/// Per-replication evidences, replication `i` seeded by `seed + i`.
pub fn run_example1(
    config: &Example1Config,
    seed: u64,
) -> Result<Vec<Vec<(String, f64)>>, ExperimentError> {
    (0..config.replications)
        .into_par_iter()
        .map(|i| example1_replication(config, seed.wrapping_add(i as u64)))
        .collect()
}

/// Index of the best model in one replication (first on ties).
pub fn winner(evidences: &[(String, f64)]) -> usize {
    let mut best = 0;
    for (i, (_, e)) in evidences.iter().enumerate() {
        if *e > evidences[best].1 {
            best = i;
        }
    }
    best
}
