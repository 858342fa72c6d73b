//! Parameters of the conjugate prior: stationary gram weights `w`, the
//! palindrome `β`, the reinforcement constant `c`, the initial state `v0`
//! and the history set.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::gram::GramSpace;
use crate::sequence::{count_occ, count_occ_followed, shortest_palindrome, HistorySet, HistoryViolation, Seq};

const REVERSIBILITY_TOL: f64 = 1e-12;
const STATIONARITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model:\n{}", join_violations(.0))]
    Invalid(Vec<ModelViolation>),
    #[error("gram tables for m = {m}, r = {r} are too large")]
    TooLarge { m: usize, r: usize },
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("gram {gram} has length {len}, at most {max} allowed")]
    GramLength { gram: Seq, len: usize, max: usize },
}

fn join_violations(v: &[ModelViolation]) -> String {
    v.iter()
        .map(|x| format!("  - {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelViolation {
    Degenerate(&'static str),
    InitialState(String),
    NegativeWeight { gram: Seq, value: f64 },
    Reversibility { gram: Seq, forward: f64, backward: f64 },
    Stationarity { state: Seq, outgoing: f64, incoming: f64 },
    Palindrome(String),
    Positivity { gram: Seq, value: f64 },
    Irreducible { from: Seq, to: Seq },
    History(HistoryViolation),
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelViolation::Degenerate(what) => write!(f, "{what}"),
            ModelViolation::InitialState(msg) => write!(f, "initial state: {msg}"),
            ModelViolation::NegativeWeight { gram, value } => {
                write!(f, "weight of {gram} is {value}, must be finite and >= 0")
            }
            ModelViolation::Reversibility {
                gram,
                forward,
                backward,
            } => write!(
                f,
                "not reversible: w{gram} = {forward} but w{} = {backward}",
                gram.reverse()
            ),
            ModelViolation::Stationarity {
                state,
                outgoing,
                incoming,
            } => write!(
                f,
                "not stationary at {state}: outgoing mass {outgoing}, incoming mass {incoming}"
            ),
            ModelViolation::Palindrome(msg) => write!(f, "palindrome: {msg}"),
            ModelViolation::Positivity { gram, value } => {
                write!(f, "w - c*J'_beta is {value} at gram {gram}, must be > 0")
            }
            ModelViolation::Irreducible { from, to } => {
                write!(f, "support of w is not irreducible: {to} unreachable from {from}")
            }
            ModelViolation::History(h) => write!(f, "histories: {h}"),
        }
    }
}

/// An unnormalized measure on `X^{r+1}`, stored by gram code.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryWeights {
    m: usize,
    r: usize,
    values: Vec<f64>,
}

impl StationaryWeights {
    pub fn uniform(m: usize, r: usize, value: f64) -> Self {
        StationaryWeights {
            m,
            r,
            values: vec![value; m.pow(r as u32 + 1)],
        }
    }

    /// `values[code]` for every `(r+1)`-gram, codes as in [`GramSpace`].
    pub fn from_values(m: usize, r: usize, values: Vec<f64>) -> Result<Self, ModelError> {
        let expected = m.pow(r as u32 + 1);
        if values.len() != expected {
            return Err(ModelError::WeightCount {
                expected,
                got: values.len(),
            });
        }
        Ok(StationaryWeights { m, r, values })
    }

    pub fn from_fn(m: usize, r: usize, mut f: impl FnMut(&Seq) -> f64) -> Self {
        let space = GramSpace::new(m, r).expect("small gram space");
        let values = (0..space.count(r + 1))
            .map(|code| f(&space.decode(r + 1, code)))
            .collect();
        StationaryWeights { m, r, values }
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn code(&self, u: &Seq) -> usize {
        u.symbols()
            .iter()
            .fold(0, |acc, &s| acc * self.m + s as usize)
    }

    /// `w(u)` for `u` in `X^{r+1}`.
    pub fn get(&self, u: &Seq) -> f64 {
        assert_eq!(u.len(), self.r + 1, "weights are indexed by (r+1)-grams");
        self.values[self.code(u)]
    }

    /// `w(z)` extended to shorter grams: the total weight of the `(r+1)`-grams
    /// having `z` as a prefix.
    pub fn marginal(&self, z: &Seq) -> Result<f64, ModelError> {
        let max = self.r + 1;
        if z.len() > max {
            return Err(ModelError::GramLength {
                gram: z.clone(),
                len: z.len(),
                max,
            });
        }
        let span = self.m.pow((max - z.len()) as u32);
        let start = self.code(z) * span;
        Ok(self.values[start..start + span].iter().sum())
    }

    /// Marginals of every gram of every length, indexed like `space`.
    pub(crate) fn marginal_table(&self, space: &GramSpace) -> Vec<f64> {
        let mut table = vec![0.0; space.total()];
        let top = self.r + 1;
        table[space.offset(top)..space.offset(top) + space.count(top)].copy_from_slice(&self.values);
        for l in (1..top).rev() {
            for code in 0..space.count(l) {
                let base = space.flat(l + 1, code * self.m);
                table[space.flat(l, code)] = table[base..base + self.m].iter().sum();
            }
        }
        table
    }
}

/// Unvalidated prior parameters. [`ModelParams::build`] checks every
/// constraint and precomputes the tables the walk needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub histories: HistorySet,
    pub weights: StationaryWeights,
    /// Defaults to the shortest palindrome starting with `v0`.
    pub beta: Option<Seq>,
    pub c: f64,
    pub v0: Seq,
}

impl ModelParams {
    pub fn new(histories: HistorySet, weights: StationaryWeights, c: f64, v0: Seq) -> Self {
        ModelParams {
            histories,
            weights,
            beta: None,
            c,
            v0,
        }
    }

    pub fn with_beta(mut self, beta: Seq) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn beta(&self) -> Seq {
        self.beta
            .clone()
            .unwrap_or_else(|| shortest_palindrome(&self.v0))
    }

    /// Every violated constraint; empty when the parameters are valid.
    pub fn validate(&self) -> Vec<ModelViolation> {
        let m = self.weights.m;
        let r = self.weights.r;
        let mut out = Vec::new();
        if m == 0 || r == 0 {
            out.push(ModelViolation::Degenerate("alphabet size and order must be positive"));
            return out;
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            out.push(ModelViolation::Degenerate("c must be positive and finite"));
        }
        if self.v0.len() != r {
            out.push(ModelViolation::InitialState(format!(
                "{} has length {}, order is {r}",
                self.v0,
                self.v0.len()
            )));
            return out;
        }
        if let Err(e) = self.v0.check_alphabet(m) {
            out.push(ModelViolation::InitialState(e.to_string()));
            return out;
        }
        out.extend(self.histories.validate(r, m).into_iter().map(ModelViolation::History));

        let Some(space) = GramSpace::new(m, r) else {
            out.push(ModelViolation::Degenerate("gram tables too large"));
            return out;
        };
        let top = r + 1;
        let w = &self.weights.values;
        for code in 0..space.count(top) {
            let value = w[code];
            if !(value >= 0.0 && value.is_finite()) {
                out.push(ModelViolation::NegativeWeight {
                    gram: space.decode(top, code),
                    value,
                });
                continue;
            }
            let rev = space.reversed(space.flat(top, code)) - space.offset(top);
            let back = w[rev];
            if code < rev && (value - back).abs() > REVERSIBILITY_TOL * value.abs().max(back.abs()) {
                out.push(ModelViolation::Reversibility {
                    gram: space.decode(top, code),
                    forward: value,
                    backward: back,
                });
            }
        }
        if !out.is_empty() {
            return out;
        }

        for state in 0..space.count(r) {
            let outgoing: f64 = (0..m).map(|a| w[state * m + a]).sum();
            let incoming: f64 = (0..m).map(|a| w[a * space.count(r) + state]).sum();
            if (outgoing - incoming).abs() > STATIONARITY_TOL * outgoing.abs().max(incoming.abs()) {
                out.push(ModelViolation::Stationarity {
                    state: space.decode(r, state),
                    outgoing,
                    incoming,
                });
            }
        }

        let beta = self.beta();
        if beta.check_alphabet(m).is_err() {
            out.push(ModelViolation::Palindrome(format!("{beta} uses symbols outside 0..{m}")));
        } else {
            if !beta.is_palindrome() {
                out.push(ModelViolation::Palindrome(format!("{beta} is not a palindrome")));
            }
            if !beta.starts_with(&self.v0) {
                out.push(ModelViolation::Palindrome(format!(
                    "{beta} does not start with v0 = {}",
                    self.v0
                )));
            }
            if !beta.ends_with(&self.v0.reverse()) {
                out.push(ModelViolation::Palindrome(format!(
                    "{beta} does not end with v0* = {}",
                    self.v0.reverse()
                )));
            }
            for code in 0..space.count(top) {
                let gram = space.decode(top, code);
                let j = count_occ(beta.symbols(), gram.symbols()) as f64;
                if w[code] == 0.0 && j == 0.0 {
                    continue;
                }
                let value = w[code] - self.c * j;
                if value <= 0.0 {
                    out.push(ModelViolation::Positivity { gram, value });
                }
            }
        }

        out.extend(self.irreducibility(&space));
        out
    }

    fn irreducibility(&self, space: &GramSpace) -> Vec<ModelViolation> {
        let m = self.weights.m;
        let r = self.weights.r;
        let n = space.count(r);
        let w = &self.weights.values;
        let mut touched = vec![false; n];
        let mut fwd = vec![Vec::new(); n];
        let mut bwd = vec![Vec::new(); n];
        for (code, &value) in w.iter().enumerate() {
            if value > 0.0 {
                let from = code / m;
                let to = code % n;
                touched[from] = true;
                touched[to] = true;
                fwd[from].push(to);
                bwd[to].push(from);
            }
        }
        let v0 = space.encode(self.v0.symbols());
        if !touched[v0] {
            return vec![ModelViolation::InitialState(format!(
                "{} lies outside the support of w",
                self.v0
            ))];
        }
        let reach = |adj: &[Vec<usize>]| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([v0]);
            seen[v0] = true;
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            seen
        };
        let forward = reach(&fwd);
        let backward = reach(&bwd);
        let mut out = Vec::new();
        for s in 0..n {
            if !touched[s] {
                continue;
            }
            if !forward[s] {
                out.push(ModelViolation::Irreducible {
                    from: self.v0.clone(),
                    to: space.decode(r, s),
                });
            } else if !backward[s] {
                out.push(ModelViolation::Irreducible {
                    from: space.decode(r, s),
                    to: self.v0.clone(),
                });
            }
        }
        out
    }

    pub fn build(self) -> Result<PriorModel, ModelError> {
        let m = self.weights.m;
        let r = self.weights.r;
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations));
        }
        let space = GramSpace::new(m, r).ok_or(ModelError::TooLarge { m, r })?;
        let beta = self.beta();
        let marginal = self.weights.marginal_table(&space);
        let mut beta_occ = vec![0.0; space.total()];
        let mut beta_followed = vec![0.0; space.total()];
        let mut start_rev = vec![false; space.total()];
        for l in 1..=r + 1 {
            for code in 0..space.count(l) {
                let z = space.decode(l, code);
                let flat = space.flat(l, code);
                beta_occ[flat] = count_occ(beta.symbols(), z.symbols()) as f64;
                beta_followed[flat] = count_occ_followed(beta.symbols(), z.symbols()) as f64;
                start_rev[flat] = l <= r && self.v0.starts_with(&z.reverse());
            }
        }
        let history_of = (0..space.count(r))
            .map(|code| {
                let f = self.histories.resolve(&space.decode(r, code));
                (f.len(), space.encode(f.symbols()))
            })
            .collect();
        Ok(PriorModel {
            v0_code: space.encode(self.v0.symbols()),
            beta,
            space,
            marginal,
            beta_occ,
            beta_followed,
            start_rev,
            history_of,
            params: self,
        })
    }
}

/// A validated prior, immutable and shareable across walks.
#[derive(Debug, Clone)]
pub struct PriorModel {
    params: ModelParams,
    beta: Seq,
    space: GramSpace,
    v0_code: usize,
    pub(crate) marginal: Vec<f64>,
    pub(crate) beta_occ: Vec<f64>,
    pub(crate) beta_followed: Vec<f64>,
    /// Whether the reversal of the gram is a prefix of `v0`.
    pub(crate) start_rev: Vec<bool>,
    /// Length and code of `f(v)` for each state code `v`.
    pub(crate) history_of: Vec<(usize, usize)>,
}

impl PriorModel {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn alphabet_size(&self) -> usize {
        self.space.alphabet_size()
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn space(&self) -> &GramSpace {
        &self.space
    }

    pub fn v0(&self) -> &Seq {
        &self.params.v0
    }

    pub(crate) fn v0_code(&self) -> usize {
        self.v0_code
    }

    pub fn beta(&self) -> &Seq {
        &self.beta
    }

    pub fn c(&self) -> f64 {
        self.params.c
    }

    pub fn histories(&self) -> &HistorySet {
        &self.params.histories
    }

    pub fn weights(&self) -> &StationaryWeights {
        &self.params.weights
    }

    /// `w(z)` for any gram of length `1..=r+1`.
    pub fn marginal_weight(&self, z: &Seq) -> Result<f64, ModelError> {
        self.params.weights.marginal(z)
    }

    /// `f(v)` for a state `v`.
    pub fn resolve(&self, v: &Seq) -> Seq {
        self.params.histories.resolve(v)
    }

    /// Same model with a different history set.
    pub fn with_histories(&self, histories: HistorySet) -> Result<PriorModel, ModelError> {
        ModelParams {
            histories,
            ..self.params.clone()
        }
        .build()
    }
}

/// Uniform weights `w(u) = w_value`, `β` the shortest palindrome from `v0`.
pub fn uniform_model(
    m: usize,
    r: usize,
    histories: HistorySet,
    v0: Seq,
    w_value: f64,
    c: f64,
) -> Result<PriorModel, ModelError> {
    ModelParams::new(histories, StationaryWeights::uniform(m, r, w_value), c, v0).build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq;
    use proptest::prelude::*;

    #[test]
    fn uniform_marginals() {
        let w = StationaryWeights::uniform(5, 2, 2.0);
        assert_eq!(w.marginal(&seq![3]).unwrap(), 50.0);
        assert_eq!(w.marginal(&seq![3, 1]).unwrap(), 10.0);
        assert_eq!(w.marginal(&seq![3, 1, 0]).unwrap(), 2.0);
        assert!(w.marginal(&seq![3, 1, 0, 0]).is_err());
        let q = StationaryWeights::uniform(2, 1, 0.25);
        assert_eq!(q.marginal(&seq![0]).unwrap(), 0.5);
    }

    #[test]
    fn example_priors_validate() {
        let ex1 = uniform_model(3, 2, HistorySet::new([seq![0], seq![2]]), seq![1, 1], 2.0, 1.0);
        assert!(ex1.is_ok());
        let ex2 = uniform_model(5, 2, HistorySet::empty(), seq![0, 4], 2.0, 1.0).unwrap();
        assert_eq!(ex2.beta(), &seq![0, 4, 0]);
    }

    #[test]
    fn positivity_violation_names_gram() {
        let err = uniform_model(3, 2, HistorySet::empty(), seq![0, 1], 1.0, 1.0).unwrap_err();
        let ModelError::Invalid(v) = err else { panic!() };
        assert!(v.iter().any(|x| matches!(
            x,
            ModelViolation::Positivity { gram, .. } if *gram == seq![0, 1, 0]
        )));
    }

    #[test]
    fn reversibility_violation() {
        let mut w = StationaryWeights::uniform(2, 1, 1.0);
        w.values[1] = 2.0; // w(0,1) != w(1,0)
        let v = ModelParams::new(HistorySet::empty(), w, 0.5, seq![0]).validate();
        assert!(v.iter().any(|x| matches!(x, ModelViolation::Reversibility { .. })));
    }

    #[test]
    fn irreducibility_violation() {
        // two disconnected self-loop cycles 0->0 and 1->1
        let w = StationaryWeights::from_values(2, 1, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let v = ModelParams::new(HistorySet::empty(), w, 0.5, seq![0]).validate();
        assert!(v.iter().any(|x| matches!(x, ModelViolation::Irreducible { .. })));
    }

    #[test]
    fn stationarity_violation() {
        // reversible but not stationary: w(0,0,1) = w(1,0,0) only
        let w = StationaryWeights::from_fn(2, 2, |u| {
            if *u == seq![0, 0, 1] || *u == seq![1, 0, 0] {
                1.0
            } else {
                0.0
            }
        });
        let v = ModelParams::new(HistorySet::empty(), w, 0.1, seq![0, 0]).validate();
        assert!(v.iter().any(|x| matches!(x, ModelViolation::Stationarity { .. })));
    }

    #[test]
    fn beta_constraints() {
        let w = StationaryWeights::uniform(3, 2, 2.0);
        let p = ModelParams::new(HistorySet::empty(), w, 1.0, seq![0, 1]);
        assert!(p.clone().with_beta(seq![0, 1, 2]).validate().iter().any(|x| matches!(x, ModelViolation::Palindrome(_))));
        assert!(p.clone().with_beta(seq![1, 0, 1]).validate().iter().any(|x| matches!(x, ModelViolation::Palindrome(_))));
        assert!(p.with_beta(seq![0, 1, 2, 1, 0]).validate().is_empty());
    }

    fn reversible_weights(m: usize, r: usize, raw: &[f64]) -> StationaryWeights {
        // symmetrized circuit weights: every gram of the closed sequence raw
        // walks through contributes, plus its reversal
        let space = GramSpace::new(m, r).unwrap();
        let mut values = vec![1.0; space.count(r + 1)];
        let period: Vec<u32> = raw.iter().map(|x| (*x as usize % m) as u32).collect();
        let n = period.len();
        for i in 0..n {
            let g: Vec<u32> = (0..=r).map(|k| period[(i + k) % n]).collect();
            let code = space.encode(&g);
            let rev = space.reversed(space.flat(r + 1, code)) - space.offset(r + 1);
            values[code] += 0.5;
            values[rev] += 0.5;
        }
        StationaryWeights::from_values(m, r, values).unwrap()
    }

    proptest! {
        #[test]
        fn marginal_symmetric_and_balanced(raw in prop::collection::vec(0.0..10.0f64, 1..12)) {
            let (m, r) = (3, 2);
            let w = reversible_weights(m, r, &raw);
            let params = ModelParams::new(HistorySet::empty(), w.clone(), 0.5, seq![0, 1]);
            prop_assert!(params.validate().is_empty(), "{:?}", params.validate());
            let space = GramSpace::new(m, r).unwrap();
            for l in 1..=r {
                for code in 0..space.count(l) {
                    let z = space.decode(l, code);
                    let mz = w.marginal(&z).unwrap();
                    prop_assert!((mz - w.marginal(&z.reverse()).unwrap()).abs() < 1e-9);
                    let right: f64 = (0..m as u32).map(|a| w.marginal(&z.pushed(a)).unwrap()).sum();
                    let left: f64 = (0..m as u32).map(|a| {
                        let mut s = vec![a];
                        s.extend_from_slice(z.symbols());
                        w.marginal(&Seq::new(s).unwrap()).unwrap()
                    }).sum();
                    prop_assert!((right - mz).abs() < 1e-9);
                    prop_assert!((left - mz).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn uniform_models_validate(m in 2usize..5, r in 1usize..4, v in prop::collection::vec(0u32..5, 3)) {
            let v0 = Seq::new(v.iter().take(r).map(|s| s % m as u32).collect()).unwrap();
            let h = HistorySet::closure([Seq::new(vec![0]).unwrap()], r, m);
            let beta = shortest_palindrome(&v0);
            let max_j = (0..m.pow(r as u32 + 1)).map(|code| {
                let g = GramSpace::new(m, r).unwrap().decode(r + 1, code);
                count_occ(beta.symbols(), g.symbols())
            }).max().unwrap() as f64;
            let c = 1.0;
            let w_value = c * max_j + 0.5;
            prop_assert!(uniform_model(m, r, h, v0, w_value, c).is_ok());
        }
    }
}
