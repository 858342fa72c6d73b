//! Model comparison and posterior summaries built on the reinforced walk.

mod eigen;

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use eigen::{eigenvalues, timescale, EigenError};

use crate::path::Path;
use crate::prior::PriorModel;
use crate::sequence::{Seq, Symbol};
use crate::walk::{log_evidence, WalkError, WalkState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("models are not comparable: {0}")]
    Mismatch(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no positive-weight path from {from} to {to}")]
    NoCompletion { from: Seq, to: Seq },
    #[error("{0} is not a closed path")]
    NotCycle(String),
    #[error("state {state} is reached with positive probability but has zero mass")]
    ZeroMass { state: Seq },
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

impl InferenceError {
    /// Whether the failure is a numerical precondition rather than bad input.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            InferenceError::Precondition(_) | InferenceError::NoCompletion { .. }
        )
    }
}

fn check_comparable(a: &PriorModel, b: &PriorModel) -> Result<(), InferenceError> {
    if a.alphabet_size() != b.alphabet_size() || a.order() != b.order() {
        return Err(InferenceError::Mismatch(format!(
            "alphabet/order {}/{} vs {}/{}",
            a.alphabet_size(),
            a.order(),
            b.alphabet_size(),
            b.order()
        )));
    }
    if a.v0() != b.v0() {
        return Err(InferenceError::Mismatch(format!(
            "initial states {} and {}",
            a.v0(),
            b.v0()
        )));
    }
    Ok(())
}

/// `ln H_1(path) - ln H_2(path)`.
pub fn log_bayes_factor(
    model1: &PriorModel,
    model2: &PriorModel,
    path: &Path,
) -> Result<f64, InferenceError> {
    check_comparable(model1, model2)?;
    Ok(log_evidence(model1, path)? - log_evidence(model2, path)?)
}

fn positive_successors(model: &PriorModel, state: usize) -> impl Iterator<Item = usize> + '_ {
    let space = model.space();
    let m = space.alphabet_size();
    let n = space.count(model.order());
    let w = model.weights().values();
    (0..m).filter_map(move |a| {
        let g = state * m + a;
        (w[g] > 0.0).then_some(g % n)
    })
}

fn bfs_path(model: &PriorModel, from: usize, to: usize) -> Option<Vec<Symbol>> {
    let m = model.alphabet_size();
    let n = model.space().count(model.order());
    let mut parent = vec![usize::MAX; n];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for v in positive_successors(model, u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    if parent[to] == usize::MAX {
        return None;
    }
    let mut moves = Vec::new();
    let mut v = to;
    while v != from {
        moves.push((v % m) as Symbol);
        v = parent[v];
    }
    moves.reverse();
    Some(moves)
}

/// The shortest closed path `v, ..., v0, ..., v` along positive-weight
/// grams (breadth-first, successors in symbol order). Trivial when `v = v0`.
pub fn completion_cycle(model: &PriorModel, v: &Seq) -> Result<Path, InferenceError> {
    let space = model.space();
    v.check_alphabet(model.alphabet_size())
        .map_err(|e| InferenceError::Mismatch(e.to_string()))?;
    if v.len() != model.order() {
        return Err(InferenceError::Mismatch(format!(
            "state {v} has length {}, order is {}",
            v.len(),
            model.order()
        )));
    }
    if v == model.v0() {
        return Ok(Path::trivial(v));
    }
    let vc = space.encode(v.symbols());
    let v0c = space.encode(model.v0().symbols());
    let no = |from: &Seq, to: &Seq| InferenceError::NoCompletion {
        from: from.clone(),
        to: to.clone(),
    };
    let there = bfs_path(model, vc, v0c).ok_or_else(|| no(v, model.v0()))?;
    let back = bfs_path(model, v0c, vc).ok_or_else(|| no(model.v0(), v))?;
    let mut symbols = v.symbols().to_vec();
    symbols.extend(there);
    symbols.extend(back);
    Ok(Path::from_symbols(model.order(), symbols).expect("non-empty"))
}

/// Rotation of a closed path that starts at `target`, searching from state
/// index `from` onwards.
fn rotate_to(path: &Path, target: &Seq, from: usize) -> Option<Path> {
    (from..path.steps().max(1))
        .chain(0..from)
        .find(|&i| &path.state(i) == target)
        .map(|i| if path.steps() == 0 { path.clone() } else { path.rotate(i) })
}

/// Prior expectation of `P_v^T(γ)` for a closed path `γ` from `v`, using the
/// shortest completion cycle through `v0`.
pub fn expected_cycle_probability(model: &PriorModel, cycle: &Path) -> Result<f64, InferenceError> {
    let sigma = completion_cycle(model, &cycle.initial_state())?;
    expected_cycle_probability_via(model, cycle, &sigma)
}

/// As [`expected_cycle_probability`] with an explicit completion `σ`: a
/// closed path from the cycle's first state that visits `v0`. The result does
/// not depend on the choice of `σ`.
///
/// With `A = γσ` rotated to start at `v0`, the expectation is
/// `H(A) · H_R(σ) / H_R(σσ)`, where `R` is the walk context after `A` with
/// the counts of `σσ` removed.
pub fn expected_cycle_probability_via(
    model: &PriorModel,
    cycle: &Path,
    sigma: &Path,
) -> Result<f64, InferenceError> {
    if cycle.order() != model.order() || sigma.order() != model.order() {
        return Err(InferenceError::Mismatch("path order differs from model order".into()));
    }
    if !cycle.is_closed() || cycle.steps() == 0 {
        return Err(InferenceError::NotCycle(format!("{:?}", cycle.symbols())));
    }
    if !sigma.is_closed() || sigma.initial_state() != cycle.initial_state() {
        return Err(InferenceError::NotCycle(format!(
            "completion {:?} from {}",
            sigma.symbols(),
            cycle.initial_state()
        )));
    }
    let c = model.c();
    let fresh = WalkState::new(model);
    for (code, w) in fresh.gram_weights().into_iter().enumerate() {
        if w <= 3.0 * c {
            return Err(InferenceError::Precondition(format!(
                "w'_0{} = {w} must exceed 3c = {}",
                model.space().decode(model.order() + 1, code),
                3.0 * c
            )));
        }
    }
    let v0 = model.v0();
    let a = cycle.join(sigma).expect("sigma starts where the cycle ends");
    let a = rotate_to(&a, v0, cycle.steps()).ok_or_else(|| {
        InferenceError::NotCycle(format!("completion does not visit v0 = {v0}"))
    })?;
    let s = rotate_to(sigma, v0, 0).expect("sigma visits v0");
    let ss = s.join(&s).expect("closed");

    let precondition = |e: WalkError| match e {
        WalkError::ZeroProbability { .. } => InferenceError::Precondition(format!(
            "reduced weights are not positive ({e})"
        )),
        other => other.into(),
    };
    let mut walk = WalkState::new(model);
    let ln_a = walk.observe(&a).map_err(precondition)?;
    walk.retract_closed(&ss)?;
    let ln_s = walk.log_probability(&s).map_err(precondition)?;
    let ln_ss = walk.log_probability(&ss).map_err(precondition)?;
    Ok((ln_a + ln_s - ln_ss).exp())
}

/// One approximate draw of the stationary law `P_π` on `(r+1)`-grams.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySample {
    pub index: usize,
    /// Total transitions of the walk that produced the sample.
    pub steps: u64,
    alphabet: usize,
    order: usize,
    /// Indexed by gram code.
    probs: Vec<f64>,
}

impl StationarySample {
    /// A law given directly by its values on `(r+1)`-gram codes.
    pub fn from_values(alphabet: usize, order: usize, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), alphabet.pow(order as u32 + 1));
        StationarySample {
            index: 0,
            steps: 0,
            alphabet,
            order,
            probs,
        }
    }

    /// `n^{-1} w'_n(u)` of a walk, normalized to sum to 1.
    pub fn from_walk(walk: &WalkState<'_>, index: usize) -> Self {
        let model = walk.model();
        let mut probs = walk.gram_weights();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        StationarySample {
            index,
            steps: walk.steps(),
            alphabet: model.alphabet_size(),
            order: model.order(),
            probs,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.probs
    }

    fn code(&self, symbols: &[Symbol]) -> usize {
        symbols
            .iter()
            .fold(0, |acc, &s| acc * self.alphabet + s as usize)
    }

    pub fn get(&self, u: &Seq) -> f64 {
        assert_eq!(u.len(), self.order + 1);
        self.probs[self.code(u.symbols())]
    }

    pub fn gram(&self, code: usize) -> Seq {
        let mut out = vec![0; self.order + 1];
        let mut c = code;
        for slot in out.iter_mut().rev() {
            *slot = (c % self.alphabet) as Symbol;
            c /= self.alphabet;
        }
        Seq::new(out).expect("non-empty")
    }

    /// Marginal distribution of the symbol at `position` (0-based) of the
    /// `(r+1)`-gram.
    pub fn lumped_marginal(&self, position: usize) -> Vec<f64> {
        assert!(position <= self.order, "position out of range");
        let m = self.alphabet;
        let stride = m.pow((self.order - position) as u32);
        let mut out = vec![0.0; m];
        for (code, p) in self.probs.iter().enumerate() {
            out[(code / stride) % m] += p;
        }
        out
    }
}

/// `k` independent walks of `n_steps` from `start` (a fresh prior walk or a
/// posterior after data), one stationary draw per walk. Walk `i` uses the
/// ChaCha8 stream `i` of `seed`, so results do not depend on thread count.
pub fn sample_posterior_stationary(
    start: &WalkState<'_>,
    n_steps: usize,
    k: usize,
    seed: u64,
) -> Vec<StationarySample> {
    (0..k)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut walk = start.clone();
            walk.run(n_steps, &mut rng);
            StationarySample::from_walk(&walk, i)
        })
        .collect()
}

/// Row-stochastic matrix on the order-`r` states with positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub alphabet: usize,
    pub states: Vec<Seq>,
    pub matrix: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn order(&self) -> usize {
        self.states.first().map_or(0, Seq::len)
    }

    pub fn index_of(&self, u: &Seq) -> Option<usize> {
        self.states.binary_search(u).ok()
    }

    /// `p(v | u)`; zero for states outside the matrix.
    pub fn get(&self, u: &Seq, v: &Seq) -> f64 {
        match (self.index_of(u), self.index_of(v)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => 0.0,
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<num_complex::Complex64>, EigenError> {
        eigenvalues(&self.matrix)
    }
}

/// `p(v | u) = P_π(overline{uv}) / P_π(u)` on states with `P_π(u) > 0`.
pub fn stationary_to_transition(s: &StationarySample) -> Result<TransitionMatrix, InferenceError> {
    let m = s.alphabet;
    let n = m.pow(s.order as u32);
    let mass: Vec<f64> = (0..n).map(|u| s.probs[u * m..(u + 1) * m].iter().sum()).collect();
    let mut index = vec![usize::MAX; n];
    let mut states = Vec::new();
    for (u, &p) in mass.iter().enumerate() {
        if p > 0.0 {
            index[u] = states.len();
            states.push(u);
        }
    }
    let mut matrix = DMatrix::zeros(states.len(), states.len());
    for (i, &u) in states.iter().enumerate() {
        for a in 0..m {
            let g = u * m + a;
            let p = s.probs[g];
            if p <= 0.0 {
                continue;
            }
            let v = g % n;
            if index[v] == usize::MAX {
                return Err(InferenceError::ZeroMass {
                    state: s.gram(g).drop_first().expect("r >= 1"),
                });
            }
            matrix[(i, index[v])] = p / mass[u];
        }
    }
    let states = states
        .into_iter()
        .map(|u| s.gram(u * m).drop_last().expect("r >= 1"))
        .collect();
    Ok(TransitionMatrix {
        alphabet: m,
        states,
        matrix,
    })
}

/// Equal-width histogram of `values` on `[lo, hi]`: `(bin centre, count)`.
/// Values outside the range are dropped.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<(f64, usize)> {
    assert!(bins > 0 && hi > lo);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in values {
        if x < lo || x > hi || !x.is_finite() {
            continue;
        }
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (lo + (b as f64 + 0.5) * width, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::uniform_model;
    use crate::seq;
    use crate::sequence::HistorySet;

    fn two_state(c: f64) -> PriorModel {
        uniform_model(2, 1, HistorySet::empty(), seq![0], 0.25, c).unwrap()
    }

    #[test]
    fn identical_models_have_zero_factor() {
        let m = two_state(1.0);
        let p = Path::from_symbols(1, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(log_bayes_factor(&m, &m, &p).unwrap(), 0.0);
        let other = uniform_model(2, 1, HistorySet::empty(), seq![1], 0.25, 1.0).unwrap();
        assert!(matches!(
            log_bayes_factor(&m, &other, &p),
            Err(InferenceError::Mismatch(_))
        ));
    }

    #[test]
    fn cycle_through_v0_is_walk_probability() {
        let m = two_state(0.05);
        let cyc = Path::from_symbols(1, vec![0, 1, 0]).unwrap();
        let e = expected_cycle_probability(&m, &cyc).unwrap();
        let h = log_evidence(&m, &cyc).unwrap().exp();
        assert!((e - h).abs() < 1e-15);
        // completion through the self-loop gives the same value
        let alt = Path::from_symbols(1, vec![0, 0]).unwrap();
        let e2 = expected_cycle_probability_via(&m, &cyc, &alt).unwrap();
        assert!((e - e2).abs() <= 1e-12 * e);
    }

    #[test]
    fn cycle_precondition() {
        let m = two_state(0.1);
        let cyc = Path::from_symbols(1, vec![1, 1]).unwrap();
        assert!(matches!(
            expected_cycle_probability(&m, &cyc),
            Err(InferenceError::Precondition(_))
        ));
    }

    #[test]
    fn completion_is_shortest() {
        let m = uniform_model(3, 2, HistorySet::empty(), seq![0, 0], 4.0, 1.0).unwrap();
        let s = completion_cycle(&m, &seq![1, 2]).unwrap();
        // (1,2) -> (2,0) -> (0,0) -> (0,1) -> (1,2)
        assert_eq!(s.symbols(), &[1, 2, 0, 0, 1, 2]);
    }

    #[test]
    fn uniform_law_gives_uniform_rows() {
        let s = StationarySample::from_values(3, 2, vec![1.0 / 27.0; 27]);
        let t = stationary_to_transition(&s).unwrap();
        assert_eq!(t.states.len(), 9);
        for i in 0..9 {
            let row: f64 = t.matrix.row(i).iter().sum();
            assert!((row - 1.0).abs() < 1e-15);
            assert_eq!(t.matrix.row(i).iter().filter(|&&x| x > 0.0).count(), 3);
        }
        let marg = s.lumped_marginal(0);
        assert!(marg.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn sampling_is_reproducible() {
        let m = two_state(1.0);
        let start = WalkState::new(&m);
        let a = sample_posterior_stationary(&start, 1000, 4, 9);
        let b = sample_posterior_stationary(&start, 1000, 4, 9);
        assert_eq!(a, b);
        for s in &a {
            let total: f64 = s.values().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn histogram_bins() {
        let h = histogram(&[0.0, 0.1, 0.5, 1.0, 2.0], 2, 0.0, 1.0);
        assert_eq!(h, vec![(0.25, 2), (0.75, 2)]);
    }
}
