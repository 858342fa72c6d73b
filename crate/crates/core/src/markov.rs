//! Plain order-`r` Markov chains on `X^r`: simulation, stationary laws,
//! reversibility tests and the circuit representation.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gram::GramSpace;
use crate::path::Path;
use crate::sequence::{Seq, Symbol};

const ROW_TOL: f64 = 1e-9;
const REVERSIBLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("expected {expected} transition entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("row of state {state} sums to {sum}")]
    Row { state: Seq, sum: f64 },
    #[error("invalid probability {value} for transition {gram}")]
    Entry { gram: Seq, value: f64 },
    #[error("state {from} moves to {to}, which has no transitions")]
    Dangling { from: Seq, to: Seq },
    #[error("chain has {0} closed communicating classes; stationary law is not unique")]
    Reducible(usize),
    #[error("state {0} is outside the support of the chain")]
    OutsideSupport(Seq),
    #[error("stationary linear system is singular")]
    Singular,
    #[error("chain is not reversible: P({gram}) = {forward}, P(reversal) = {backward}")]
    NotReversible { gram: Seq, forward: f64, backward: f64 },
    #[error("symbol {0} has no macrostate")]
    Unmapped(Symbol),
    #[error("stride must be at least 1")]
    Stride,
    #[error("{0}")]
    Circuit(String),
}

/// Transition probabilities `p(a | u)` for every state `u ∈ X^r`, stored by
/// `(r+1)`-gram code `u·a`. States whose row is all zero lie outside the
/// support.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRChain {
    space: GramSpace,
    probs: Vec<f64>,
}

impl OrderRChain {
    pub fn new(alphabet: usize, order: usize, probs: Vec<f64>) -> Result<Self, ChainError> {
        let space = GramSpace::new(alphabet, order).ok_or(ChainError::Shape {
            expected: usize::MAX,
            got: probs.len(),
        })?;
        let top = order + 1;
        if probs.len() != space.count(top) {
            return Err(ChainError::Shape {
                expected: space.count(top),
                got: probs.len(),
            });
        }
        for (code, &p) in probs.iter().enumerate() {
            if !(p.is_finite() && (0.0..=1.0 + ROW_TOL).contains(&p)) {
                return Err(ChainError::Entry {
                    gram: space.decode(top, code),
                    value: p,
                });
            }
        }
        let chain = OrderRChain { space, probs };
        let n = chain.num_states();
        for u in 0..n {
            let sum: f64 = chain.row(u).iter().sum();
            if sum != 0.0 && (sum - 1.0).abs() > ROW_TOL {
                return Err(ChainError::Row {
                    state: chain.state(u),
                    sum,
                });
            }
            for (a, &p) in chain.row(u).iter().enumerate() {
                let v = (u * alphabet + a) % n;
                if p > 0.0 && !chain.supported(v) {
                    return Err(ChainError::Dangling {
                        from: chain.state(u),
                        to: chain.state(v),
                    });
                }
            }
        }
        Ok(chain)
    }

    /// Normalizes nonnegative gram weights `k(u a)` row by row.
    pub fn from_weights(alphabet: usize, order: usize, weights: &[f64]) -> Result<Self, ChainError> {
        let mut probs = weights.to_vec();
        for row in probs.chunks_mut(alphabet) {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                for p in row.iter_mut() {
                    *p /= sum;
                }
            }
        }
        OrderRChain::new(alphabet, order, probs)
    }

    pub fn alphabet_size(&self) -> usize {
        self.space.alphabet_size()
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn num_states(&self) -> usize {
        self.space.count(self.order())
    }

    pub fn state(&self, code: usize) -> Seq {
        self.space.decode(self.order(), code)
    }

    pub fn state_code(&self, u: &Seq) -> usize {
        self.space.encode(u.symbols())
    }

    /// `p(· | u)` over the appended symbol.
    pub fn row(&self, u: usize) -> &[f64] {
        let m = self.alphabet_size();
        &self.probs[u * m..(u + 1) * m]
    }

    /// Probabilities by `(r+1)`-gram code.
    pub fn gram_probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn supported(&self, u: usize) -> bool {
        self.row(u).iter().any(|&p| p > 0.0)
    }

    /// `p(v | u)`, zero for inadmissible pairs.
    pub fn transition(&self, u: &Seq, v: &Seq) -> f64 {
        if u.symbols()[1..] != v.symbols()[..v.len() - 1] {
            return 0.0;
        }
        self.row(self.state_code(u))[v.last() as usize]
    }

    /// Dense `m^r × m^r` transition matrix on all states.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.num_states();
        let m = self.alphabet_size();
        let mut t = DMatrix::zeros(n, n);
        for (g, &p) in self.probs.iter().enumerate() {
            t[(g / m, g % n)] += p;
        }
        t
    }

    /// Stationary distribution over state codes, supported on the unique
    /// closed communicating class.
    pub fn stationary(&self) -> Result<Vec<f64>, ChainError> {
        let n = self.num_states();
        let m = self.alphabet_size();
        let mut graph = DiGraph::<usize, ()>::new();
        let nodes: Vec<_> = (0..n).map(|u| graph.add_node(u)).collect();
        for (g, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                graph.add_edge(nodes[g / m], nodes[g % n], ());
            }
        }
        let mut class_of = vec![usize::MAX; n];
        let sccs = tarjan_scc(&graph);
        for (c, scc) in sccs.iter().enumerate() {
            for node in scc {
                class_of[graph[*node]] = c;
            }
        }
        let closed: Vec<&Vec<_>> = sccs
            .iter()
            .enumerate()
            .filter(|(c, scc)| {
                let u0 = graph[scc[0]];
                self.supported(u0)
                    && scc.iter().all(|node| {
                        graph
                            .neighbors(*node)
                            .all(|nb| class_of[graph[nb]] == *c)
                    })
            })
            .map(|(_, scc)| scc)
            .collect();
        if closed.len() != 1 {
            return Err(ChainError::Reducible(closed.len()));
        }
        let mut members: Vec<usize> = closed[0].iter().map(|node| graph[*node]).collect();
        members.sort_unstable();
        let k = members.len();
        let mut local = vec![usize::MAX; n];
        for (i, &u) in members.iter().enumerate() {
            local[u] = i;
        }
        // (T_C - I)^T π = 0 with the last equation replaced by Σπ = 1
        let mut a = DMatrix::zeros(k, k);
        for (i, &u) in members.iter().enumerate() {
            a[(i, i)] -= 1.0;
            for (s, &p) in self.row(u).iter().enumerate() {
                let v = (u * m + s) % n;
                if p > 0.0 {
                    a[(local[v], i)] += p;
                }
            }
        }
        for j in 0..k {
            a[(k - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(k);
        b[k - 1] = 1.0;
        let x = a.lu().solve(&b).ok_or(ChainError::Singular)?;
        let mut pi = vec![0.0; n];
        for (i, &u) in members.iter().enumerate() {
            pi[u] = x[i].max(0.0);
        }
        let total: f64 = pi.iter().sum();
        for p in &mut pi {
            *p /= total;
        }
        Ok(pi)
    }

    /// `P_π(u a) = π(u) p(a | u)` by `(r+1)`-gram code.
    pub fn gram_law(&self) -> Result<Vec<f64>, ChainError> {
        let pi = self.stationary()?;
        let m = self.alphabet_size();
        Ok(self
            .probs
            .iter()
            .enumerate()
            .map(|(g, &p)| pi[g / m] * p)
            .collect())
    }

    /// Simulates `n` transitions from `v0`.
    pub fn simulate(&self, v0: &Seq, n: usize, seed: u64) -> Result<Path, ChainError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.simulate_with(v0, n, &mut rng)
    }

    pub fn simulate_with<R: Rng + ?Sized>(
        &self,
        v0: &Seq,
        n: usize,
        rng: &mut R,
    ) -> Result<Path, ChainError> {
        if v0.len() != self.order() || v0.check_alphabet(self.alphabet_size()).is_err() {
            return Err(ChainError::OutsideSupport(v0.clone()));
        }
        let mut u = self.state_code(v0);
        if !self.supported(u) && n > 0 {
            return Err(ChainError::OutsideSupport(v0.clone()));
        }
        let m = self.alphabet_size();
        let states = self.num_states();
        let mut symbols = v0.symbols().to_vec();
        symbols.reserve(n);
        for _ in 0..n {
            let a = sample_index(self.row(u), rng);
            symbols.push(a as Symbol);
            u = (u * m + a) % states;
        }
        Ok(Path::from_symbols(self.order(), symbols).expect("order >= 1"))
    }
}

/// Draws an index with probability proportional to `weights`.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut pick = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            pick = i;
            if u < w {
                break;
            }
            u -= w;
        }
    }
    pick
}

/// Replaces every symbol by its macrostate.
pub fn lump(symbols: &[Symbol], partition: &[Symbol]) -> Result<Vec<Symbol>, ChainError> {
    symbols
        .iter()
        .map(|&s| {
            partition
                .get(s as usize)
                .copied()
                .ok_or(ChainError::Unmapped(s))
        })
        .collect()
}

/// Keeps indices `0, stride, 2 stride, …`.
pub fn subsample(symbols: &[Symbol], stride: usize) -> Result<Vec<Symbol>, ChainError> {
    if stride == 0 {
        return Err(ChainError::Stride);
    }
    Ok(symbols.iter().step_by(stride).copied().collect())
}

/// Whether `P_π(u) = P_π(u*)` on every `(r+1)`-gram, to 1e-10.
pub fn check_reversible_stationary(chain: &OrderRChain) -> Result<bool, ChainError> {
    Ok(reversibility_defect(chain)?.is_none())
}

fn reversibility_defect(chain: &OrderRChain) -> Result<Option<ChainError>, ChainError> {
    let law = chain.gram_law()?;
    let space = &chain.space;
    let top = chain.order() + 1;
    for (g, &p) in law.iter().enumerate() {
        let rev = space.reversed(space.flat(top, g)) - space.offset(top);
        if (p - law[rev]).abs() > REVERSIBLE_TOL {
            return Ok(Some(ChainError::NotReversible {
                gram: space.decode(top, g),
                forward: p,
                backward: law[rev],
            }));
        }
    }
    Ok(None)
}

/// The first closed path (shortest length first, then lexicographic start)
/// of length at most `max_len` on which
/// `p(v1|v0)⋯p(v0|vn) ≠ p(v0*|v1*)⋯p(vn*|v0*)` beyond 1e-10 relative.
pub fn kolmogorov_witness(chain: &OrderRChain, max_len: usize) -> Option<Path> {
    let n = chain.num_states();
    let m = chain.alphabet_size();
    let top = chain.order() + 1;
    let space = &chain.space;
    let rev: Vec<usize> = (0..space.count(top))
        .map(|g| space.reversed(space.flat(top, g)) - space.offset(top))
        .collect();
    let p = chain.gram_probs();

    struct Search<'a> {
        n: usize,
        m: usize,
        p: &'a [f64],
        rev: &'a [usize],
        start: usize,
        len: usize,
        moves: Vec<Symbol>,
    }
    impl Search<'_> {
        fn go(&mut self, u: usize, fwd: f64, bwd: f64) -> bool {
            if self.moves.len() == self.len {
                return u == self.start
                    && (fwd - bwd).abs() > REVERSIBLE_TOL * fwd.max(bwd);
            }
            for a in 0..self.m {
                let g = u * self.m + a;
                let f = fwd * self.p[g];
                let b = bwd * self.p[self.rev[g]];
                if f == 0.0 && b == 0.0 {
                    continue;
                }
                self.moves.push(a as Symbol);
                if self.go(g % self.n, f, b) {
                    return true;
                }
                self.moves.pop();
            }
            false
        }
    }

    for len in 1..=max_len {
        for start in 0..n {
            let mut s = Search {
                n,
                m,
                p,
                rev: &rev,
                start,
                len,
                moves: Vec::with_capacity(len),
            };
            if s.go(start, 1.0, 1.0) {
                let mut symbols = chain.state(start).into_symbols();
                symbols.extend(s.moves);
                return Some(Path::from_symbols(chain.order(), symbols).expect("order >= 1"));
            }
        }
    }
    None
}

/// Kolmogorov's criterion checked on every closed path up to `max_len`.
pub fn check_kolmogorov(chain: &OrderRChain, max_len: usize) -> bool {
    kolmogorov_witness(chain, max_len).is_none()
}

/// Default cycle-length cap `2(r+1) + 2`.
pub fn default_cycle_cap(order: usize) -> usize {
    2 * (order + 1) + 2
}

/// Edge weights `k_{uv} = π(u) p(v|u)` of a reversible chain, indexed by
/// `(r+1)`-gram code. They satisfy `k_{uv} = k_{v*u*}`, `k_u = k_{u*}` and
/// `Σ_u k_u = 1`.
pub fn reversible_walk_weights(chain: &OrderRChain) -> Result<Vec<f64>, ChainError> {
    if let Some(e) = reversibility_defect(chain)? {
        return Err(e);
    }
    chain.gram_law()
}

/// Weighted periodic circuits on `X`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitSet {
    circuits: Vec<(Vec<Symbol>, f64)>,
}

impl CircuitSet {
    pub fn new() -> Self {
        CircuitSet::default()
    }

    /// Adds one period of a circuit, e.g. `[a, b, c]` for `a→b→c→a`.
    pub fn add(&mut self, period: Vec<Symbol>, weight: f64) -> Result<(), ChainError> {
        if period.is_empty() {
            return Err(ChainError::Circuit("empty circuit".into()));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(ChainError::Circuit(format!("weight {weight} must be positive")));
        }
        self.circuits.push((period, weight));
        Ok(())
    }

    /// Adds every circuit together with its reversal at the same weight.
    pub fn symmetrized(&self) -> CircuitSet {
        let mut out = self.clone();
        for (period, w) in &self.circuits {
            let mut r = period.clone();
            r.reverse();
            out.circuits.push((r, *w));
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Symbol], f64)> {
        self.circuits.iter().map(|(p, w)| (p.as_slice(), *w))
    }

    /// `Σ_γ w_γ J_γ(u)`, where `J_γ` counts occurrences of `u` along one
    /// period of `γ` (cyclically).
    pub fn weight_of(&self, u: &[Symbol]) -> f64 {
        self.circuits
            .iter()
            .map(|(period, w)| {
                let n = period.len();
                let hits = (0..n)
                    .filter(|&i| u.iter().enumerate().all(|(k, &s)| period[(i + k) % n] == s))
                    .count();
                w * hits as f64
            })
            .sum()
    }

    /// `p(v | u) = Σ w_γ J_γ(overline{uv}) / Σ w_γ J_γ(u)`.
    pub fn transition(&self, u: &Seq, v: &Seq) -> Result<f64, ChainError> {
        let denom = self.weight_of(u.symbols());
        if denom == 0.0 {
            return Err(ChainError::Circuit(format!("state {u} lies on no circuit")));
        }
        if u.len() != v.len() || u.symbols()[1..] != v.symbols()[..v.len() - 1] {
            return Ok(0.0);
        }
        Ok(self.weight_of(u.pushed(v.last()).symbols()) / denom)
    }

    /// Unnormalized stationary weights `Σ w_γ J_γ(u)` on grams of length
    /// `len`, by gram code.
    pub fn stationary_weights(&self, alphabet: usize, len: usize) -> Vec<f64> {
        let space = GramSpace::new(alphabet, len).expect("small space");
        (0..space.count(len))
            .map(|code| self.weight_of(space.decode(len, code).symbols()))
            .collect()
    }

    /// The circuit process as an order-`r` chain.
    pub fn chain(&self, alphabet: usize, order: usize) -> Result<OrderRChain, ChainError> {
        let k = self.stationary_weights(alphabet, order + 1);
        OrderRChain::from_weights(alphabet, order, &k)
    }
}
