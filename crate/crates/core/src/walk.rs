//! The variable-order reinforced random walk.
//!
//! The walk keeps `N(z)` = overlapping occurrences of `z` in the trajectory
//! `η` for every gram of length `1..=r+1`, updated in `O(r)` per step. With
//! those counts
//!
//! ```text
//! w'(z)  = w(z) + c (N(z) + N(z*) - J'_β(z))
//! w''(z) = w(z) + c (N(z) - [η ends with z] + N(z*) - [z* prefix of v0] - J''_β(z))
//! ```
//!
//! and the walk moves from `v` by appending `a` with probability
//! `w'(f(v) a) / w''(f(v))`. Every prior and posterior quantity in this crate
//! is expressed through these two functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::path::Path;
use crate::prior::PriorModel;
use crate::sequence::{Seq, Symbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("path has order {found}, model has order {expected}")]
    OrderMismatch { expected: usize, found: usize },
    #[error("path starts at {found}, walk is at {expected}")]
    WrongStart { expected: Seq, found: Seq },
    #[error("symbol {symbol} at step {step} is outside the alphabet of size {size}")]
    Symbol { step: usize, symbol: Symbol, size: usize },
    #[error("transition {gram} at step {step} has probability zero")]
    ZeroProbability { step: usize, gram: Seq },
    #[error("gram {gram} has length {len}; w'' is defined for lengths 1..={max}")]
    GramLength { gram: Seq, len: usize, max: usize },
}

/// State of a walk: the current vertex and the gram counts of the trajectory
/// so far. Counts are signed so that a context can be reduced by a closed
/// path (see [`WalkState::retract_closed`]).
#[derive(Debug, Clone)]
pub struct WalkState<'m> {
    model: &'m PriorModel,
    counts: Vec<i64>,
    state: usize,
    steps: u64,
    scratch: Vec<f64>,
}

impl<'m> WalkState<'m> {
    /// A fresh walk at `v0` with `η = v0`.
    pub fn new(model: &'m PriorModel) -> Self {
        let space = model.space();
        let mut counts = vec![0i64; space.total()];
        let v0 = model.v0().symbols();
        for i in 0..v0.len() {
            for j in i + 1..=v0.len() {
                counts[space.flat_of(&v0[i..j])] += 1;
            }
        }
        WalkState {
            model,
            counts,
            state: model.v0_code(),
            steps: 0,
            scratch: vec![0.0; space.alphabet_size()],
        }
    }

    /// The walk after following `path` from `v0`.
    pub fn after(model: &'m PriorModel, path: &Path) -> Result<Self, WalkError> {
        let mut walk = WalkState::new(model);
        walk.observe(path)?;
        Ok(walk)
    }

    pub fn model(&self) -> &'m PriorModel {
        self.model
    }

    pub fn current_state(&self) -> Seq {
        self.model.space().decode(self.model.order(), self.state)
    }

    /// Transitions taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `N(z)`: overlapping occurrences of `z` in `η`.
    pub fn occurrences(&self, z: &Seq) -> i64 {
        self.counts[self.model.space().flat_of(z.symbols())]
    }

    fn wp(&self, flat: usize) -> f64 {
        let m = self.model;
        let rev = m.space().reversed(flat);
        let k = (self.counts[flat] + self.counts[rev]) as f64 - m.beta_occ[flat];
        m.marginal[flat] + m.c() * k
    }

    fn wpp(&self, l: usize, code: usize) -> f64 {
        let m = self.model;
        let space = m.space();
        let flat = space.flat(l, code);
        let rev = space.reversed(flat);
        let ends = (space.suffix_code(self.state, l) == code) as i64;
        let starts = m.start_rev[flat] as i64;
        let k = (self.counts[flat] - ends + self.counts[rev] - starts) as f64 - m.beta_followed[flat];
        m.marginal[flat] + m.c() * k
    }

    fn check_gram(&self, z: &Seq, max: usize) -> Result<(), WalkError> {
        if z.len() > max {
            return Err(WalkError::GramLength {
                gram: z.clone(),
                len: z.len(),
                max,
            });
        }
        z.check_alphabet(self.model.alphabet_size())
            .map_err(|_| WalkError::Symbol {
                step: 0,
                symbol: z.symbols().iter().copied().max().unwrap_or(0),
                size: self.model.alphabet_size(),
            })
    }

    /// `w'_η(z)` for `|z| <= r + 1`.
    pub fn w_prime(&self, z: &Seq) -> Result<f64, WalkError> {
        self.check_gram(z, self.model.order() + 1)?;
        Ok(self.wp(self.model.space().flat_of(z.symbols())))
    }

    /// `w''_η(z)` for `|z| <= r`.
    pub fn w_double_prime(&self, z: &Seq) -> Result<f64, WalkError> {
        self.check_gram(z, self.model.order())?;
        let space = self.model.space();
        Ok(self.wpp(z.len(), space.encode(z.symbols())))
    }

    /// `w'_η(u)` for every `(r+1)`-gram `u`, in gram-code order.
    pub fn gram_weights(&self) -> Vec<f64> {
        let space = self.model.space();
        let top = self.model.order() + 1;
        (0..space.count(top))
            .map(|code| self.wp(space.flat(top, code)))
            .collect()
    }

    /// Numerators `w'(f(v) a)` for each symbol `a`, and the denominator
    /// `w''(f(v))`; the numerators sum to the denominator.
    fn weights_into(&self, out: &mut [f64]) -> f64 {
        let (l, h) = self.model.history_of[self.state];
        let space = self.model.space();
        let m = space.alphabet_size();
        let base = space.flat(l + 1, h * m);
        for (a, slot) in out.iter_mut().enumerate() {
            *slot = self.wp(base + a);
        }
        self.wpp(l, h)
    }

    /// Probability of appending each symbol next.
    pub fn transition_distribution(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.model.alphabet_size()];
        let den = self.weights_into(&mut p);
        for x in &mut p {
            *x /= den;
        }
        p
    }

    /// `ln P(next symbol = a)`.
    pub fn log_transition(&self, a: Symbol) -> Result<f64, WalkError> {
        let m = self.model.alphabet_size();
        if a as usize >= m {
            return Err(WalkError::Symbol {
                step: self.steps as usize,
                symbol: a,
                size: m,
            });
        }
        let (l, h) = self.model.history_of[self.state];
        let space = self.model.space();
        let num = self.wp(space.flat(l + 1, h * m + a as usize));
        let den = self.wpp(l, h);
        if num <= 0.0 || den <= 0.0 {
            return Err(WalkError::ZeroProbability {
                step: self.steps as usize,
                gram: self.current_state().pushed(a),
            });
        }
        Ok(num.ln() - den.ln())
    }

    fn bump(&mut self, a: Symbol, delta: i64) {
        let space = self.model.space();
        let m = space.alphabet_size();
        let r = self.model.order();
        let g = self.state * m + a as usize;
        for l in 1..=r + 1 {
            self.counts[space.offset(l) + space.suffix_code(g, l)] += delta;
        }
        self.state = space.suffix_code(g, r);
    }

    /// Appends `a` without computing its probability.
    pub fn push(&mut self, a: Symbol) {
        self.bump(a, 1);
        self.steps += 1;
    }

    /// Appends `a` and returns the log-probability of doing so.
    pub fn advance(&mut self, a: Symbol) -> Result<f64, WalkError> {
        let lp = self.log_transition(a)?;
        self.push(a);
        Ok(lp)
    }

    /// Samples the next symbol and appends it.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Symbol {
        let mut buf = std::mem::take(&mut self.scratch);
        self.weights_into(&mut buf);
        let total: f64 = buf.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = buf.len() - 1;
        for (a, &x) in buf.iter().enumerate() {
            if x > 0.0 {
                if u < x {
                    pick = a;
                    break;
                }
                u -= x;
                pick = a;
            }
        }
        self.scratch = buf;
        self.push(pick as Symbol);
        pick as Symbol
    }

    /// Takes `n` random steps, recording the path from the current state.
    pub fn simulate<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Path {
        let mut symbols = self.current_state().into_symbols();
        symbols.reserve(n);
        for _ in 0..n {
            symbols.push(self.step(rng));
        }
        Path::from_symbols(self.model.order(), symbols).expect("order >= 1")
    }

    /// Takes `n` random steps without recording them.
    pub fn run<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) {
        for _ in 0..n {
            self.step(rng);
        }
    }

    fn check_path(&self, path: &Path) -> Result<(), WalkError> {
        if path.order() != self.model.order() {
            return Err(WalkError::OrderMismatch {
                expected: self.model.order(),
                found: path.order(),
            });
        }
        let start = path.initial_state();
        if self.model.space().encode(start.symbols()) != self.state
            || start.check_alphabet(self.model.alphabet_size()).is_err()
        {
            return Err(WalkError::WrongStart {
                expected: self.current_state(),
                found: start,
            });
        }
        Ok(())
    }

    /// Follows `path` (which must start at the current state) and returns its
    /// log-probability; the walk ends at the path's final state.
    pub fn observe(&mut self, path: &Path) -> Result<f64, WalkError> {
        self.check_path(path)?;
        let mut total = 0.0;
        for &a in path.moves() {
            total += self.advance(a)?;
        }
        Ok(total)
    }

    /// Log-probability of following `path` from here, leaving `self` unchanged.
    pub fn log_probability(&self, path: &Path) -> Result<f64, WalkError> {
        self.clone().observe(path)
    }

    /// Removes the gram counts contributed by a closed path through the
    /// current state. Counts may become negative; the state is unchanged.
    pub fn retract_closed(&mut self, path: &Path) -> Result<(), WalkError> {
        self.check_path(path)?;
        if !path.is_closed() {
            return Err(WalkError::WrongStart {
                expected: path.initial_state(),
                found: path.final_state(),
            });
        }
        for &a in path.moves() {
            self.bump(a, -1);
        }
        Ok(())
    }
}

/// `ln P(η)` for a path from `v0`.
pub fn log_evidence(model: &PriorModel, path: &Path) -> Result<f64, WalkError> {
    WalkState::new(model).observe(path)
}

/// Simulates `n` steps of the walk from `v0` with a ChaCha8 stream seeded
/// by `seed`.
pub fn simulate(model: &PriorModel, n: usize, seed: u64) -> Path {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WalkState::new(model).simulate(n, &mut rng)
}
