//! Admissible paths on the de Bruijn graph of order `r`.

use thiserror::Error;

use crate::sequence::{concat_overlap, SeqError, Seq, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("a path of order {order} needs at least {order} symbols, got {got}")]
    TooShort { order: usize, got: usize },
    #[error("a path needs at least one state")]
    NoStates,
    #[error("states must all have the same length")]
    MixedLengths,
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("continuation starts at {found}, path ends at {expected}")]
    Discontinuous { expected: Seq, found: Seq },
}

/// A path `v_0, ..., v_n` of order-`r` states, stored as the overlap
/// concatenation `overline{v_0 ... v_n}` of length `r + n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    order: usize,
    symbols: Vec<Symbol>,
}

impl Path {
    pub fn from_symbols(order: usize, symbols: Vec<Symbol>) -> Result<Self, PathError> {
        if order == 0 || symbols.len() < order {
            return Err(PathError::TooShort {
                order,
                got: symbols.len(),
            });
        }
        Ok(Path { order, symbols })
    }

    /// Checks admissibility of consecutive states.
    pub fn from_states(states: &[Seq]) -> Result<Self, PathError> {
        let first = states.first().ok_or(PathError::NoStates)?;
        if states.iter().any(|s| s.len() != first.len()) {
            return Err(PathError::MixedLengths);
        }
        let eta = concat_overlap(states)?;
        Ok(Path {
            order: first.len(),
            symbols: eta.into_symbols(),
        })
    }

    /// The single-state path `[v0]`.
    pub fn trivial(v0: &Seq) -> Self {
        Path {
            order: v0.len(),
            symbols: v0.symbols().to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The overlap concatenation of the states.
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Number of transitions.
    pub fn steps(&self) -> usize {
        self.symbols.len() - self.order
    }

    pub fn state(&self, i: usize) -> Seq {
        Seq::from_slice(&self.symbols[i..i + self.order]).expect("order >= 1")
    }

    pub fn states(&self) -> Vec<Seq> {
        (0..=self.steps()).map(|i| self.state(i)).collect()
    }

    pub fn initial_state(&self) -> Seq {
        self.state(0)
    }

    pub fn final_state(&self) -> Seq {
        self.state(self.steps())
    }

    /// Symbols appended after the initial state, one per transition.
    pub fn moves(&self) -> &[Symbol] {
        &self.symbols[self.order..]
    }

    pub fn is_closed(&self) -> bool {
        self.initial_state() == self.final_state()
    }

    /// This path followed by `next`, which must start where this one ends.
    pub fn join(&self, next: &Path) -> Result<Path, PathError> {
        if next.order != self.order || next.initial_state() != self.final_state() {
            return Err(PathError::Discontinuous {
                expected: self.final_state(),
                found: next.initial_state(),
            });
        }
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(next.moves());
        Ok(Path {
            order: self.order,
            symbols,
        })
    }

    /// The time-reversed path `v_n*, ..., v_0*`.
    pub fn reversed(&self) -> Path {
        let mut symbols = self.symbols.clone();
        symbols.reverse();
        Path {
            order: self.order,
            symbols,
        }
    }

    /// A closed path rotated so that it starts at its `i`-th state.
    pub fn rotate(&self, i: usize) -> Path {
        assert!(self.is_closed(), "only closed paths can be rotated");
        let n = self.steps();
        let moves = self.moves();
        let mut symbols = self.state(i).into_symbols();
        for k in 0..n {
            symbols.push(moves[(i + k) % n]);
        }
        Path {
            order: self.order,
            symbols,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq;

    #[test]
    fn states_and_moves() {
        let p = Path::from_states(&[seq![0, 1], seq![1, 1], seq![1, 0]]).unwrap();
        assert_eq!(p.symbols(), &[0, 1, 1, 0]);
        assert_eq!(p.steps(), 2);
        assert_eq!(p.final_state(), seq![1, 0]);
        assert_eq!(p.moves(), &[1, 0]);
        assert!(Path::from_states(&[seq![0, 1], seq![0, 1]]).is_err());
    }

    #[test]
    fn rotation_of_closed_path() {
        let p = Path::from_symbols(1, vec![0, 1, 2, 0]).unwrap();
        let q = p.rotate(1);
        assert_eq!(q.symbols(), &[1, 2, 0, 1]);
        let p2 = Path::from_symbols(2, vec![0, 1, 0, 1]).unwrap();
        assert!(p2.is_closed());
        assert_eq!(p2.rotate(1).symbols(), &[1, 0, 1, 0]);
    }

    #[test]
    fn join_requires_continuity() {
        let a = Path::from_symbols(2, vec![0, 1, 1]).unwrap();
        let b = Path::from_symbols(2, vec![1, 1, 0]).unwrap();
        assert_eq!(a.join(&b).unwrap().symbols(), &[0, 1, 1, 0]);
        assert!(b.join(&a).is_err());
    }
}
