//! Transition counts between order-`r` states, and the reconstruction of a
//! path with given counts.
//!
//! The evidence of a path depends only on `v0` and the counts, so a count
//! table is as good as a trajectory: [`TransitionCounts::realize`] produces
//! some path with exactly those counts (an Eulerian trail of the count
//! multigraph), and any such path has the same probability.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::path::Path;
use crate::sequence::{is_admissible_pair, Seq, SeqError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountsError {
    #[error("states {from} and {to} do not overlap")]
    Inadmissible { from: Seq, to: Seq },
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("state {state} has length {len}, order is {order}")]
    Order { state: Seq, len: usize, order: usize },
    #[error("no path from {v0} has these counts: {reason}")]
    Infeasible { v0: Seq, reason: String },
}

/// `count[(u, v)]` = number of `u -> v` transitions, together with the
/// initial state `v0` the path started from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCounts {
    order: usize,
    v0: Seq,
    counts: BTreeMap<(Seq, Seq), u64>,
}

impl TransitionCounts {
    pub fn new(v0: Seq) -> Self {
        TransitionCounts {
            order: v0.len(),
            v0,
            counts: BTreeMap::new(),
        }
    }

    pub fn from_path(path: &Path) -> Self {
        let mut out = TransitionCounts::new(path.initial_state());
        let states = path.states();
        for pair in states.windows(2) {
            *out.counts
                .entry((pair[0].clone(), pair[1].clone()))
                .or_insert(0) += 1;
        }
        out
    }

    /// Adds `n` transitions `u -> v`.
    pub fn add(&mut self, u: Seq, v: Seq, n: u64) -> Result<(), CountsError> {
        for s in [&u, &v] {
            if s.len() != self.order {
                return Err(CountsError::Order {
                    state: s.clone(),
                    len: s.len(),
                    order: self.order,
                });
            }
        }
        if !is_admissible_pair(&u, &v)? {
            return Err(CountsError::Inadmissible { from: u, to: v });
        }
        if n > 0 {
            *self.counts.entry((u, v)).or_insert(0) += n;
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn v0(&self) -> &Seq {
        &self.v0
    }

    pub fn get(&self, u: &Seq, v: &Seq) -> u64 {
        self.counts
            .get(&(u.clone(), v.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Seq, &Seq, u64)> {
        self.counts.iter().map(|((u, v), &n)| (u, v, n))
    }

    /// Largest symbol used, if any.
    pub fn max_symbol(&self) -> u32 {
        self.counts
            .keys()
            .flat_map(|(u, v)| u.symbols().iter().chain(v.symbols()))
            .chain(self.v0.symbols())
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// `C(u, v) = count(u -> v) + count(v* -> u*)`, the statistic the
    /// evidence depends on (with `v0`).
    pub fn c_statistic(&self) -> BTreeMap<(Seq, Seq), u64> {
        let mut out = BTreeMap::new();
        for ((u, v), &n) in &self.counts {
            *out.entry((u.clone(), v.clone())).or_insert(0) += n;
            *out.entry((v.reverse(), u.reverse())).or_insert(0) += n;
        }
        out
    }

    /// The state the path must end at, derived from degree balance.
    pub fn final_state(&self) -> Result<Seq, CountsError> {
        let mut net: BTreeMap<&Seq, i64> = BTreeMap::new();
        for ((u, v), &n) in &self.counts {
            *net.entry(u).or_insert(0) += n as i64;
            *net.entry(v).or_insert(0) -= n as i64;
        }
        let infeasible = |reason: String| CountsError::Infeasible {
            v0: self.v0.clone(),
            reason,
        };
        let mut end = None;
        for (&s, &d) in &net {
            let start_surplus = if *s == self.v0 { 1 } else { 0 };
            match d {
                0 => {}
                1 if start_surplus == 1 => {}
                -1 if end.is_none() => end = Some(s.clone()),
                _ => {
                    return Err(infeasible(format!(
                        "state {s} has out-degree minus in-degree {d}"
                    )))
                }
            }
        }
        let v0_net = net.get(&self.v0).copied().unwrap_or(0);
        match (v0_net, end) {
            (0, None) => Ok(self.v0.clone()),
            (1, Some(e)) => Ok(e),
            (1, None) => Err(infeasible(format!(
                "{} has surplus 1 but no state has a deficit",
                self.v0
            ))),
            (_, Some(e)) => Err(infeasible(format!(
                "state {e} has a deficit but {} has no surplus",
                self.v0
            ))),
            (d, None) => Err(infeasible(format!("{} has surplus {d}", self.v0))),
        }
    }

    /// Some path from `v0` whose transition counts are exactly these.
    ///
    /// Iterative Hierholzer; successors are taken in symbol order, so the
    /// result is deterministic.
    pub fn realize(&self) -> Result<Path, CountsError> {
        self.final_state()?;
        let mut remaining: BTreeMap<Seq, Vec<(Seq, u64)>> = BTreeMap::new();
        for ((u, v), &n) in &self.counts {
            remaining.entry(u.clone()).or_default().push((v.clone(), n));
        }
        let mut stack = vec![self.v0.clone()];
        let mut trail = Vec::new();
        while let Some(u) = stack.last() {
            let next = remaining.get_mut(u).and_then(|out| {
                let slot = out.iter_mut().find(|(_, n)| *n > 0)?;
                slot.1 -= 1;
                Some(slot.0.clone())
            });
            match next {
                Some(v) => stack.push(v),
                None => trail.push(stack.pop().expect("non-empty")),
            }
        }
        trail.reverse();
        let used = trail.len() as u64 - 1;
        if used != self.total() {
            return Err(CountsError::Infeasible {
                v0: self.v0.clone(),
                reason: format!(
                    "only {used} of {} transitions are reachable from v0",
                    self.total()
                ),
            });
        }
        Ok(Path::from_states(&trail).expect("counts hold admissible pairs"))
    }
}
