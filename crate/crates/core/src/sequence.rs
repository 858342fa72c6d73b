//! Sequences over a finite alphabet, history sets, and the combinatorics of
//! the de Bruijn graph.
//!
//! Symbols are dense integers `0..m`. A state of an order-`r` chain is a
//! [`Seq`] of length `r`; a path of states `v_0, ..., v_n` is usually carried
//! around as the overlap concatenation of its states, a single sequence of
//! length `r + n`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A symbol of the alphabet `0..m`.
pub type Symbol = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("sequences must be non-empty")]
    Empty,
    #[error("cannot drop a symbol from a sequence of length {0}")]
    TooShort(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("elements {index} and {} do not overlap", index + 1)]
    Inadmissible { index: usize },
    #[error("symbol {symbol} is outside the alphabet of size {size}")]
    SymbolOutOfRange { symbol: Symbol, size: usize },
}

/// A non-empty sequence of symbols.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Seq(Vec<Symbol>);

/// Builds a [`Seq`] from a symbol list, panicking on an empty list.
#[macro_export]
macro_rules! seq {
    ($($s:expr),+ $(,)?) => {
        $crate::sequence::Seq::new(vec![$($s),+]).expect("non-empty")
    };
}

impl Seq {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, SeqError> {
        if symbols.is_empty() {
            return Err(SeqError::Empty);
        }
        Ok(Seq(symbols))
    }

    pub fn from_slice(symbols: &[Symbol]) -> Result<Self, SeqError> {
        Self::new(symbols.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }

    pub fn first(&self) -> Symbol {
        self.0[0]
    }

    pub fn last(&self) -> Symbol {
        self.0[self.0.len() - 1]
    }

    /// Checks that every symbol is below `size`.
    pub fn check_alphabet(&self, size: usize) -> Result<(), SeqError> {
        match self.0.iter().find(|&&s| s as usize >= size) {
            Some(&symbol) => Err(SeqError::SymbolOutOfRange { symbol, size }),
            None => Ok(()),
        }
    }

    /// The time reversal `u*`.
    pub fn reverse(&self) -> Seq {
        let mut s = self.0.clone();
        s.reverse();
        Seq(s)
    }

    pub fn is_palindrome(&self) -> bool {
        let n = self.0.len();
        (0..n / 2).all(|i| self.0[i] == self.0[n - 1 - i])
    }

    /// `A(u)`: the sequence without its last symbol.
    pub fn drop_last(&self) -> Result<Seq, SeqError> {
        if self.0.len() < 2 {
            return Err(SeqError::TooShort(self.0.len()));
        }
        Ok(Seq(self.0[..self.0.len() - 1].to_vec()))
    }

    /// `Ω(u)`: the sequence without its first symbol.
    pub fn drop_first(&self) -> Result<Seq, SeqError> {
        if self.0.len() < 2 {
            return Err(SeqError::TooShort(self.0.len()));
        }
        Ok(Seq(self.0[1..].to_vec()))
    }

    /// The last `len` symbols. `len` must be in `1..=self.len()`.
    pub fn suffix(&self, len: usize) -> Seq {
        assert!(len >= 1 && len <= self.0.len(), "suffix length out of range");
        Seq(self.0[self.0.len() - len..].to_vec())
    }

    /// The first `len` symbols. `len` must be in `1..=self.len()`.
    pub fn prefix(&self, len: usize) -> Seq {
        assert!(len >= 1 && len <= self.0.len(), "prefix length out of range");
        Seq(self.0[..len].to_vec())
    }

    pub fn ends_with(&self, other: &Seq) -> bool {
        self.0.ends_with(&other.0)
    }

    pub fn starts_with(&self, other: &Seq) -> bool {
        self.0.starts_with(&other.0)
    }

    /// This sequence followed by one more symbol.
    pub fn pushed(&self, symbol: Symbol) -> Seq {
        let mut s = self.0.clone();
        s.push(symbol);
        Seq(s)
    }
}

impl fmt::Debug for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

impl TryFrom<Vec<Symbol>> for Seq {
    type Error = SeqError;

    fn try_from(symbols: Vec<Symbol>) -> Result<Self, SeqError> {
        Seq::new(symbols)
    }
}

/// True iff `Ω(u) = A(v)`. For length-1 sequences every pair is admissible.
pub fn is_admissible_pair(u: &Seq, v: &Seq) -> Result<bool, SeqError> {
    if u.len() != v.len() {
        return Err(SeqError::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(u.0[1..] == v.0[..v.len() - 1])
}

/// Concatenation of a path without repeated overlaps.
///
/// Consecutive elements of equal length must be admissible, `Ω(a) = A(b)`.
/// A shorter `a` must be a suffix of `A(b)`: this is the history extension
/// `overline{f(v) u}` of the variable-order walk. Either way `b` contributes
/// its final symbol.
pub fn concat_overlap(path: &[Seq]) -> Result<Seq, SeqError> {
    let first = path.first().ok_or(SeqError::Empty)?;
    let mut out = first.0.clone();
    for (index, pair) in path.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if a.len() > b.len() {
            return Err(SeqError::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let end = b.len() - 1;
        let ok = if a.len() == b.len() {
            a.0[1..] == b.0[..end]
        } else {
            b.0[..end].ends_with(&a.0)
        };
        if !ok {
            return Err(SeqError::Inadmissible { index });
        }
        out.push(b.last());
    }
    Ok(Seq(out))
}

/// `J'_α(v)`: overlapping occurrences of `v` in `alpha`.
pub fn count_occ(alpha: &[Symbol], v: &[Symbol]) -> usize {
    if v.is_empty() || v.len() > alpha.len() {
        return 0;
    }
    alpha.windows(v.len()).filter(|w| *w == v).count()
}

/// `J''_α(v)`: occurrences of `v` in `alpha` followed by at least one symbol.
pub fn count_occ_followed(alpha: &[Symbol], v: &[Symbol]) -> usize {
    if alpha.is_empty() {
        return 0;
    }
    count_occ(&alpha[..alpha.len() - 1], v)
}

/// `x_1..x_r x_{r-1}..x_1`, the shortest palindrome starting with `v0`.
pub fn shortest_palindrome(v0: &Seq) -> Seq {
    let mut s = v0.0.clone();
    s.extend(v0.0.iter().rev().skip(1));
    Seq(s)
}

/// The `m` states reachable from `u` in one step of the de Bruijn graph, in
/// symbol order.
pub fn de_bruijn_successors(u: &Seq, m: usize) -> Vec<Seq> {
    (0..m as Symbol)
        .map(|a| {
            let mut s = u.0[1..].to_vec();
            s.push(a);
            Seq(s)
        })
        .collect()
}

/// Splits the overlap concatenation of a path of order-`r` states back into
/// its states.
pub fn states_of(eta: &[Symbol], r: usize) -> Vec<Seq> {
    eta.windows(r).map(|w| Seq(w.to_vec())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HistoryViolation {
    /// Histories must be shorter than the order.
    Length { history: Seq, order: usize },
    Symbol { history: Seq, size: usize },
    MissingReversal { history: Seq, reversal: Seq },
    MissingExtension { history: Seq, extension: Seq },
}

impl fmt::Display for HistoryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistoryViolation::Length { history, order } => {
                write!(f, "history {history} is not shorter than the order {order}")
            }
            HistoryViolation::Symbol { history, size } => {
                write!(f, "history {history} uses a symbol outside 0..{size}")
            }
            HistoryViolation::MissingReversal { history, reversal } => {
                write!(f, "history {history} present but its reversal {reversal} is not")
            }
            HistoryViolation::MissingExtension { history, extension } => {
                write!(f, "history {history} present but its extension {extension} is not")
            }
        }
    }
}

/// The set `𝓗` of histories of a variable-order chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistorySet(BTreeSet<Seq>);

impl HistorySet {
    pub fn empty() -> Self {
        HistorySet(BTreeSet::new())
    }

    pub fn new<I: IntoIterator<Item = Seq>>(histories: I) -> Self {
        HistorySet(histories.into_iter().collect())
    }

    /// Every single symbol is a history: the first-order model.
    pub fn all_singletons(m: usize) -> Self {
        Self::singletons_except(m, &[])
    }

    /// Every single symbol except `with_memory` is a history.
    pub fn singletons_except(m: usize, with_memory: &[Symbol]) -> Self {
        HistorySet(
            (0..m as Symbol)
                .filter(|s| !with_memory.contains(s))
                .map(|s| Seq(vec![s]))
                .collect(),
        )
    }

    /// Smallest valid history set containing `seeds`, for order `r` over `m`
    /// symbols. Seeds of length `>= r` are dropped.
    pub fn closure<I: IntoIterator<Item = Seq>>(seeds: I, r: usize, m: usize) -> Self {
        let mut set = BTreeSet::new();
        let mut stack: Vec<Seq> = seeds.into_iter().filter(|s| s.len() < r).collect();
        while let Some(h) = stack.pop() {
            if !set.insert(h.clone()) {
                continue;
            }
            stack.push(h.reverse());
            if h.len() + 1 < r {
                for a in 0..m as Symbol {
                    stack.push(h.pushed(a));
                }
            }
        }
        HistorySet(set)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, h: &Seq) -> bool {
        self.0.contains(h)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Seq> {
        self.0.iter()
    }

    /// The function `f`: shortest suffix of `v` lying in the set, or `v`
    /// itself when no suffix does.
    pub fn resolve(&self, v: &Seq) -> Seq {
        (1..v.len())
            .map(|q| v.suffix(q))
            .find(|s| self.0.contains(s))
            .unwrap_or_else(|| v.clone())
    }

    /// Checks closure under reversal and under prefix-extension below
    /// length `r`. An empty result means the set is valid.
    pub fn validate(&self, r: usize, m: usize) -> Vec<HistoryViolation> {
        let mut out = Vec::new();
        for h in &self.0 {
            if h.len() >= r {
                out.push(HistoryViolation::Length {
                    history: h.clone(),
                    order: r,
                });
                continue;
            }
            if h.check_alphabet(m).is_err() {
                out.push(HistoryViolation::Symbol {
                    history: h.clone(),
                    size: m,
                });
                continue;
            }
            let reversal = h.reverse();
            if !self.0.contains(&reversal) {
                out.push(HistoryViolation::MissingReversal {
                    history: h.clone(),
                    reversal,
                });
            }
            if h.len() + 1 < r {
                for a in 0..m as Symbol {
                    let extension = h.pushed(a);
                    if !self.0.contains(&extension) {
                        out.push(HistoryViolation::MissingExtension {
                            history: h.clone(),
                            extension,
                        });
                    }
                }
            }
        }
        out
    }
}

impl FromIterator<Seq> for HistorySet {
    fn from_iter<I: IntoIterator<Item = Seq>>(iter: I) -> Self {
        HistorySet::new(iter)
    }
}
