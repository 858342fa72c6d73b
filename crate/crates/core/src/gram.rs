//! Dense indexing of all grams of length `1..=r+1` over `m` symbols.
//!
//! A gram `x_1..x_l` has code `Σ x_i m^{l-i}` and flat index
//! `offset(l) + code`, so every per-gram table is a single `Vec`.

use crate::sequence::{Seq, Symbol};

/// Largest table the walk will allocate (number of grams of all lengths).
pub const MAX_GRAMS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramSpace {
    m: usize,
    r: usize,
    pow: Vec<usize>,
    offset: Vec<usize>,
    reversed: Vec<usize>,
}

impl GramSpace {
    /// Returns `None` when the tables would exceed [`MAX_GRAMS`].
    pub fn new(m: usize, r: usize) -> Option<Self> {
        assert!(m >= 1 && r >= 1);
        let mut pow = vec![1usize];
        for _ in 0..=r {
            pow.push(pow.last()?.checked_mul(m)?);
        }
        let mut offset = vec![0usize, 0];
        for l in 1..=r + 1 {
            offset.push(offset[l].checked_add(pow[l])?);
        }
        let total = offset[r + 2];
        if total > MAX_GRAMS {
            return None;
        }
        let mut space = GramSpace {
            m,
            r,
            pow,
            offset,
            reversed: Vec::new(),
        };
        let mut reversed = vec![0; total];
        for l in 1..=r + 1 {
            for code in 0..space.pow[l] {
                let rev = space.reverse_code(l, code);
                reversed[space.offset[l] + code] = space.offset[l] + rev;
            }
        }
        space.reversed = reversed;
        Some(space)
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.r
    }

    /// `m^l`.
    pub fn count(&self, l: usize) -> usize {
        self.pow[l]
    }

    /// Number of grams over all lengths `1..=r+1`.
    pub fn total(&self) -> usize {
        self.offset[self.r + 2]
    }

    pub fn offset(&self, l: usize) -> usize {
        self.offset[l]
    }

    pub fn flat(&self, l: usize, code: usize) -> usize {
        self.offset[l] + code
    }

    pub fn encode(&self, symbols: &[Symbol]) -> usize {
        symbols
            .iter()
            .fold(0, |acc, &s| acc * self.m + s as usize)
    }

    pub fn flat_of(&self, symbols: &[Symbol]) -> usize {
        self.flat(symbols.len(), self.encode(symbols))
    }

    pub fn decode(&self, l: usize, mut code: usize) -> Seq {
        let mut out = vec![0; l];
        for slot in out.iter_mut().rev() {
            *slot = (code % self.m) as Symbol;
            code /= self.m;
        }
        Seq::new(out).expect("l >= 1")
    }

    /// Length and code of a flat index.
    pub fn split(&self, flat: usize) -> (usize, usize) {
        let l = (1..=self.r + 1)
            .rev()
            .find(|&l| flat >= self.offset[l])
            .expect("flat index in range");
        (l, flat - self.offset[l])
    }

    /// Flat index of the reversal of the gram at `flat`.
    pub fn reversed(&self, flat: usize) -> usize {
        self.reversed[flat]
    }

    fn reverse_code(&self, l: usize, mut code: usize) -> usize {
        let mut out = 0;
        for _ in 0..l {
            out = out * self.m + code % self.m;
            code /= self.m;
        }
        out
    }

    /// Code of the last `l` symbols of a gram with code `code`.
    pub fn suffix_code(&self, code: usize, l: usize) -> usize {
        code % self.pow[l]
    }

    /// Code of the first `l` symbols of a gram of length `len`.
    pub fn prefix_code(&self, code: usize, len: usize, l: usize) -> usize {
        code / self.pow[len - l]
    }
}
