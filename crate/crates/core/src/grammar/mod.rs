//! Grammar compression of integer sequences and sets.
//!
//! A [`Grammar`] holds binary rules `X -> (left, right)` and one or more
//! compressed sequences sharing those rules. Symbols below
//! `terminal_limit` are terminals; rule `t` is symbol `terminal_limit + t`.

mod freqs;
mod repair;
mod setpair;

pub use freqs::FreqEncoding;
pub use repair::{compress, compress_sequences, compress_traced};
pub use setpair::{setpair_compress, SetGrammar};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    terminal_limit: u32,
    rules: Vec<(u32, u32)>,
    offsets: Vec<u32>,
    symbols: Vec<u32>,
}

impl Grammar {
    /// Assembles and validates a grammar: rules may reference terminals or
    /// earlier rules only, sequences any defined symbol.
    pub fn new(terminal_limit: u32, rules: Vec<(u32, u32)>, sequences: Vec<Vec<u32>>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(sequences.len() + 1);
        offsets.push(0);
        let mut symbols = Vec::new();
        for s in sequences {
            symbols.extend(s);
            offsets.push(symbols.len() as u32);
        }
        Self::from_flat(terminal_limit, rules, offsets, symbols)
    }

    pub(crate) fn from_flat(
        terminal_limit: u32,
        rules: Vec<(u32, u32)>,
        offsets: Vec<u32>,
        symbols: Vec<u32>,
    ) -> Result<Self> {
        for (t, &(l, r)) in rules.iter().enumerate() {
            let id = terminal_limit as u64 + t as u64;
            if l as u64 >= id || r as u64 >= id {
                return Err(Error::MalformedGrammar(format!(
                    "rule {id} refers to a symbol that is not yet defined"
                )));
            }
        }
        let top = terminal_limit as u64 + rules.len() as u64;
        if let Some(&s) = symbols.iter().find(|&&s| s as u64 >= top) {
            return Err(Error::MalformedGrammar(format!("unknown symbol {s}")));
        }
        if offsets.first() != Some(&0)
            || offsets.windows(2).any(|w| w[0] > w[1])
            || *offsets.last().unwrap() as usize != symbols.len()
        {
            return Err(Error::MalformedGrammar("bad sequence offsets".into()));
        }
        Ok(Grammar { terminal_limit, rules, offsets, symbols })
    }

    pub fn terminal_limit(&self) -> u32 {
        self.terminal_limit
    }

    pub fn rules(&self) -> &[(u32, u32)] {
        &self.rules
    }

    pub fn num_sequences(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Compressed form of sequence `i`.
    pub fn sequence(&self, i: usize) -> &[u32] {
        &self.symbols[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub(crate) fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub(crate) fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    /// `2 * rules + total compressed sequence length`.
    pub fn size(&self) -> usize {
        2 * self.rules.len() + self.symbols.len()
    }

    /// Expands sequence `i` completely.
    pub fn expand(&self, i: usize) -> Vec<u32> {
        self.expand_prefix(i, usize::MAX)
    }

    /// First `min(k, len)` symbols of sequence `i`, expanding rules
    /// left-first and stopping once `k` terminals are out.
    pub fn expand_prefix(&self, i: usize, k: usize) -> Vec<u32> {
        let mut out = Vec::new();
        self.expand_into(i, k, &mut out);
        out
    }

    pub(crate) fn expand_into(&self, i: usize, k: usize, out: &mut Vec<u32>) {
        let start = out.len();
        let mut stack: Vec<u32> = Vec::new();
        for &s in self.sequence(i) {
            stack.push(s);
            while let Some(x) = stack.pop() {
                if out.len() - start >= k {
                    return;
                }
                if x < self.terminal_limit {
                    out.push(x);
                } else {
                    let (l, r) = self.rules[(x - self.terminal_limit) as usize];
                    stack.push(r);
                    stack.push(l);
                }
            }
            if out.len() - start >= k {
                return;
            }
        }
    }

    /// All sequences expanded and concatenated.
    pub fn decompress(&self) -> Vec<u32> {
        (0..self.num_sequences()).flat_map(|i| self.expand(i)).collect()
    }
}
