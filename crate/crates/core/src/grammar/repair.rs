//! Re-Pair over integer sequences.
//!
//! Repeatedly replaces the most frequent adjacent pair with a fresh rule
//! until no pair occurs twice. Frequencies are non-overlapping left-to-right
//! counts; ties go to the lexicographically smallest `(left, right)`.
//!
//! Pairs never span two input sequences. Counts of pairs `(a, b)` with
//! `a != b` are kept exact incrementally. For `(a, a)` the adjacent count is
//! only an upper bound (runs overlap), so such a pair is recounted exactly
//! when it reaches the top of the queue and requeued with the exact value.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::hash::{BuildHasherDefault, Hasher};

use super::Grammar;
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// Compresses one sequence; `terminal_limit` is one past its maximum.
pub fn compress(seq: &[u32]) -> Result<Grammar> {
    Ok(compress_traced(seq)?.0)
}

/// As [`compress`], also returning each rule's pair count at creation.
pub fn compress_traced(seq: &[u32]) -> Result<(Grammar, Vec<u32>)> {
    if seq.is_empty() {
        return Err(Error::EmptyInput);
    }
    let limit = seq.iter().copied().max().unwrap() + 1;
    RePair::new(&[seq], limit)?.run()
}

/// Compresses several sequences with one shared set of rules.
pub fn compress_sequences<S: AsRef<[u32]>>(
    seqs: &[S],
    terminal_limit: u32,
) -> Result<(Grammar, Vec<u32>)> {
    let seqs: Vec<&[u32]> = seqs.iter().map(|s| s.as_ref()).collect();
    RePair::new(&seqs, terminal_limit)?.run()
}

#[derive(Default)]
struct PairHasher(u64);

impl Hasher for PairHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u64(b as u64);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0.rotate_left(5) ^ v).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

type PairMap<V> = HashMap<u64, V, BuildHasherDefault<PairHasher>>;

#[inline]
fn key(a: u32, b: u32) -> u64 {
    (a as u64) << 32 | b as u64
}

#[derive(Default)]
struct PairRec {
    // adjacent occurrences, exact
    count: u32,
    // superset of the left positions of live occurrences
    occ: Vec<u32>,
    version: u32,
    // `(a, a)` pairs whose exact non-overlapping count is stale
    dirty: bool,
}

struct RePair {
    limit: u32,
    sym: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    offsets: Vec<u32>,
    pairs: PairMap<PairRec>,
    heap: BinaryHeap<(u32, Reverse<(u32, u32)>, u32)>,
}

impl RePair {
    fn new(seqs: &[&[u32]], limit: u32) -> Result<Self> {
        let total: usize = seqs.iter().map(|s| s.len()).sum();
        if total >= NONE as usize {
            return Err(Error::InvalidParams("input too long".into()));
        }
        let mut sym = Vec::with_capacity(total);
        let mut next = Vec::with_capacity(total);
        let mut prev = Vec::with_capacity(total);
        let mut offsets = vec![0u32];
        for s in seqs {
            if let Some(&bad) = s.iter().find(|&&x| x >= limit) {
                return Err(Error::MalformedInput(format!(
                    "symbol {bad} is not below the terminal limit {limit}"
                )));
            }
            let base = sym.len() as u32;
            for (k, &x) in s.iter().enumerate() {
                sym.push(x);
                prev.push(if k == 0 { NONE } else { base + k as u32 - 1 });
                next.push(if k + 1 == s.len() { NONE } else { base + k as u32 + 1 });
            }
            offsets.push(sym.len() as u32);
        }
        let mut rp = RePair {
            limit,
            sym,
            next,
            prev,
            offsets,
            pairs: PairMap::default(),
            heap: BinaryHeap::new(),
        };
        for i in 0..rp.sym.len() as u32 {
            let j = rp.next[i as usize];
            if j != NONE {
                let rec = rp.pairs.entry(key(rp.sym[i as usize], rp.sym[j as usize])).or_default();
                rec.count += 1;
                rec.occ.push(i);
            }
        }
        let keys: Vec<u64> = rp.pairs.keys().copied().collect();
        for k in keys {
            rp.touch(k);
        }
        Ok(rp)
    }

    fn touch(&mut self, k: u64) {
        let rec = self.pairs.get_mut(&k).unwrap();
        rec.version += 1;
        let (a, b) = ((k >> 32) as u32, k as u32);
        if a == b {
            rec.dirty = true;
        }
        if rec.count >= 2 {
            self.heap.push((rec.count, Reverse((a, b)), rec.version));
        }
    }

    #[inline]
    fn live(&self, i: u32, a: u32, b: u32) -> bool {
        let i = i as usize;
        if self.sym[i] != a {
            return false;
        }
        let j = self.next[i];
        j != NONE && self.sym[j as usize] == b
    }

    /// Sorted, deduplicated live occurrences of `(a, b)`.
    fn live_positions(&mut self, k: u64) -> Vec<u32> {
        let (a, b) = ((k >> 32) as u32, k as u32);
        let mut occ = std::mem::take(&mut self.pairs.get_mut(&k).unwrap().occ);
        occ.sort_unstable();
        occ.dedup();
        occ.retain(|&i| self.live(i, a, b));
        occ
    }

    fn exact_count(&mut self, k: u64) -> u32 {
        let occ = self.live_positions(k);
        let mut count = 0;
        let mut blocked = NONE;
        for &i in &occ {
            if i != blocked {
                count += 1;
                blocked = self.next[i as usize];
            }
        }
        self.pairs.get_mut(&k).unwrap().occ = occ;
        count
    }

    fn dec(&mut self, a: u32, b: u32, changed: &mut Vec<u64>) {
        let k = key(a, b);
        let rec = self.pairs.get_mut(&k).unwrap();
        rec.count -= 1;
        changed.push(k);
    }

    fn inc(&mut self, a: u32, b: u32, at: u32, changed: &mut Vec<u64>) {
        let k = key(a, b);
        let rec = self.pairs.entry(k).or_default();
        rec.count += 1;
        rec.occ.push(at);
        changed.push(k);
    }

    fn run(mut self) -> Result<(Grammar, Vec<u32>)> {
        let mut rules = Vec::new();
        let mut trace = Vec::new();
        let mut changed = Vec::new();
        while let Some((count, Reverse((a, b)), version)) = self.heap.pop() {
            let k = key(a, b);
            let rec = match self.pairs.get_mut(&k) {
                Some(r) if r.version == version => r,
                _ => continue,
            };
            if a == b && rec.dirty {
                let exact = self.exact_count(k);
                let rec = self.pairs.get_mut(&k).unwrap();
                rec.dirty = false;
                rec.version += 1;
                if exact >= 2 {
                    self.heap.push((exact, Reverse((a, b)), rec.version));
                }
                continue;
            }
            let x = self
                .limit
                .checked_add(rules.len() as u32)
                .filter(|&x| x != NONE)
                .ok_or_else(|| Error::InvalidParams("symbol space exhausted".into()))?;
            rules.push((a, b));
            trace.push(count);
            let occ = self.live_positions(k);
            changed.clear();
            let mut replaced = 0;
            for i in occ {
                // earlier replacements in this round may have consumed `i`
                if !self.live(i, a, b) {
                    continue;
                }
                let j = self.next[i as usize];
                let p = self.prev[i as usize];
                let q = self.next[j as usize];
                if p != NONE {
                    let sp = self.sym[p as usize];
                    self.dec(sp, a, &mut changed);
                    self.inc(sp, x, p, &mut changed);
                }
                if q != NONE {
                    let sq = self.sym[q as usize];
                    self.dec(b, sq, &mut changed);
                    self.inc(x, sq, i, &mut changed);
                }
                self.dec(a, b, &mut changed);
                self.sym[i as usize] = x;
                self.sym[j as usize] = NONE;
                self.next[i as usize] = q;
                if q != NONE {
                    self.prev[q as usize] = i;
                }
                replaced += 1;
            }
            debug_assert_eq!(replaced, count);
            debug_assert_eq!(self.pairs.get(&k).map_or(0, |r| r.count), 0);
            self.pairs.remove(&k);
            changed.sort_unstable();
            changed.dedup();
            for &c in &changed {
                if c != k {
                    self.touch(c);
                }
            }
        }
        let mut sequences = Vec::with_capacity(self.offsets.len() - 1);
        for w in self.offsets.windows(2) {
            let (lo, hi) = (w[0] as usize, w[1] as usize);
            sequences.push(self.sym[lo..hi].iter().copied().filter(|&s| s != NONE).collect());
        }
        Ok((Grammar::new(self.limit, rules, sequences)?, trace))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Rescan oracle: recount every pair from scratch before each rule.
    fn naive(seqs: &[Vec<u32>], limit: u32) -> (Vec<(u32, u32)>, Vec<Vec<u32>>) {
        let mut seqs = seqs.to_vec();
        let mut rules = Vec::new();
        loop {
            let mut counts: std::collections::BTreeMap<(u32, u32), u32> = Default::default();
            for s in &seqs {
                let mut i = 0;
                let mut last: Option<(usize, (u32, u32))> = None;
                while i + 1 < s.len() {
                    let p = (s[i], s[i + 1]);
                    // skip an occurrence overlapping the previous counted one
                    if let Some((li, lp)) = last {
                        if lp == p && li + 1 == i {
                            i += 1;
                            continue;
                        }
                    }
                    *counts.entry(p).or_default() += 1;
                    last = Some((i, p));
                    i += 1;
                }
            }
            let best = counts.iter().max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)));
            let Some((&(a, b), &c)) = best else { break };
            if c < 2 {
                break;
            }
            let x = limit + rules.len() as u32;
            rules.push((a, b));
            for s in &mut seqs {
                let mut out = Vec::with_capacity(s.len());
                let mut i = 0;
                while i < s.len() {
                    if i + 1 < s.len() && s[i] == a && s[i + 1] == b {
                        out.push(x);
                        i += 2;
                    } else {
                        out.push(s[i]);
                        i += 1;
                    }
                }
                *s = out;
            }
        }
        (rules, seqs)
    }

    #[test]
    fn small_examples() {
        let g = compress(&[1, 2, 1, 2]).unwrap();
        assert_eq!(g.rules(), &[(1, 2)]);
        assert_eq!(g.sequence(0), &[3, 3]);
        let g = compress(&[1, 2, 3]).unwrap();
        assert!(g.rules().is_empty());
        assert_eq!(g.sequence(0), &[1, 2, 3]);
        let g = compress(&[7]).unwrap();
        assert!(g.rules().is_empty());
        assert_eq!(g.sequence(0), &[7]);
        assert_eq!(compress(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn runs_of_one_symbol() {
        // "aaaa" -> X X, and X X occurs once
        let g = compress(&[5, 5, 5, 5]).unwrap();
        assert_eq!(g.rules(), &[(5, 5)]);
        assert_eq!(g.sequence(0), &[6, 6]);
        let g = compress(&[5; 8]).unwrap();
        assert_eq!(g.rules(), &[(5, 5), (6, 6)]);
        assert_eq!(g.sequence(0), &[7, 7]);
        // "aaa" counts once, so nothing to replace
        let g = compress(&[5, 5, 5]).unwrap();
        assert!(g.rules().is_empty());
    }

    #[test]
    fn pairs_do_not_cross_sequences() {
        let (g, _) = compress_sequences(&[vec![1, 2], vec![3], vec![1, 2]], 4).unwrap();
        assert_eq!(g.rules(), &[(1, 2)]);
        assert_eq!(g.sequence(1), &[3]);
        let (g, _) = compress_sequences(&[vec![1], vec![2], vec![1], vec![2]], 3).unwrap();
        assert!(g.rules().is_empty());
    }

    #[test]
    fn matches_rescan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..400 {
            let alphabet = rng.gen_range(1..6);
            let nseq = rng.gen_range(1..4);
            let seqs: Vec<Vec<u32>> = (0..nseq)
                .map(|_| (0..rng.gen_range(0..40)).map(|_| rng.gen_range(0..alphabet)).collect())
                .collect();
            let (g, trace) = compress_sequences(&seqs, alphabet).unwrap();
            let (rules, out) = naive(&seqs, alphabet);
            assert_eq!(g.rules(), rules.as_slice(), "{seqs:?}");
            for (i, s) in out.iter().enumerate() {
                assert_eq!(g.sequence(i), s.as_slice());
                assert_eq!(g.expand(i), seqs[i]);
            }
            assert!(trace.iter().all(|&c| c >= 2));
        }
    }
}
