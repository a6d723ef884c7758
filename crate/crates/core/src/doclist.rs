//! Document listing over a suffix-array rank range `[sp, ep]`, and the
//! frequency counting that brute-force top-k shares with it.
//!
//! Algorithms take their document identifiers from a [`DocSource`]: either
//! the explicit document array (`-D` variants) or `locate` followed by
//! `rank1` on the document boundaries (`-L` variants).

use crate::corpus::Collection;
use crate::error::{Error, Result};
use crate::rmq::Rmq;
use crate::suffixes::Runs;

/// Where the document of a suffix-array rank comes from.
pub trait DocSource {
    fn len(&self) -> usize;

    /// Document of 1-based rank `i`.
    fn doc(&self, i: usize) -> u32;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reads the document array directly.
#[derive(Clone, Copy)]
pub struct DocArray<'a>(pub &'a [u32]);

impl DocSource for DocArray<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    fn doc(&self, i: usize) -> u32 {
        self.0[i - 1]
    }
}

/// `locate` plus `rank1(B, .)`.
#[derive(Clone, Copy)]
pub struct Located<'a> {
    pub sa: &'a [u32],
    pub coll: &'a Collection,
}

impl DocSource for Located<'_> {
    fn len(&self) -> usize {
        self.sa.len()
    }

    #[inline]
    fn doc(&self, i: usize) -> u32 {
        self.coll.doc_of_unchecked(self.sa[i - 1] as usize) as u32
    }
}

/// Distinct documents of a range, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ListResult {
    pub docs: Vec<u32>,
    pub occ: usize,
}

impl ListResult {
    pub fn docc(&self) -> usize {
        self.docs.len()
    }
}

/// Top-k answer in canonical order: frequency descending, id ascending.
/// Frequencies are absent when the answering structure does not keep them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TopK {
    pub docs: Vec<u32>,
    pub freqs: Option<Vec<u32>>,
}

impl TopK {
    pub fn from_pairs(pairs: Vec<(u32, u32)>) -> Self {
        let (docs, freqs) = pairs.into_iter().unzip();
        TopK { docs, freqs: Some(freqs) }
    }

    pub fn pairs(&self) -> Option<Vec<(u32, u32)>> {
        self.freqs.as_ref().map(|f| self.docs.iter().copied().zip(f.iter().copied()).collect())
    }
}

/// Per-query working memory. One per thread; reset in O(1) by bumping a
/// generation counter.
#[derive(Debug, Default)]
pub struct Scratch {
    stamps: Vec<u32>,
    counts: Vec<u32>,
    touched: Vec<u32>,
    generation: u32,
    stack: Vec<(usize, usize)>,
    /// Nonempty subranges examined by the last recursive listing.
    pub probes: usize,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn begin(&mut self, max_doc: usize) {
        if self.stamps.len() <= max_doc {
            self.stamps.resize(max_doc + 1, 0);
            self.counts.resize(max_doc + 1, 0);
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamps.fill(0);
            self.generation = 1;
        }
        self.touched.clear();
        self.stack.clear();
        self.probes = 0;
    }

    /// True the first time `g` is seen in this generation.
    #[inline]
    fn mark(&mut self, g: u32) -> bool {
        let s = &mut self.stamps[g as usize];
        if *s == self.generation {
            false
        } else {
            *s = self.generation;
            true
        }
    }

    #[inline]
    fn bump(&mut self, g: u32, by: u32) {
        let gi = g as usize;
        if self.stamps[gi] != self.generation {
            self.stamps[gi] = self.generation;
            self.counts[gi] = 0;
            self.touched.push(g);
        }
        self.counts[gi] += by;
    }

    fn take_counts(&mut self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> =
            self.touched.iter().map(|&g| (g, self.counts[g as usize])).collect();
        out.sort_unstable();
        out
    }
}

fn check(len: usize, sp: usize, ep: usize) -> Result<()> {
    if sp == 0 || sp > ep || ep > len {
        return Err(Error::InvalidRange { sp, ep, len });
    }
    Ok(())
}

fn finish(mut docs: Vec<u32>, sp: usize, ep: usize) -> ListResult {
    docs.sort_unstable();
    ListResult { docs, occ: ep - sp + 1 }
}

/// Scans every rank and reports each document once.
pub fn list_brute<S: DocSource>(
    src: &S,
    d: usize,
    sp: usize,
    ep: usize,
    scratch: &mut Scratch,
) -> Result<ListResult> {
    check(src.len(), sp, ep)?;
    scratch.begin(d);
    let mut docs = Vec::new();
    for i in sp..=ep {
        let g = src.doc(i);
        if scratch.mark(g) {
            docs.push(g);
        }
    }
    Ok(finish(docs, sp, ep))
}

/// Muthukrishnan's algorithm: report `DA[i]` for every minimum of `C` in the
/// range with `C[i] < sp`.
pub fn list_mut<S: DocSource>(
    c: &Rmq,
    src: &S,
    d: usize,
    sp: usize,
    ep: usize,
    scratch: &mut Scratch,
) -> Result<ListResult> {
    check(c.len(), sp, ep)?;
    scratch.begin(d);
    let mut docs = Vec::new();
    scratch.stack.push((sp, ep));
    while let Some((l, r)) = scratch.stack.pop() {
        if l > r {
            continue;
        }
        scratch.probes += 1;
        let i = c.query_unchecked(l, r);
        if (c.value(i) as usize) < sp {
            docs.push(src.doc(i));
            scratch.stack.push((i + 1, r));
            scratch.stack.push((l, i - 1));
        }
    }
    Ok(finish(docs, sp, ep))
}

/// Sadakane's variant: preorder left-to-right traversal of the `C` minima
/// with a seen-set, so the values of `C` are never read.
pub fn list_sada<S: DocSource>(
    c: &Rmq,
    src: &S,
    d: usize,
    sp: usize,
    ep: usize,
    scratch: &mut Scratch,
) -> Result<ListResult> {
    check(c.len(), sp, ep)?;
    scratch.begin(d);
    let mut docs = Vec::new();
    scratch.stack.push((sp, ep));
    while let Some((l, r)) = scratch.stack.pop() {
        if l > r {
            continue;
        }
        scratch.probes += 1;
        let i = c.query_unchecked(l, r);
        let g = src.doc(i);
        if scratch.mark(g) {
            docs.push(g);
            // right pushed first so the left half is visited first
            scratch.stack.push((i + 1, r));
            scratch.stack.push((l, i - 1));
        }
    }
    Ok(finish(docs, sp, ep))
}

/// Sadakane's traversal over `ILCP`: a rank is a first occurrence in a
/// pattern range iff its `ILCP` value is below the pattern length `m`.
pub fn list_ilcp<S: DocSource>(
    ilcp: &Rmq,
    src: &S,
    sp: usize,
    ep: usize,
    m: usize,
    scratch: &mut Scratch,
) -> Result<ListResult> {
    check(ilcp.len(), sp, ep)?;
    if m == 0 {
        return Err(Error::ContractViolation("pattern length must be at least 1".into()));
    }
    scratch.begin(0);
    let mut docs = Vec::new();
    scratch.stack.push((sp, ep));
    while let Some((l, r)) = scratch.stack.pop() {
        if l > r {
            continue;
        }
        scratch.probes += 1;
        let i = ilcp.query_unchecked(l, r);
        if (ilcp.value(i) as usize) < m {
            docs.push(src.doc(i));
            scratch.stack.push((i + 1, r));
            scratch.stack.push((l, i - 1));
        }
    }
    Ok(finish(docs, sp, ep))
}

/// As [`list_ilcp`] with the RMQ built over the run heads of `ILCP` only;
/// every rank of a qualifying run inside `[sp, ep]` is reported.
pub fn list_ilcp_runs<S: DocSource>(
    runs: &Runs,
    heads: &Rmq,
    src: &S,
    sp: usize,
    ep: usize,
    m: usize,
    scratch: &mut Scratch,
) -> Result<ListResult> {
    check(runs.len, sp, ep)?;
    if m == 0 {
        return Err(Error::ContractViolation("pattern length must be at least 1".into()));
    }
    scratch.begin(0);
    let mut docs = Vec::new();
    // run indices are 0-based here, the RMQ is 1-based
    scratch.stack.push((runs.run_of(sp) + 1, runs.run_of(ep) + 1));
    while let Some((l, r)) = scratch.stack.pop() {
        if l > r {
            continue;
        }
        scratch.probes += 1;
        let k = heads.query_unchecked(l, r);
        if (heads.value(k) as usize) < m {
            let (s, e) = runs.span(k - 1);
            for i in s.max(sp)..=e.min(ep) {
                docs.push(src.doc(i));
            }
            scratch.stack.push((k + 1, r));
            scratch.stack.push((l, k - 1));
        }
    }
    Ok(finish(docs, sp, ep))
}

/// `(document, occurrences)` over the range, ascending by document.
pub fn count_freqs<S: DocSource>(
    src: &S,
    d: usize,
    sp: usize,
    ep: usize,
    scratch: &mut Scratch,
) -> Result<Vec<(u32, u32)>> {
    check(src.len(), sp, ep)?;
    scratch.begin(d);
    for i in sp..=ep {
        scratch.bump(src.doc(i), 1);
    }
    Ok(scratch.take_counts())
}

/// Sorts `(doc, freq)` pairs by frequency descending, then id ascending.
pub fn canonical_order(pairs: &mut [(u32, u32)]) {
    pairs.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// The `k` best pairs in canonical order.
pub fn select_top(mut pairs: Vec<(u32, u32)>, k: usize) -> Vec<(u32, u32)> {
    let cmp = |a: &(u32, u32), b: &(u32, u32)| b.1.cmp(&a.1).then(a.0.cmp(&b.0));
    if k < pairs.len() {
        if k > 0 {
            pairs.select_nth_unstable_by(k - 1, cmp);
        }
        pairs.truncate(k);
    }
    pairs.sort_unstable_by(cmp);
    pairs
}

/// Brute-force top-k: count every rank, then select.
pub fn topk_brute<S: DocSource>(
    src: &S,
    d: usize,
    sp: usize,
    ep: usize,
    k: usize,
    scratch: &mut Scratch,
) -> Result<TopK> {
    if k == 0 {
        return Err(Error::ContractViolation("k must be at least 1".into()));
    }
    let freqs = count_freqs(src, d, sp, ep, scratch)?;
    Ok(TopK::from_pairs(select_top(freqs, k)))
}

/// Adds the counts of ranks `sp..=ep` to the running accumulator.
pub(crate) fn accumulate<S: DocSource>(src: &S, sp: usize, ep: usize, scratch: &mut Scratch) {
    for i in sp..=ep {
        scratch.bump(src.doc(i), 1);
    }
}

pub(crate) fn accumulate_pairs(pairs: impl Iterator<Item = (u32, u32)>, scratch: &mut Scratch) {
    for (g, f) in pairs {
        scratch.bump(g, f);
    }
}

pub(crate) fn begin_accumulate(d: usize, scratch: &mut Scratch) {
    scratch.begin(d);
}

pub(crate) fn finish_accumulate(scratch: &mut Scratch) -> Vec<(u32, u32)> {
    scratch.take_counts()
}

/// Marks documents into the seen-set, appending new ones to `out`.
pub(crate) fn collect_distinct(
    docs: impl Iterator<Item = u32>,
    scratch: &mut Scratch,
    out: &mut Vec<u32>,
) {
    for g in docs {
        if scratch.mark(g) {
            out.push(g);
        }
    }
}

pub(crate) fn begin_distinct(d: usize, scratch: &mut Scratch) {
    scratch.begin(d);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::e1;
    use crate::suffixes::SuffixIndex;

    struct Fixture {
        coll: Collection,
        idx: SuffixIndex,
        c: Rmq,
        ilcp: Rmq,
        heads: Rmq,
    }

    fn fixture(coll: Collection) -> Fixture {
        let idx = SuffixIndex::full(&coll);
        let c = Rmq::new(idx.c_array().unwrap().to_vec()).unwrap();
        let ilcp = Rmq::new(idx.ilcp().unwrap().to_vec()).unwrap();
        let heads = Rmq::new(idx.ilcp_runs().unwrap().values.clone()).unwrap();
        Fixture { coll, idx, c, ilcp, heads }
    }

    impl Fixture {
        fn da(&self) -> DocArray<'_> {
            DocArray(self.idx.da().unwrap())
        }

        fn loc(&self) -> Located<'_> {
            Located { sa: self.idx.sa(), coll: &self.coll }
        }

        fn all(&self, sp: usize, ep: usize, m: usize) -> Vec<Vec<u32>> {
            let s = &mut Scratch::new();
            let d = self.coll.num_docs();
            vec![
                list_brute(&self.loc(), d, sp, ep, s).unwrap().docs,
                list_brute(&self.da(), d, sp, ep, s).unwrap().docs,
                list_mut(&self.c, &self.da(), d, sp, ep, s).unwrap().docs,
                list_sada(&self.c, &self.da(), d, sp, ep, s).unwrap().docs,
                list_sada(&self.c, &self.loc(), d, sp, ep, s).unwrap().docs,
                list_ilcp(&self.ilcp, &self.da(), sp, ep, m, s).unwrap().docs,
                list_ilcp(&self.ilcp, &self.loc(), sp, ep, m, s).unwrap().docs,
                list_ilcp_runs(self.idx.ilcp_runs().unwrap(), &self.heads, &self.da(), sp, ep, m, s)
                    .unwrap()
                    .docs,
            ]
        }
    }

    #[test]
    fn e1_listings() {
        let f = fixture(e1());
        for docs in f.all(4, 7, 1) {
            assert_eq!(docs, vec![1, 2, 3]);
        }
        for docs in f.all(6, 7, 2) {
            assert_eq!(docs, vec![1, 2]);
        }
        for docs in f.all(9, 10, 2) {
            assert_eq!(docs, vec![1, 3]);
        }
        for docs in f.all(8, 10, 1) {
            assert_eq!(docs, vec![1, 2, 3]);
        }
        let da = f.idx.da().unwrap();
        for k in 1..=10 {
            let m = f.idx.ilcp().unwrap()[k - 1] as usize + 1;
            for docs in f.all(k, k, m) {
                assert_eq!(docs, vec![da[k - 1]]);
            }
        }
    }

    #[test]
    fn mut_trace_on_e1() {
        let f = fixture(e1());
        let s = &mut Scratch::new();
        let r = list_mut(&f.c, &f.da(), 3, 7, 7, s).unwrap();
        assert_eq!(r.docs, vec![1]);
        let r = list_mut(&f.c, &f.da(), 3, 4, 7, s).unwrap();
        assert_eq!((r.docs.clone(), r.occ, r.docc()), (vec![1, 2, 3], 4, 3));
        assert!(s.probes <= 2 * r.docc() + 1);
    }

    #[test]
    fn mut_reports_once_for_uniform_range() {
        let coll = Collection::new(&["AAAA"]).unwrap();
        let f = fixture(coll);
        let s = &mut Scratch::new();
        // "A" occupies ranks 2..=5 of "AAAA\0"
        let r = list_mut(&f.c, &f.da(), 1, 2, 5, s).unwrap();
        assert_eq!(r.docs, vec![1]);
        assert!(s.probes <= 3);
    }

    #[test]
    fn ilcp_requires_pattern_length() {
        let f = fixture(e1());
        let s = &mut Scratch::new();
        assert!(matches!(
            list_ilcp(&f.ilcp, &f.da(), 4, 7, 0, s),
            Err(Error::ContractViolation(_))
        ));
        assert!(list_ilcp_runs(f.idx.ilcp_runs().unwrap(), &f.heads, &f.da(), 4, 7, 0, s).is_err());
    }

    #[test]
    fn out_of_range_queries_fail() {
        let f = fixture(e1());
        let s = &mut Scratch::new();
        assert!(list_brute(&f.da(), 3, 0, 2, s).is_err());
        assert!(list_sada(&f.c, &f.da(), 3, 5, 11, s).is_err());
        assert!(list_mut(&f.c, &f.da(), 3, 6, 5, s).is_err());
        assert!(count_freqs(&f.da(), 3, 1, 11, s).is_err());
    }

    #[test]
    fn frequencies_on_e1() {
        let f = fixture(e1());
        let s = &mut Scratch::new();
        assert_eq!(count_freqs(&f.da(), 3, 4, 7, s).unwrap(), vec![(1, 2), (2, 1), (3, 1)]);
        assert_eq!(count_freqs(&f.loc(), 3, 2, 2, s).unwrap(), vec![(1, 1)]);
        let full = count_freqs(&f.da(), 3, 1, 10, s).unwrap();
        assert_eq!(full, vec![(1, 4), (2, 3), (3, 3)]);
        let top = topk_brute(&f.da(), 3, 4, 7, 2, s).unwrap();
        assert_eq!(top.pairs().unwrap(), vec![(1, 2), (2, 1)]);
        let top = topk_brute(&f.loc(), 3, 4, 7, 10, s).unwrap();
        assert_eq!(top.pairs().unwrap(), vec![(1, 2), (2, 1), (3, 1)]);
    }

    #[test]
    fn select_top_matches_full_sort() {
        let pairs = vec![(5, 1), (2, 3), (9, 3), (1, 1), (4, 2)];
        let mut all = pairs.clone();
        canonical_order(&mut all);
        for k in 0..=6 {
            assert_eq!(select_top(pairs.clone(), k), all[..k.min(5)].to_vec());
        }
    }

    #[test]
    fn scratch_generation_wraps() {
        let f = fixture(e1());
        let s = &mut Scratch::new();
        s.generation = u32::MAX - 1;
        for _ in 0..4 {
            assert_eq!(list_brute(&f.da(), 3, 1, 10, s).unwrap().docs, vec![1, 2, 3]);
        }
    }
}
