//! Suffix array and the arrays derived from it: document array `DA`, `LCP`,
//! interleaved per-document LCP (`ILCP`) with its run-length form, and the
//! previous-occurrence array `C`.
//!
//! All arrays are stored 0-based in memory but hold 1-based values and are
//! addressed by 1-based rank in the public accessors.

use crate::corpus::{Collection, TERMINATOR};
use crate::error::{Error, Result};
use crate::par;

/// Suffix array of `text` as 1-based positions.
pub fn build_sa(text: &[u8]) -> Vec<u32> {
    assert!(text.len() < i32::MAX as usize, "text too long for 32-bit suffix sorting");
    let (_, sa) = divsufsort::sort(text).into_parts();
    sa.into_iter().map(|p| p as u32 + 1).collect()
}

/// `DA[i] = rank1(B, SA[i])`.
pub fn build_da(sa: &[u32], c: &Collection) -> Vec<u32> {
    sa.iter().map(|&p| c.doc_of_unchecked(p as usize) as u32).collect()
}

/// Kasai et al. LCP from the inverse permutation; `LCP[1] = 0`.
pub fn build_lcp(text: &[u8], sa: &[u32]) -> Vec<u32> {
    let n = text.len();
    let mut rank = vec![0u32; n];
    for (i, &p) in sa.iter().enumerate() {
        rank[p as usize - 1] = i as u32;
    }
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for p in 0..n {
        let r = rank[p] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let q = sa[r - 1] as usize - 1;
        while p + h < n && q + h < n && text[p + h] == text[q + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}

/// Interleaves the per-document LCP arrays in global suffix order.
///
/// Within one document, the global order of its suffixes equals their local
/// order (comparisons are decided before the terminator), so the `r`-th
/// occurrence of document `g` in `DA` takes `LCP_g[r]`.
pub fn build_ilcp(c: &Collection, da: &[u32]) -> Vec<u32> {
    let docs: Vec<usize> = (1..=c.num_docs()).collect();
    let local = par::map(&docs, |&g| {
        let mut body = c.document(g).to_vec();
        body.push(TERMINATOR);
        let sa = build_sa(&body);
        build_lcp(&body, &sa)
    });
    let mut next = vec![0usize; c.num_docs()];
    da.iter()
        .map(|&g| {
            let g = g as usize - 1;
            let v = local[g][next[g]];
            next[g] += 1;
            v
        })
        .collect()
}

/// `C[i]` = last rank `j < i` with `DA[j] = DA[i]`, or 0.
pub fn build_c(da: &[u32]) -> Vec<u32> {
    let d = da.iter().copied().max().unwrap_or(0) as usize;
    let mut last = vec![0u32; d + 1];
    da.iter()
        .enumerate()
        .map(|(i, &g)| std::mem::replace(&mut last[g as usize], i as u32 + 1))
        .collect()
}

/// Maximal run-length encoding of an integer array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Runs {
    /// 1-based start rank of each run.
    pub starts: Vec<u32>,
    pub values: Vec<u32>,
    pub len: usize,
}

impl Runs {
    pub fn encode(values: &[u32]) -> Self {
        let mut starts = Vec::new();
        let mut vals = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            if vals.last() != Some(&v) || i == 0 {
                starts.push(i as u32 + 1);
                vals.push(v);
            }
        }
        Runs { starts, values: vals, len: values.len() }
    }

    pub fn num_runs(&self) -> usize {
        self.starts.len()
    }

    /// 0-based index of the run holding 1-based rank `i`.
    pub fn run_of(&self, i: usize) -> usize {
        self.starts.partition_point(|&s| s as usize <= i) - 1
    }

    /// 1-based inclusive rank span of run `r`.
    pub fn span(&self, r: usize) -> (usize, usize) {
        let end = self.starts.get(r + 1).map_or(self.len, |&s| s as usize - 1);
        (self.starts[r] as usize, end)
    }

    /// `(start, length, value)` triples.
    pub fn triples(&self) -> Vec<(usize, usize, u32)> {
        (0..self.num_runs())
            .map(|r| {
                let (s, e) = self.span(r);
                (s, e - s + 1, self.values[r])
            })
            .collect()
    }

    pub fn decode(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len);
        for r in 0..self.num_runs() {
            let (s, e) = self.span(r);
            out.extend(std::iter::repeat_n(self.values[r], e - s + 1));
        }
        out
    }
}

/// Suffix array plus whichever derived arrays have been materialized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SuffixIndex {
    pub(crate) sa: Vec<u32>,
    pub(crate) da: Option<Vec<u32>>,
    pub(crate) lcp: Option<Vec<u32>>,
    pub(crate) ilcp: Option<Vec<u32>>,
    pub(crate) runs: Option<Runs>,
    pub(crate) c: Option<Vec<u32>>,
}

impl SuffixIndex {
    /// Suffix array only.
    pub fn new(c: &Collection) -> Self {
        SuffixIndex { sa: build_sa(c.text()), ..Default::default() }
    }

    /// Suffix array with every derived array.
    pub fn full(c: &Collection) -> Self {
        let mut idx = Self::new(c);
        idx.ensure_lcp(c);
        idx.ensure_ilcp(c);
        idx.ensure_c(c);
        idx
    }

    pub fn ensure_da(&mut self, c: &Collection) -> &[u32] {
        if self.da.is_none() {
            self.da = Some(build_da(&self.sa, c));
        }
        self.da.as_deref().unwrap()
    }

    pub fn ensure_lcp(&mut self, c: &Collection) -> &[u32] {
        if self.lcp.is_none() {
            self.lcp = Some(build_lcp(c.text(), &self.sa));
        }
        self.lcp.as_deref().unwrap()
    }

    pub fn ensure_ilcp(&mut self, c: &Collection) {
        if self.ilcp.is_none() {
            self.ensure_da(c);
            let ilcp = build_ilcp(c, self.da.as_deref().unwrap());
            self.runs = Some(Runs::encode(&ilcp));
            self.ilcp = Some(ilcp);
        }
    }

    pub fn ensure_c(&mut self, c: &Collection) {
        if self.c.is_none() {
            self.ensure_da(c);
            self.c = Some(build_c(self.da.as_deref().unwrap()));
        }
    }

    pub fn len(&self) -> usize {
        self.sa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sa.is_empty()
    }

    pub fn sa(&self) -> &[u32] {
        &self.sa
    }

    pub fn da(&self) -> Option<&[u32]> {
        self.da.as_deref()
    }

    pub fn lcp(&self) -> Option<&[u32]> {
        self.lcp.as_deref()
    }

    pub fn ilcp(&self) -> Option<&[u32]> {
        self.ilcp.as_deref()
    }

    pub fn ilcp_runs(&self) -> Option<&Runs> {
        self.runs.as_ref()
    }

    pub fn c_array(&self) -> Option<&[u32]> {
        self.c.as_deref()
    }

    pub(crate) fn check_range(&self, sp: usize, ep: usize) -> Result<()> {
        if sp == 0 || sp > ep || ep > self.len() {
            return Err(Error::InvalidRange { sp, ep, len: self.len() });
        }
        Ok(())
    }

    /// Rank range `[sp, ep]` of suffixes prefixed by `pattern`, or `None`.
    pub fn find(&self, c: &Collection, pattern: &[u8]) -> Result<Option<(usize, usize)>> {
        if let Some(off) = pattern.iter().position(|&b| b == TERMINATOR) {
            return Err(Error::PatternTerminator(off + 1));
        }
        Ok(find_range(c.text(), &self.sa, pattern))
    }

    /// `SA[sp..=ep]`.
    pub fn locate(&self, sp: usize, ep: usize) -> Result<&[u32]> {
        self.check_range(sp, ep)?;
        Ok(&self.sa[sp - 1..ep])
    }
}

/// Binary search for the suffixes starting with `pattern`.
pub fn find_range(text: &[u8], sa: &[u32], pattern: &[u8]) -> Option<(usize, usize)> {
    let m = pattern.len();
    let prefix = |p: u32| {
        let s = p as usize - 1;
        &text[s..(s + m).min(text.len())]
    };
    let lo = sa.partition_point(|&p| prefix(p) < pattern);
    let hi = lo + sa[lo..].partition_point(|&p| prefix(p) == pattern);
    (hi > lo).then_some((lo + 1, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::e1;
    use proptest::prelude::*;

    // Independent oracles: comparison sort of all suffixes, pairwise lcp.
    fn sa_oracle(t: &[u8]) -> Vec<u32> {
        let mut v: Vec<u32> = (1..=t.len() as u32).collect();
        v.sort_by(|&a, &b| t[a as usize - 1..].cmp(&t[b as usize - 1..]));
        v
    }

    fn lcp_oracle(t: &[u8], sa: &[u32]) -> Vec<u32> {
        (0..sa.len())
            .map(|i| {
                if i == 0 {
                    return 0;
                }
                let a = &t[sa[i - 1] as usize - 1..];
                let b = &t[sa[i] as usize - 1..];
                a.iter().zip(b).take_while(|(x, y)| x == y).count() as u32
            })
            .collect()
    }

    fn ilcp_oracle(c: &Collection, sa: &[u32]) -> Vec<u32> {
        // per-document sorted suffix lists, then walk global order
        let mut per_doc = Vec::new();
        for g in 1..=c.num_docs() {
            let mut body = c.document(g).to_vec();
            body.push(0);
            let lsa = sa_oracle(&body);
            per_doc.push(lcp_oracle(&body, &lsa));
        }
        let mut seen = vec![0; c.num_docs()];
        sa.iter()
            .map(|&p| {
                let g = c.doc_of(p as usize).unwrap() - 1;
                seen[g] += 1;
                per_doc[g][seen[g] - 1]
            })
            .collect()
    }

    fn c_oracle(da: &[u32]) -> Vec<u32> {
        (0..da.len())
            .map(|i| (0..i).rev().find(|&j| da[j] == da[i]).map_or(0, |j| j as u32 + 1))
            .collect()
    }

    #[test]
    fn e1_arrays() {
        let c = e1();
        let idx = SuffixIndex::full(&c);
        assert_eq!(idx.sa(), &[10, 4, 7, 9, 3, 5, 1, 6, 8, 2]);
        assert_eq!(idx.sa(), sa_oracle(c.text()).as_slice());
        assert_eq!(idx.da().unwrap(), &[3, 1, 2, 3, 1, 2, 1, 2, 3, 1]);
        // ranks 4 and 5 are "A\0" and "A\0AB\0BA\0", sharing two bytes
        assert_eq!(idx.lcp().unwrap(), &[0, 1, 1, 0, 2, 1, 2, 0, 1, 3]);
        assert_eq!(idx.lcp().unwrap(), lcp_oracle(c.text(), idx.sa()).as_slice());
        assert_eq!(idx.ilcp().unwrap(), &[0, 0, 0, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(
            idx.ilcp_runs().unwrap().triples(),
            vec![(1, 6, 0), (7, 1, 1), (8, 3, 0)]
        );
        assert_eq!(idx.c_array().unwrap(), &[0, 0, 0, 1, 2, 3, 5, 6, 4, 7]);
    }

    #[test]
    fn tiny_texts() {
        assert_eq!(build_sa(b"\0"), vec![1]);
        assert_eq!(build_sa(b"AA\0"), vec![3, 2, 1]);
        assert_eq!(build_lcp(b"\0", &[1]), vec![0]);
        assert_eq!(build_lcp(b"AA\0", &[3, 2, 1]), vec![0, 0, 1]);
    }

    #[test]
    fn c_small_cases() {
        assert_eq!(build_c(&[1, 1, 1]), vec![0, 1, 2]);
        assert_eq!(build_c(&[1, 2, 3]), vec![0, 0, 0]);
    }

    #[test]
    fn single_document_ilcp_equals_lcp() {
        let c = Collection::new(&["ABRACADABRA"]).unwrap();
        let idx = SuffixIndex::full(&c);
        assert_eq!(idx.ilcp(), idx.lcp());
        assert!(idx.da().unwrap().iter().all(|&g| g == 1));
    }

    #[test]
    fn all_empty_documents() {
        let c = Collection::new(&["", "", "", ""]).unwrap();
        let idx = SuffixIndex::full(&c);
        let mut da = idx.da().unwrap().to_vec();
        da.sort();
        assert_eq!(da, vec![1, 2, 3, 4]);
        assert!(idx.ilcp().unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn copies_share_ilcp_values() {
        let doc = "GATTACAGATTA";
        let one = Collection::new(&[doc]).unwrap();
        let one_idx = SuffixIndex::full(&one);
        let one_runs = Runs::encode(one_idx.lcp().unwrap()).num_runs();
        let many = Collection::new(&[doc; 5]).unwrap();
        let idx = SuffixIndex::full(&many);
        assert_eq!(idx.ilcp().unwrap(), ilcp_oracle(&many, idx.sa()).as_slice());
        // every copy's suffix at local rank r takes the same value
        let mut vals: Vec<u32> = idx.ilcp().unwrap().to_vec();
        let mut expect: Vec<u32> =
            one_idx.lcp().unwrap().iter().flat_map(|&v| [v; 5]).collect();
        vals.sort();
        expect.sort();
        assert_eq!(vals, expect);
        assert!(idx.ilcp_runs().unwrap().num_runs() <= 2 * one_runs + 1);
    }

    #[test]
    fn find_and_locate_on_e1() {
        let c = e1();
        let idx = SuffixIndex::new(&c);
        assert_eq!(idx.find(&c, b"A").unwrap(), Some((4, 7)));
        assert_eq!(idx.find(&c, b"").unwrap(), Some((1, 10)));
        assert_eq!(idx.find(&c, b"C").unwrap(), None);
        assert_eq!(idx.find(&c, b"A\0"), Err(Error::PatternTerminator(2)));
        assert_eq!(idx.locate(4, 7).unwrap(), &[9, 3, 5, 1]);
        assert_eq!(idx.locate(1, 1).unwrap(), &[10]);
        let mut all = idx.locate(1, 10).unwrap().to_vec();
        all.sort();
        assert_eq!(all, (1..=10).collect::<Vec<_>>());
        assert!(idx.locate(0, 3).is_err());
        assert!(idx.locate(5, 11).is_err());
    }

    fn collection_strategy() -> impl Strategy<Value = Collection> {
        proptest::collection::vec(proptest::collection::vec(b'A'..b'E', 0..20), 1..8)
            .prop_map(|docs| Collection::new(&docs).unwrap())
    }

    proptest! {
        #[test]
        fn arrays_match_oracles(c in collection_strategy()) {
            let idx = SuffixIndex::full(&c);
            let t = c.text();
            prop_assert_eq!(idx.sa().to_vec(), sa_oracle(t));
            for w in idx.sa().windows(2) {
                prop_assert!(t[w[0] as usize - 1..] < t[w[1] as usize - 1..]);
            }
            prop_assert_eq!(idx.lcp().unwrap().to_vec(), lcp_oracle(t, idx.sa()));
            prop_assert_eq!(idx.ilcp().unwrap().to_vec(), ilcp_oracle(&c, idx.sa()));
            prop_assert_eq!(idx.c_array().unwrap().to_vec(), c_oracle(idx.da().unwrap()));
            let runs = idx.ilcp_runs().unwrap();
            prop_assert_eq!(runs.decode(), idx.ilcp().unwrap().to_vec());
            for w in runs.values.windows(2) {
                prop_assert_ne!(w[0], w[1]);
            }
        }

        #[test]
        fn find_matches_scan(c in collection_strategy(), p in proptest::collection::vec(b'A'..b'E', 0..4)) {
            let idx = SuffixIndex::new(&c);
            let hits: Vec<usize> = (1..=idx.len())
                .filter(|&i| c.text()[idx.sa()[i - 1] as usize - 1..].starts_with(&p))
                .collect();
            let got = idx.find(&c, &p).unwrap();
            match got {
                None => prop_assert!(hits.is_empty()),
                Some((sp, ep)) => prop_assert_eq!((sp..=ep).collect::<Vec<_>>(), hits),
            }
        }

        #[test]
        fn ilcp_and_c_first_occurrence_laws(c in collection_strategy(), p in proptest::collection::vec(b'A'..b'E', 1..4)) {
            let idx = SuffixIndex::full(&c);
            if let Some((sp, ep)) = idx.find(&c, &p).unwrap() {
                let da = idx.da().unwrap();
                for i in sp..=ep {
                    let first = !(sp..i).any(|j| da[j - 1] == da[i - 1]);
                    prop_assert_eq!((idx.ilcp().unwrap()[i - 1] as usize) < p.len(), first);
                    prop_assert_eq!((idx.c_array().unwrap()[i - 1] as usize) < sp, first);
                }
            }
        }
    }
}
