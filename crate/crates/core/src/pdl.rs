//! Precomputed document listing.
//!
//! The suffix tree is walked bottom-up as lcp-intervals. Maximal subtrees of
//! at most `b` suffixes form the leaf blocks; above them, nodes are chosen
//! by the storing factor `beta` and their document sets are kept,
//! compressed with one Re-Pair grammar shared by all stored sets. A query
//! range is answered as the union of the maximal stored sets inside it plus
//! brute force over the uncovered margins.
//!
//! In top-k mode each stored set is ordered by frequency (descending, ties
//! by increasing id) and the frequencies can be kept alongside as
//! run-length encodings.

use crate::doclist::{self, DocArray, DocSource, Located, ListResult, Scratch, TopK};
use crate::error::{Error, Result};
use crate::grammar::{self, FreqEncoding, Grammar};
use crate::suffixes::SuffixIndex;
use crate::Collection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum PdlMode {
    Listing,
    TopK { with_freqs: bool },
}

impl PdlMode {
    pub fn name(self) -> &'static str {
        match self {
            PdlMode::Listing => "list",
            PdlMode::TopK { with_freqs: false } => "topk",
            PdlMode::TopK { with_freqs: true } => "topk+f",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "list" => Some(PdlMode::Listing),
            "topk" => Some(PdlMode::TopK { with_freqs: false }),
            "topk+f" => Some(PdlMode::TopK { with_freqs: true }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct PdlParams {
    pub block_size: usize,
    pub beta: u32,
    pub mode: PdlMode,
}

impl Default for PdlParams {
    fn default() -> Self {
        PdlParams { block_size: 256, beta: 16, mode: PdlMode::Listing }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdlIndex {
    pub(crate) params: PdlParams,
    pub(crate) n: usize,
    /// 1-based first rank of every leaf block, ascending.
    pub(crate) blocks: Vec<u32>,
    /// Stored rank ranges ordered by start ascending, end descending.
    pub(crate) nodes: Vec<(u32, u32)>,
    /// Sequence `i` is the set of `nodes[i]`.
    pub(crate) grammar: Grammar,
    pub(crate) freqs: Option<Vec<FreqEncoding>>,
}

// A completed lcp-interval as seen by its parent.
enum Child {
    Small(usize, usize),
    Cand(Cand),
}

struct Cand {
    l: usize,
    r: usize,
    // (doc, freq), ascending by doc
    docs: Vec<(u32, u32)>,
    // contribution to the parent's frontier size
    frontier: u64,
}

impl Child {
    fn range(&self) -> (usize, usize) {
        match self {
            Child::Small(l, r) => (*l, *r),
            Child::Cand(c) => (c.l, c.r),
        }
    }
}

struct Builder<'a, S> {
    src: &'a S,
    params: PdlParams,
    blocks: Vec<u32>,
    stored: Vec<(u32, u32, Vec<(u32, u32)>)>,
    acc: Vec<u32>,
    touched: Vec<u32>,
}

impl<S: DocSource> Builder<'_, S> {
    fn add(&mut self, g: u32, f: u32) {
        if self.acc[g as usize] == 0 {
            self.touched.push(g);
        }
        self.acc[g as usize] += f;
    }

    fn drain(&mut self) -> Vec<(u32, u32)> {
        self.touched.sort_unstable();
        let out = self.touched.iter().map(|&g| (g, std::mem::take(&mut self.acc[g as usize]))).collect();
        self.touched.clear();
        out
    }

    fn block_docs(&mut self, l: usize, r: usize) -> Vec<(u32, u32)> {
        for i in l..=r {
            self.add(self.src.doc(i), 1);
        }
        self.drain()
    }

    fn block(&mut self, x: usize, y: usize) -> (Vec<(u32, u32)>, u64) {
        self.blocks.push(x as u32);
        let docs = self.block_docs(x, y);
        let size = docs.len() as u64;
        (docs, size)
    }

    fn complete(&mut self, l: usize, r: usize, mut children: Vec<Child>) -> Child {
        if children.len() == 1 && children[0].range() == (l, r) {
            return children.pop().unwrap();
        }
        if r - l < self.params.block_size {
            return Child::Small(l, r);
        }
        let mut parts: Vec<(Vec<(u32, u32)>, u64)> = Vec::new();
        let mut pos = l;
        for child in children {
            let (cl, cr) = child.range();
            for x in pos..cl {
                parts.push(self.block(x, x));
            }
            match child {
                Child::Small(x, y) => parts.push(self.block(x, y)),
                Child::Cand(c) => parts.push((c.docs, c.frontier)),
            }
            pos = cr + 1;
        }
        for x in pos..=r {
            parts.push(self.block(x, x));
        }
        let mut frontier = 0u64;
        for (docs, f) in &parts {
            frontier += f;
            for &(g, c) in docs {
                self.add(g, c);
            }
        }
        drop(parts);
        let docs = self.drain();
        let own = docs.len() as u64;
        let stored = self.params.beta == 0 || frontier >= self.params.beta as u64 * own;
        if stored {
            self.stored.push((l as u32, r as u32, docs.clone()));
        }
        Child::Cand(Cand { l, r, docs, frontier: if stored { own } else { frontier } })
    }
}

impl PdlIndex {
    /// Builds from a suffix index holding `LCP`; documents come from `DA`
    /// when materialized, otherwise from `locate` and the boundaries.
    pub fn build(idx: &SuffixIndex, c: &Collection, params: PdlParams) -> Result<Self> {
        let lcp = idx
            .lcp()
            .ok_or_else(|| Error::ContractViolation("PDL construction needs the LCP array".into()))?;
        match idx.da() {
            Some(da) => Self::build_from(lcp, &DocArray(da), c.num_docs(), params),
            None => Self::build_from(lcp, &Located { sa: idx.sa(), coll: c }, c.num_docs(), params),
        }
    }

    pub fn build_from<S: DocSource>(
        lcp: &[u32],
        src: &S,
        d: usize,
        params: PdlParams,
    ) -> Result<Self> {
        if params.block_size < 2 {
            return Err(Error::InvalidParams(format!(
                "block size must be at least 2, got {}",
                params.block_size
            )));
        }
        let n = lcp.len();
        if n == 0 || src.len() != n {
            return Err(Error::InvalidParams("LCP and document source disagree".into()));
        }
        let mut b = Builder {
            src,
            params,
            blocks: Vec::new(),
            stored: Vec::new(),
            acc: vec![0; d + 1],
            touched: Vec::new(),
        };
        struct Entry {
            lcp: i64,
            lb: usize,
            children: Vec<Child>,
        }
        let mut stack = vec![Entry { lcp: 0, lb: 1, children: Vec::new() }];
        let mut root = None;
        for i in 2..=n + 1 {
            let cur = if i <= n { lcp[i - 1] as i64 } else { -1 };
            let mut lb = i - 1;
            let mut last = None;
            while stack.last().is_some_and(|t| cur < t.lcp) {
                let e = stack.pop().unwrap();
                let child = b.complete(e.lb, i - 1, e.children);
                lb = e.lb;
                match stack.last_mut() {
                    Some(top) if cur <= top.lcp => top.children.push(child),
                    _ => last = Some(child),
                }
            }
            if cur >= 0 && stack.last().is_none_or(|t| cur > t.lcp) {
                stack.push(Entry { lcp: cur, lb, children: last.take().into_iter().collect() });
            }
            if i == n + 1 {
                root = last;
            }
        }
        if let Some(Child::Small(..)) = root {
            b.blocks.push(1);
        }
        let Builder { mut blocks, mut stored, .. } = b;
        blocks.sort_unstable();
        stored.sort_unstable_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));

        let nodes: Vec<(u32, u32)> = stored.iter().map(|s| (s.0, s.1)).collect();
        let (seqs, freqs) = match params.mode {
            PdlMode::Listing => {
                (stored.into_iter().map(|s| s.2.into_iter().map(|p| p.0).collect()).collect(), None)
            }
            PdlMode::TopK { with_freqs } => {
                let mut seqs: Vec<Vec<u32>> = Vec::with_capacity(stored.len());
                let mut encs = Vec::new();
                for (l, r, mut pairs) in stored {
                    doclist::canonical_order(&mut pairs);
                    if with_freqs {
                        let f: Vec<u32> = pairs.iter().map(|p| p.1).collect();
                        encs.push(FreqEncoding::encode_bounded(&f, (r - l + 1) as usize)?);
                    }
                    seqs.push(pairs.into_iter().map(|p| p.0).collect());
                }
                (seqs, with_freqs.then_some(encs))
            }
        };
        let (grammar, _) = grammar::compress_sequences(&seqs, d as u32 + 1)?;
        Ok(PdlIndex { params, n, blocks, nodes, grammar, freqs })
    }

    pub fn params(&self) -> PdlParams {
        self.params
    }

    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    /// Rank spans of the leaf blocks.
    pub fn block_ranges(&self) -> Vec<(usize, usize)> {
        let ends = self.blocks.iter().skip(1).map(|&s| s as usize - 1).chain([self.n]);
        self.blocks.iter().map(|&s| s as usize).zip(ends).collect()
    }

    pub fn stored_ranges(&self) -> &[(u32, u32)] {
        &self.nodes
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn freq_encodings(&self) -> Option<&[FreqEncoding]> {
        self.freqs.as_deref()
    }

    /// Decompressed set of stored node `i` in its stored order.
    pub fn stored_set(&self, i: usize) -> Vec<u32> {
        self.grammar.expand(i)
    }

    fn exact_node(&self, sp: usize, ep: usize) -> Option<usize> {
        let key = (sp as u32, ep as u32);
        self.nodes
            .binary_search_by(|&(l, r)| l.cmp(&key.0).then(key.1.cmp(&r)))
            .ok()
    }

    /// Splits `[sp, ep]` into maximal stored ranges inside it and the
    /// uncovered margins between them.
    pub fn decompose(&self, sp: usize, ep: usize) -> Vec<Piece> {
        let mut out = Vec::new();
        let mut pos = sp;
        while pos <= ep {
            let mut k = self.nodes.partition_point(|&(l, _)| (l as usize) < pos);
            let mut found = None;
            while k < self.nodes.len() && self.nodes[k].0 as usize <= ep {
                if self.nodes[k].1 as usize <= ep {
                    found = Some(k);
                    break;
                }
                k += 1;
            }
            match found {
                Some(k) => {
                    let (l, r) = (self.nodes[k].0 as usize, self.nodes[k].1 as usize);
                    if l > pos {
                        out.push(Piece::Margin(pos, l - 1));
                    }
                    out.push(Piece::Stored(k));
                    pos = r + 1;
                }
                None => {
                    out.push(Piece::Margin(pos, ep));
                    break;
                }
            }
        }
        out
    }

    fn check(&self, sp: usize, ep: usize) -> Result<()> {
        if sp == 0 || sp > ep || ep > self.n {
            return Err(Error::InvalidRange { sp, ep, len: self.n });
        }
        Ok(())
    }

    pub fn list<S: DocSource>(
        &self,
        src: &S,
        d: usize,
        sp: usize,
        ep: usize,
        scratch: &mut Scratch,
    ) -> Result<ListResult> {
        if self.params.mode != PdlMode::Listing {
            return Err(Error::WrongMode { expected: "listing" });
        }
        self.check(sp, ep)?;
        doclist::begin_distinct(d, scratch);
        let mut docs = Vec::new();
        let mut buf = Vec::new();
        for piece in self.decompose(sp, ep) {
            match piece {
                Piece::Stored(k) => {
                    buf.clear();
                    self.grammar.expand_into(k, usize::MAX, &mut buf);
                    doclist::collect_distinct(buf.iter().copied(), scratch, &mut docs);
                }
                Piece::Margin(l, r) => {
                    doclist::collect_distinct((l..=r).map(|i| src.doc(i)), scratch, &mut docs);
                }
            }
        }
        docs.sort_unstable();
        Ok(ListResult { docs, occ: ep - sp + 1 })
    }

    pub fn topk<S: DocSource>(
        &self,
        src: &S,
        d: usize,
        sp: usize,
        ep: usize,
        k: usize,
        scratch: &mut Scratch,
    ) -> Result<TopK> {
        let PdlMode::TopK { with_freqs } = self.params.mode else {
            return Err(Error::WrongMode { expected: "top-k" });
        };
        self.check(sp, ep)?;
        if k == 0 {
            return Err(Error::ContractViolation("k must be at least 1".into()));
        }
        if self.params.beta == 0 {
            if let Some(i) = self.exact_node(sp, ep) {
                let docs = self.grammar.expand_prefix(i, k);
                let freqs = self.freqs.as_ref().map(|f| f[i].decode_prefix(k));
                return Ok(TopK { docs, freqs });
            }
            if !with_freqs {
                let mut top = doclist::topk_brute(src, d, sp, ep, k, scratch)?;
                top.freqs = None;
                return Ok(top);
            }
        }
        let freqs = self.freqs.as_ref().ok_or(Error::MissingFreqs)?;
        doclist::begin_accumulate(d, scratch);
        let mut buf = Vec::new();
        for piece in self.decompose(sp, ep) {
            match piece {
                Piece::Stored(i) => {
                    buf.clear();
                    self.grammar.expand_into(i, usize::MAX, &mut buf);
                    let f = freqs[i].decode();
                    doclist::accumulate_pairs(buf.iter().copied().zip(f), scratch);
                }
                Piece::Margin(l, r) => doclist::accumulate(src, l, r, scratch),
            }
        }
        let pairs = doclist::finish_accumulate(scratch);
        Ok(TopK::from_pairs(doclist::select_top(pairs, k)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    /// Index into the stored nodes.
    Stored(usize),
    /// Uncovered inclusive rank span.
    Margin(usize, usize),
}
