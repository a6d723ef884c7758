//! A collection together with the arrays and structures needed by a chosen
//! set of listing / top-k methods, serializable as a `.dgx` container.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::bits::{bit_width, PackedInts};
use crate::corpus::Collection;
use crate::doclist::{self, DocArray, Located, ListResult, Scratch, TopK};
use crate::error::{Error, Result};
use crate::format::{self, Decoder, Encoder, Section, Tag};
use crate::grammar::{FreqEncoding, Grammar};
use crate::pdl::{PdlIndex, PdlMode, PdlParams};
use crate::rmq::Rmq;
use crate::suffixes::{self, Runs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Structure {
    BruteL,
    BruteD,
    Mut,
    SadaD,
    SadaL,
    IlcpD,
    IlcpL,
    IlcpRuns,
    Pdl,
}

impl Structure {
    pub const ALL: [Structure; 9] = [
        Structure::BruteL,
        Structure::BruteD,
        Structure::Mut,
        Structure::SadaD,
        Structure::SadaL,
        Structure::IlcpD,
        Structure::IlcpL,
        Structure::IlcpRuns,
        Structure::Pdl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::BruteL => "brute-l",
            Structure::BruteD => "brute-d",
            Structure::Mut => "mut",
            Structure::SadaD => "sada-d",
            Structure::SadaL => "sada-l",
            Structure::IlcpD => "ilcp-d",
            Structure::IlcpL => "ilcp-l",
            Structure::IlcpRuns => "ilcp-runs",
            Structure::Pdl => "pdl",
        }
    }

    /// Comma-separated names; `all` selects every structure.
    pub fn parse_list(s: &str) -> Result<Vec<Structure>> {
        if s == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut out: Vec<Structure> =
            s.split(',').map(|t| t.trim().parse()).collect::<Result<_>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn uses_da(self) -> bool {
        matches!(self, Structure::BruteD | Structure::Mut | Structure::SadaD | Structure::IlcpD | Structure::IlcpRuns)
    }

    fn uses_c(self) -> bool {
        matches!(self, Structure::Mut | Structure::SadaD | Structure::SadaL)
    }

    fn uses_ilcp(self) -> bool {
        matches!(self, Structure::IlcpD | Structure::IlcpL)
    }

    /// Sections read at query time. `SA` is always needed for `find`; the
    /// text itself is the collection and is not charged to any structure.
    pub fn required_sections(self, pdl_freqs: bool) -> Vec<&'static str> {
        let mut v = vec!["SA"];
        v.push(if self.uses_da() { "DA" } else { "BITV" });
        match self {
            Structure::BruteL | Structure::BruteD => {}
            Structure::Mut | Structure::SadaD | Structure::SadaL => v.extend(["C", "RMQ:C"]),
            Structure::IlcpD | Structure::IlcpL => v.extend(["ILCP", "RMQ:ILCP"]),
            Structure::IlcpRuns => v.extend(["RUNS", "RMQ:RUNS"]),
            Structure::Pdl => {
                v.extend(["PDLB", "PDLN", "PDLS"]);
                if pdl_freqs {
                    v.push("PDLF");
                }
            }
        }
        v
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown structure `{s}`")))
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    List,
    TopK(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    List(ListResult),
    TopK(TopK),
}

impl Answer {
    pub fn docs(&self) -> &[u32] {
        match self {
            Answer::List(r) => &r.docs,
            Answer::TopK(t) => &t.docs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub structures: Vec<Structure>,
    pub pdl: PdlParams,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { structures: Structure::ALL.to_vec(), pdl: PdlParams::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Index {
    coll: Collection,
    structures: Vec<Structure>,
    sa: Vec<u32>,
    da: Option<Vec<u32>>,
    c: Option<Rmq>,
    ilcp: Option<Rmq>,
    runs: Option<(Runs, Rmq)>,
    pdl: Option<PdlIndex>,
}

impl Index {
    pub fn build(coll: Collection, opts: &BuildOptions) -> Result<Self> {
        let mut structures = opts.structures.clone();
        structures.sort_unstable();
        structures.dedup();
        if structures.is_empty() {
            return Err(Error::InvalidParams("no structure selected".into()));
        }
        let has = |f: fn(Structure) -> bool| structures.iter().any(|&s| f(s));
        let sa = suffixes::build_sa(coll.text());
        let needs_da = structures.iter().any(|&s| s != Structure::BruteL);
        let da = needs_da.then(|| suffixes::build_da(&sa, &coll));
        let c = if has(Structure::uses_c) {
            Some(Rmq::new(suffixes::build_c(da.as_ref().unwrap()))?)
        } else {
            None
        };
        let want_runs = structures.contains(&Structure::IlcpRuns);
        let (ilcp, runs) = if has(Structure::uses_ilcp) || want_runs {
            let values = suffixes::build_ilcp(&coll, da.as_ref().unwrap());
            let runs = if want_runs {
                let r = Runs::encode(&values);
                let heads = Rmq::new(r.values.clone())?;
                Some((r, heads))
            } else {
                None
            };
            let ilcp = if has(Structure::uses_ilcp) { Some(Rmq::new(values)?) } else { None };
            (ilcp, runs)
        } else {
            (None, None)
        };
        let pdl = if structures.contains(&Structure::Pdl) {
            let lcp = suffixes::build_lcp(coll.text(), &sa);
            let d = coll.num_docs();
            Some(PdlIndex::build_from(&lcp, &DocArray(da.as_ref().unwrap()), d, opts.pdl)?)
        } else {
            None
        };
        let keep_da = has(Structure::uses_da);
        Ok(Index {
            coll,
            structures,
            sa,
            da: if keep_da { da } else { None },
            c,
            ilcp,
            runs,
            pdl,
        })
    }

    pub fn collection(&self) -> &Collection {
        &self.coll
    }

    pub fn structures(&self) -> &[Structure] {
        &self.structures
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

    pub fn pdl(&self) -> Option<&PdlIndex> {
        self.pdl.as_ref()
    }

    pub fn has(&self, s: Structure) -> bool {
        self.structures.contains(&s)
    }

    fn require(&self, s: Structure) -> Result<()> {
        if self.has(s) {
            Ok(())
        } else {
            Err(Error::MissingStructure(s.name().into()))
        }
    }

    /// Find range of `pattern`; `None` when absent.
    pub fn find(&self, pattern: &[u8]) -> Result<Option<(usize, usize)>> {
        if pattern.is_empty() {
            return Err(Error::ContractViolation("pattern must be nonempty".into()));
        }
        if let Some(off) = pattern.iter().position(|&b| b == crate::corpus::TERMINATOR) {
            return Err(Error::PatternTerminator(off + 1));
        }
        Ok(suffixes::find_range(self.coll.text(), &self.sa, pattern))
    }

    fn located(&self) -> Located<'_> {
        Located { sa: &self.sa, coll: &self.coll }
    }

    /// Lists the documents of the find range `[sp, ep]` of a pattern of
    /// length `m`.
    pub fn list_range(
        &self,
        s: Structure,
        sp: usize,
        ep: usize,
        m: usize,
        scratch: &mut Scratch,
    ) -> Result<ListResult> {
        self.require(s)?;
        let d = self.coll.num_docs();
        let da = || DocArray(self.da.as_deref().unwrap());
        match s {
            Structure::BruteL => doclist::list_brute(&self.located(), d, sp, ep, scratch),
            Structure::BruteD => doclist::list_brute(&da(), d, sp, ep, scratch),
            Structure::Mut => doclist::list_mut(self.c.as_ref().unwrap(), &da(), d, sp, ep, scratch),
            Structure::SadaD => doclist::list_sada(self.c.as_ref().unwrap(), &da(), d, sp, ep, scratch),
            Structure::SadaL => {
                doclist::list_sada(self.c.as_ref().unwrap(), &self.located(), d, sp, ep, scratch)
            }
            Structure::IlcpD => doclist::list_ilcp(self.ilcp.as_ref().unwrap(), &da(), sp, ep, m, scratch),
            Structure::IlcpL => {
                doclist::list_ilcp(self.ilcp.as_ref().unwrap(), &self.located(), sp, ep, m, scratch)
            }
            Structure::IlcpRuns => {
                let (runs, heads) = self.runs.as_ref().unwrap();
                doclist::list_ilcp_runs(runs, heads, &da(), sp, ep, m, scratch)
            }
            Structure::Pdl => self.pdl.as_ref().unwrap().list(&self.located(), d, sp, ep, scratch),
        }
    }

    pub fn topk_range(
        &self,
        s: Structure,
        sp: usize,
        ep: usize,
        k: usize,
        scratch: &mut Scratch,
    ) -> Result<TopK> {
        self.require(s)?;
        let d = self.coll.num_docs();
        match s {
            Structure::BruteL => doclist::topk_brute(&self.located(), d, sp, ep, k, scratch),
            Structure::BruteD => {
                doclist::topk_brute(&DocArray(self.da.as_deref().unwrap()), d, sp, ep, k, scratch)
            }
            Structure::Pdl => self.pdl.as_ref().unwrap().topk(&self.located(), d, sp, ep, k, scratch),
            _ => Err(Error::Unsupported(s.name().into())),
        }
    }

    /// Answers a query on a located range; absent patterns give an empty
    /// answer with `occ = 0`.
    pub fn answer(
        &self,
        s: Structure,
        range: Option<(usize, usize)>,
        m: usize,
        q: Query,
        scratch: &mut Scratch,
    ) -> Result<Answer> {
        match (q, range) {
            (Query::List, Some((sp, ep))) => self.list_range(s, sp, ep, m, scratch).map(Answer::List),
            (Query::TopK(k), Some((sp, ep))) => self.topk_range(s, sp, ep, k, scratch).map(Answer::TopK),
            (Query::List, None) => self.require(s).map(|_| Answer::List(ListResult::default())),
            (Query::TopK(k), None) => {
                self.require(s)?;
                if k == 0 {
                    return Err(Error::ContractViolation("k must be at least 1".into()));
                }
                let freqs = self.supports_freqs(s).then(Vec::new);
                Ok(Answer::TopK(TopK { docs: Vec::new(), freqs }))
            }
        }
    }

    pub fn query(&self, s: Structure, pattern: &[u8], q: Query, scratch: &mut Scratch) -> Result<Answer> {
        let range = self.find(pattern)?;
        self.answer(s, range, pattern.len(), q, scratch)
    }

    /// Whether top-k answers of `s` carry frequencies.
    pub fn supports_freqs(&self, s: Structure) -> bool {
        match s {
            Structure::Pdl => self.pdl_mode() == Some(PdlMode::TopK { with_freqs: true }),
            _ => true,
        }
    }

    /// Whether `s` answers top-k queries in this index.
    pub fn supports_topk(&self, s: Structure) -> bool {
        match s {
            Structure::BruteL | Structure::BruteD => true,
            Structure::Pdl => matches!(self.pdl_mode(), Some(PdlMode::TopK { .. })),
            _ => false,
        }
    }

    pub fn pdl_mode(&self) -> Option<PdlMode> {
        self.pdl.as_ref().map(|p| p.params().mode)
    }

    /// Every section in file order.
    pub fn sections(&self) -> Vec<Section> {
        let mut out = Vec::new();
        let mut meta = Encoder::new();
        meta.u8(self.structures.len() as u8);
        for s in &self.structures {
            meta.u8(Structure::ALL.iter().position(|x| x == s).unwrap() as u8);
        }
        out.push(meta.finish(b"META"));

        let n = self.len() as u64;
        let mut e = Encoder::new();
        e.raw(self.coll.text(), 8 * n);
        out.push(e.finish(b"TEXT"));

        let bv = self.coll.bounds();
        let bytes: Vec<u8> = bv.words().iter().flat_map(|w| w.to_le_bytes()).collect();
        let mut e = Encoder::new();
        e.u64(n).raw(&bytes[..(n as usize).div_ceil(8)], n);
        out.push(e.finish(b"BITV"));

        let mut e = Encoder::new();
        e.ints(&self.sa);
        out.push(e.finish(b"SA  "));

        if let Some(da) = &self.da {
            let w = bit_width(self.coll.num_docs().max(2) as u64 - 1);
            let mut p = PackedInts::with_width(w, da.len());
            for (i, &g) in da.iter().enumerate() {
                p.set(i, g as u64 - 1);
            }
            let mut e = Encoder::new();
            e.packed(&p);
            out.push(e.finish(b"DA  "));
        }
        if let Some(c) = &self.c {
            let mut e = Encoder::new();
            e.ints(c.values());
            out.push(e.finish(b"C   "));
            out.push(rmq_section(b"C   ", c));
        }
        if let Some(ilcp) = &self.ilcp {
            let mut e = Encoder::new();
            e.ints(ilcp.values());
            out.push(e.finish(b"ILCP"));
            out.push(rmq_section(b"ILCP", ilcp));
        }
        if let Some((runs, heads)) = &self.runs {
            let mut e = Encoder::new();
            e.u64(runs.len as u64).ints(&runs.starts).ints(&runs.values);
            out.push(e.finish(b"RUNS"));
            out.push(rmq_section(b"RUNS", heads));
        }
        if let Some(p) = &self.pdl {
            out.extend(pdl_sections(p));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        format::write_container(&mut w, &self.sections())?;
        use std::io::Write;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::fs::File::open(path)?;
        Self::from_sections(format::read_container(&mut f)?)
    }

    pub fn from_sections(sections: Vec<Section>) -> Result<Self> {
        let get = |t: &Tag| sections.iter().find(|s| &s.tag == t);
        let need = |t: &Tag| {
            get(t).ok_or_else(|| Error::Format(format!("missing section {}", String::from_utf8_lossy(t))))
        };
        let mut d = Decoder::new(need(b"META")?);
        let count = d.u8()? as usize;
        let mut structures = Vec::with_capacity(count);
        for _ in 0..count {
            let i = d.u8()? as usize;
            structures.push(*Structure::ALL.get(i).ok_or_else(|| Error::Format(format!("unknown structure id {i}")))?);
        }
        d.done()?;
        let coll = Collection::from_text(need(b"TEXT")?.body.clone())?;
        let n = coll.len();

        let mut d = Decoder::new(need(b"SA  ")?);
        let sa = d.ints()?;
        d.done()?;
        if sa.len() != n {
            return Err(Error::Format("SA length differs from the text".into()));
        }
        let da = match get(b"DA  ") {
            Some(s) => {
                let mut d = Decoder::new(s);
                let v: Vec<u32> = d.packed()?.iter().map(|g| g as u32 + 1).collect();
                d.done()?;
                check_len("DA", v.len(), n)?;
                Some(v)
            }
            None => None,
        };
        let rmq_of = |key: &Tag, values: Vec<u32>| -> Result<Rmq> {
            let s = sections
                .iter()
                .find(|s| &s.tag == b"RMQ " && s.body.get(..4) == Some(&key[..]))
                .ok_or_else(|| Error::Format(format!("missing RMQ for {}", String::from_utf8_lossy(key))))?;
            let mut d = Decoder::new(s);
            d.tag()?;
            let k = d.u8()? as usize;
            let levels = (0..k).map(|_| d.ints()).collect::<Result<Vec<_>>>()?;
            d.done()?;
            Rmq::from_parts(values, levels)
        };
        let array = |t: &Tag| -> Result<Option<Vec<u32>>> {
            get(t)
                .map(|s| {
                    let mut d = Decoder::new(s);
                    let v = d.ints()?;
                    d.done()?;
                    check_len(&String::from_utf8_lossy(t), v.len(), n)?;
                    Ok(v)
                })
                .transpose()
        };
        let c = array(b"C   ")?.map(|v| rmq_of(b"C   ", v)).transpose()?;
        let ilcp = array(b"ILCP")?.map(|v| rmq_of(b"ILCP", v)).transpose()?;
        let runs = match get(b"RUNS") {
            Some(s) => {
                let mut d = Decoder::new(s);
                let len = d.usize()?;
                let starts = d.ints()?;
                let values = d.ints()?;
                d.done()?;
                if len != n || starts.len() != values.len() || starts.first() != Some(&1) {
                    return Err(Error::Format("inconsistent RUNS section".into()));
                }
                let heads = rmq_of(b"RUNS", values.clone())?;
                Some((Runs { starts, values, len }, heads))
            }
            None => None,
        };
        let pdl = if get(b"PDLN").is_some() { Some(read_pdl(&sections, n)?) } else { None };

        let idx = Index { coll, structures, sa, da, c, ilcp, runs, pdl };
        for &s in &idx.structures {
            let present = match s {
                Structure::BruteL => true,
                Structure::BruteD => idx.da.is_some(),
                Structure::Mut | Structure::SadaD => idx.da.is_some() && idx.c.is_some(),
                Structure::SadaL => idx.c.is_some(),
                Structure::IlcpD => idx.da.is_some() && idx.ilcp.is_some(),
                Structure::IlcpL => idx.ilcp.is_some(),
                Structure::IlcpRuns => idx.da.is_some() && idx.runs.is_some(),
                Structure::Pdl => idx.pdl.is_some(),
            };
            if !present {
                return Err(Error::Format(format!("sections for {s} are missing")));
            }
        }
        Ok(idx)
    }
}

fn check_len(what: &str, got: usize, n: usize) -> Result<()> {
    if got != n {
        return Err(Error::Format(format!("{what} has {got} entries, expected {n}")));
    }
    Ok(())
}

fn rmq_section(key: &Tag, r: &Rmq) -> Section {
    let mut e = Encoder::new();
    e.tag(key).u8(r.levels().len() as u8);
    for lv in r.levels() {
        e.ints(lv);
    }
    e.finish(b"RMQ ")
}

fn mode_code(m: PdlMode) -> u8 {
    match m {
        PdlMode::Listing => 0,
        PdlMode::TopK { with_freqs: false } => 1,
        PdlMode::TopK { with_freqs: true } => 2,
    }
}

fn pdl_sections(p: &PdlIndex) -> Vec<Section> {
    let mut out = Vec::new();
    let mut e = Encoder::new();
    e.ints(&p.blocks);
    out.push(e.finish(b"PDLB"));

    let (ls, rs): (Vec<u32>, Vec<u32>) = p.nodes.iter().copied().unzip();
    let mut e = Encoder::new();
    e.u64(p.params.block_size as u64).u32(p.params.beta).u8(mode_code(p.params.mode));
    e.ints(&ls).ints(&rs);
    out.push(e.finish(b"PDLN"));

    let g = &p.grammar;
    let (left, right): (Vec<u32>, Vec<u32>) = g.rules().iter().copied().unzip();
    let mut e = Encoder::new();
    e.u32(g.terminal_limit()).ints(&left).ints(&right).ints(g.offsets()).ints(g.symbols());
    out.push(e.finish(b"PDLS"));

    if let Some(fs) = &p.freqs {
        let runs: Vec<u32> = fs.iter().map(|f| f.num_runs() as u32).collect();
        let lengths: Vec<u32> = fs.iter().flat_map(|f| f.lengths.iter().copied()).collect();
        let heads: Vec<u32> = fs.iter().flat_map(|f| f.heads.iter().copied()).collect();
        let mut e = Encoder::new();
        e.ints(&runs).ints(&lengths).ints(&heads);
        out.push(e.finish(b"PDLF"));
    }
    out
}

fn read_pdl(sections: &[Section], n: usize) -> Result<PdlIndex> {
    let get = |t: &Tag| {
        sections
            .iter()
            .find(|s| &s.tag == t)
            .ok_or_else(|| Error::Format(format!("missing section {}", String::from_utf8_lossy(t))))
    };
    let mut d = Decoder::new(get(b"PDLB")?);
    let blocks = d.ints()?;
    d.done()?;

    let mut d = Decoder::new(get(b"PDLN")?);
    let block_size = d.usize()?;
    let beta = d.u32()?;
    let mode = match d.u8()? {
        0 => PdlMode::Listing,
        1 => PdlMode::TopK { with_freqs: false },
        2 => PdlMode::TopK { with_freqs: true },
        x => return Err(Error::Format(format!("unknown PDL mode {x}"))),
    };
    let ls = d.ints()?;
    let rs = d.ints()?;
    d.done()?;
    if ls.len() != rs.len() || blocks.first() != Some(&1) {
        return Err(Error::Format("inconsistent PDL node table".into()));
    }
    let nodes: Vec<(u32, u32)> = ls.into_iter().zip(rs).collect();
    if nodes.iter().any(|&(l, r)| l == 0 || l > r || r as usize > n) {
        return Err(Error::Format("PDL node outside the suffix range".into()));
    }

    let mut d = Decoder::new(get(b"PDLS")?);
    let limit = d.u32()?;
    let left = d.ints()?;
    let right = d.ints()?;
    let offsets = d.ints()?;
    let symbols = d.ints()?;
    d.done()?;
    if left.len() != right.len() {
        return Err(Error::Format("PDL grammar rule halves differ in length".into()));
    }
    let grammar = Grammar::from_flat(limit, left.into_iter().zip(right).collect(), offsets, symbols)
        .map_err(|e| Error::Format(e.to_string()))?;
    if grammar.num_sequences() != nodes.len() {
        return Err(Error::Format("PDL grammar does not match the node table".into()));
    }

    let freqs = match sections.iter().find(|s| &s.tag == b"PDLF") {
        Some(s) => {
            let mut d = Decoder::new(s);
            let runs = d.ints()?;
            let lengths = d.ints()?;
            let heads = d.ints()?;
            d.done()?;
            let total: usize = runs.iter().map(|&r| r as usize).sum();
            if runs.len() != nodes.len() || lengths.len() != total || heads.len() != total {
                return Err(Error::Format("inconsistent PDL frequency tables".into()));
            }
            let mut out = Vec::with_capacity(runs.len());
            let mut at = 0;
            for r in runs {
                let r = r as usize;
                out.push(FreqEncoding {
                    lengths: lengths[at..at + r].to_vec(),
                    heads: heads[at..at + r].to_vec(),
                });
                at += r;
            }
            Some(out)
        }
        None => None,
    };
    if (mode == PdlMode::TopK { with_freqs: true }) != freqs.is_some() {
        return Err(Error::Format("PDL frequency section does not match the mode".into()));
    }
    Ok(PdlIndex { params: PdlParams { block_size, beta, mode }, n, blocks, nodes, grammar, freqs })
}
