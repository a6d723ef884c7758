//! Size accounting, batched query timing and collection statistics.
//!
//! Sizes are the serialized bytes of the sections a structure reads at
//! query time, divided by the collection length. Query timing covers only
//! the listing / top-k step on precomputed find ranges unless
//! `include_find` is set.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::corpus::Collection;
use crate::doclist::{self, Located, Scratch};
use crate::error::{Error, Result};
use crate::format::Section;
use crate::index::{Answer, Index, Query, Structure};
use crate::pdl::PdlMode;
use crate::{par, suffixes};

/// Note carried by machine-readable outputs.
pub const SIZE_NOTE: &str = "sizes are the serialized query-time sections of each structure \
(suffix array, document array or boundary bitvector, and the method's own arrays); \
no compressed suffix array is involved";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectionSize {
    pub name: String,
    pub payload_bits: u64,
    /// Payload plus section header, widths, counts and padding.
    pub total_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeReport {
    pub n: usize,
    pub sections: Vec<SectionSize>,
    pub total_bits: u64,
}

impl SizeReport {
    pub fn bpc(&self) -> f64 {
        self.total_bits as f64 / self.n as f64
    }

    pub fn section(&self, name: &str) -> Option<&SectionSize> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// `NAME:bits` pairs joined by `;`, summing to `total_bits`.
    pub fn breakdown(&self) -> String {
        self.sections
            .iter()
            .map(|s| format!("{}:{}", s.name, s.total_bits))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Encoded sections of an index, measured once and shared by every
/// structure's report.
pub struct SizeTable {
    n: usize,
    pdl_freqs: bool,
    sections: Vec<SectionSize>,
}

impl SizeTable {
    pub fn new(index: &Index) -> Self {
        Self::from_sections(
            index.len(),
            index.pdl_mode() == Some(PdlMode::TopK { with_freqs: true }),
            &index.sections(),
        )
    }

    pub fn from_sections(n: usize, pdl_freqs: bool, sections: &[Section]) -> Self {
        let sections = sections
            .iter()
            .map(|s| SectionSize { name: s.name(), payload_bits: s.payload_bits, total_bits: s.total_bits() })
            .collect();
        SizeTable { n, pdl_freqs, sections }
    }

    /// All sections, including those no structure is charged for.
    pub fn all(&self) -> &[SectionSize] {
        &self.sections
    }

    pub fn measure(&self, s: Structure) -> Result<SizeReport> {
        let sections = s
            .required_sections(self.pdl_freqs)
            .into_iter()
            .map(|name| {
                self.sections
                    .iter()
                    .find(|x| x.name == name)
                    .cloned()
                    .ok_or_else(|| Error::MissingStructure(format!("{s} (section {name})")))
            })
            .collect::<Result<Vec<_>>>()?;
        let total_bits = sections.iter().map(|x| x.total_bits).sum();
        Ok(SizeReport { n: self.n, sections, total_bits })
    }
}

pub fn measure_size(index: &Index, s: Structure) -> Result<SizeReport> {
    SizeTable::new(index).measure(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub query: Query,
    pub include_find: bool,
    /// Shards patterns over worker threads, each with its own scratch.
    pub parallel: bool,
}

impl RunOptions {
    pub fn new(query: Query) -> Self {
        RunOptions { query, include_find: false, parallel: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub patterns: usize,
    pub total_time_s: f64,
    pub avg_occ: f64,
    /// Mean number of documents reported.
    pub avg_docc: f64,
    pub occ_docc_ratio: f64,
    pub total_occ: u64,
    pub total_docc: u64,
}

impl RunStats {
    fn from_totals(patterns: usize, secs: f64, occ: u64, docc: u64) -> Self {
        let p = patterns.max(1) as f64;
        RunStats {
            patterns,
            total_time_s: secs,
            avg_occ: occ as f64 / p,
            avg_docc: docc as f64 / p,
            occ_docc_ratio: if docc == 0 { 1.0 } else { occ as f64 / docc as f64 },
            total_occ: occ,
            total_docc: docc,
        }
    }
}

type Found = (Option<(usize, usize)>, usize);

fn locate_all(index: &Index, patterns: &[Vec<u8>]) -> Result<Vec<Found>> {
    patterns.iter().map(|p| Ok((index.find(p)?, p.len()))).collect()
}

fn answer_one(index: &Index, s: Structure, r: &Found, q: Query, scratch: &mut Scratch) -> Result<(u64, u64)> {
    let a = index.answer(s, r.0, r.1, q, scratch)?;
    let occ = r.0.map_or(0, |(sp, ep)| ep - sp + 1) as u64;
    Ok((occ, a.docs().len() as u64))
}

/// Runs every pattern through `s` and aggregates the results.
pub fn run_queries(index: &Index, s: Structure, patterns: &[Vec<u8>], opts: RunOptions) -> Result<RunStats> {
    if patterns.is_empty() {
        return Err(Error::InvalidParams("pattern set is empty".into()));
    }
    if let Query::TopK(_) = opts.query {
        if !index.supports_topk(s) {
            return Err(Error::Unsupported(s.name().into()));
        }
    }
    let pre = if opts.include_find { None } else { Some(locate_all(index, patterns)?) };
    let start = Instant::now();
    let per: Vec<Result<(u64, u64)>> = match &pre {
        Some(ranges) => run_batch(ranges, opts.parallel, |r, sc| answer_one(index, s, r, opts.query, sc)),
        None => run_batch(patterns, opts.parallel, |p, sc| {
            let r = (index.find(p)?, p.len());
            answer_one(index, s, &r, opts.query, sc)
        }),
    };
    let secs = start.elapsed().as_secs_f64();
    let (mut occ, mut docc) = (0, 0);
    for r in per {
        let (o, d) = r?;
        occ += o;
        docc += d;
    }
    Ok(RunStats::from_totals(patterns.len(), secs, occ, docc))
}

fn run_batch<T, F>(items: &[T], parallel: bool, f: F) -> Vec<Result<(u64, u64)>>
where
    T: Sync,
    F: Fn(&T, &mut Scratch) -> Result<(u64, u64)> + Sync + Send,
{
    if parallel {
        let chunk = items.len().div_ceil(4 * par::threads()).max(1);
        par::map_chunks_with(items, chunk, Scratch::new, |sc, x| f(x, sc))
    } else {
        let mut sc = Scratch::new();
        items.iter().map(|x| f(x, &mut sc)).collect()
    }
}

/// Answers of `s` for every pattern, untimed.
pub fn answers(index: &Index, s: Structure, patterns: &[Vec<u8>], q: Query) -> Result<Vec<Answer>> {
    let mut sc = Scratch::new();
    patterns.iter().map(|p| index.query(s, p, q, &mut sc)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub collection: String,
    pub size_bytes: usize,
    pub docs: usize,
    pub avg_doc_len: f64,
    pub patterns: usize,
    pub avg_occ: f64,
    pub avg_docc: f64,
    pub occ_docc_ratio: f64,
}

/// Size, document count, mean document length (`n / d`, terminators
/// included) and pattern occurrence statistics.
pub fn collection_stats(name: &str, c: &Collection, patterns: &[Vec<u8>]) -> StatsRow {
    let (mut occ, mut docc) = (0u64, 0u64);
    if !patterns.is_empty() {
        let sa = suffixes::build_sa(c.text());
        let src = Located { sa: &sa, coll: c };
        let d = c.num_docs();
        let counts = par::map_chunks_with(patterns, 64, Scratch::new, |sc, p| {
            match suffixes::find_range(c.text(), &sa, p) {
                Some((sp, ep)) => {
                    let docs = doclist::list_brute(&src, d, sp, ep, sc).map_or(0, |r| r.docc());
                    ((ep - sp + 1) as u64, docs as u64)
                }
                None => (0, 0),
            }
        });
        for (o, d) in counts {
            occ += o;
            docc += d;
        }
    }
    let p = patterns.len().max(1) as f64;
    StatsRow {
        collection: name.to_string(),
        size_bytes: c.len(),
        docs: c.num_docs(),
        avg_doc_len: c.len() as f64 / c.num_docs() as f64,
        patterns: patterns.len(),
        avg_occ: occ as f64 / p,
        avg_docc: docc as f64 / p,
        occ_docc_ratio: if docc == 0 { 1.0 } else { occ as f64 / docc as f64 },
    }
}

/// Plain-text table of statistics rows.
pub fn render_stats(rows: &[StatsRow]) -> String {
    let mut out = format!(
        "{:<16} {:>12} {:>9} {:>10} {:>8} {:>10} {:>9} {:>9}\n",
        "collection", "size_bytes", "docs", "n/d", "patterns", "occ", "docc", "occ/docc"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<16} {:>12} {:>9} {:>10.2} {:>8} {:>10.2} {:>9.2} {:>9.2}\n",
            r.collection, r.size_bytes, r.docs, r.avg_doc_len, r.patterns, r.avg_occ, r.avg_docc, r.occ_docc_ratio
        ));
    }
    out
}

/// One benchmark result line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub collection: String,
    pub structure: String,
    pub params: String,
    pub mode: String,
    pub k: Option<usize>,
    pub size_bpc: f64,
    pub size_breakdown: String,
    pub patterns: usize,
    pub total_time_s: f64,
    pub avg_occ: f64,
    pub avg_docc: f64,
    pub occ_docc_ratio: f64,
    pub seed: Option<u64>,
}

/// Parameter string of a structure as built in `index`.
pub fn structure_params(index: &Index, s: Structure) -> String {
    match (s, index.pdl()) {
        (Structure::Pdl, Some(p)) => {
            let pr = p.params();
            format!("b={};beta={};mode={}", pr.block_size, pr.beta, pr.mode.name())
        }
        (Structure::Mut | Structure::SadaD | Structure::SadaL | Structure::IlcpD | Structure::IlcpL | Structure::IlcpRuns, _) => {
            format!("rmq_block={}", crate::rmq::BLOCK)
        }
        _ => String::new(),
    }
}

/// Benchmarks `structures` on one pattern batch.
pub fn bench_rows(
    collection: &str,
    index: &Index,
    structures: &[Structure],
    patterns: &[Vec<u8>],
    opts: RunOptions,
    seed: Option<u64>,
) -> Result<Vec<BenchRow>> {
    let sizes = SizeTable::new(index);
    let (mode, k) = match opts.query {
        Query::List => ("list", None),
        Query::TopK(k) => ("topk", Some(k)),
    };
    structures
        .iter()
        .map(|&s| {
            let size = sizes.measure(s)?;
            let st = run_queries(index, s, patterns, opts)?;
            Ok(BenchRow {
                collection: collection.to_string(),
                structure: s.name().to_string(),
                params: structure_params(index, s),
                mode: mode.to_string(),
                k,
                size_bpc: size.bpc(),
                size_breakdown: size.breakdown(),
                patterns: st.patterns,
                total_time_s: st.total_time_s,
                avg_occ: st.avg_occ,
                avg_docc: st.avg_docc,
                occ_docc_ratio: st.occ_docc_ratio,
                seed,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(w: W, rows: &[BenchRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wr.write_record([
            "collection", "structure", "params", "mode", "k", "size_bpc", "size_breakdown", "patterns",
            "total_time_s", "avg_occ", "avg_docc", "occ_docc_ratio", "seed",
        ])
        .map_err(csv_err)?;
    }
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    note: &'static str,
    rows: &'a [BenchRow],
}

pub fn write_json<W: Write>(w: W, rows: &[BenchRow]) -> Result<()> {
    serde_json::to_writer_pretty(w, &JsonReport { note: SIZE_NOTE, rows }).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::e1;
    use crate::index::BuildOptions;
    use crate::pdl::PdlParams;

    fn e1_index() -> Index {
        Index::build(e1(), &BuildOptions::default()).unwrap()
    }

    fn pats(p: &[&str]) -> Vec<Vec<u8>> {
        p.iter().map(|s| s.as_bytes().to_vec()).collect()
    }

    #[test]
    fn e1_brute_d_size() {
        let r = measure_size(&e1_index(), Structure::BruteD).unwrap();
        let da = r.section("DA").unwrap();
        assert_eq!(da.payload_bits, 20);
        assert_eq!(da.payload_bits as f64 / r.n as f64, 2.0);
        let sum: u64 = r.sections.iter().map(|s| s.total_bits).sum();
        assert_eq!(sum, r.total_bits);
    }

    #[test]
    fn brute_l_has_no_da() {
        let r = measure_size(&e1_index(), Structure::BruteL).unwrap();
        let names: Vec<&str> = r.sections.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["SA", "BITV"]);
    }

    #[test]
    fn pdl_size_matches_file_sections() {
        let opts = BuildOptions {
            structures: vec![Structure::Pdl],
            pdl: PdlParams { block_size: 2, beta: 0, mode: PdlMode::TopK { with_freqs: true } },
        };
        let idx = Index::build(e1(), &opts).unwrap();
        let r = measure_size(&idx, Structure::Pdl).unwrap();
        let mut bytes = Vec::new();
        crate::format::write_container(&mut bytes, &idx.sections()).unwrap();
        let file = crate::format::read_container(&mut bytes.as_slice()).unwrap();
        for name in ["PDLB", "PDLN", "PDLS", "PDLF"] {
            let s = file.iter().find(|s| s.name() == name).unwrap();
            assert_eq!(r.section(name).unwrap().total_bits, s.total_bits(), "{name}");
        }
    }

    #[test]
    fn e1_list_means() {
        let idx = e1_index();
        let p = pats(&["A", "AB", "BA"]);
        let mut first = None;
        for s in Structure::ALL {
            let st = run_queries(&idx, s, &p, RunOptions::new(Query::List)).unwrap();
            assert!((st.avg_occ - 8.0 / 3.0).abs() < 1e-12);
            assert!((st.avg_docc - 7.0 / 3.0).abs() < 1e-12);
            let key = (st.total_occ, st.total_docc);
            assert_eq!(*first.get_or_insert(key), key, "{s}");
        }
        let par = RunOptions { parallel: true, include_find: true, ..RunOptions::new(Query::List) };
        let st = run_queries(&idx, Structure::Mut, &p, par).unwrap();
        assert_eq!((st.total_occ, st.total_docc), (8, 7));
    }

    #[test]
    fn absent_patterns() {
        let st = run_queries(&e1_index(), Structure::BruteD, &pats(&["BB", "AAA"]), RunOptions::new(Query::List))
            .unwrap();
        assert_eq!((st.avg_occ, st.avg_docc, st.occ_docc_ratio), (0.0, 0.0, 1.0));
        assert!(run_queries(&e1_index(), Structure::BruteD, &[], RunOptions::new(Query::List)).is_err());
    }

    #[test]
    fn stats_rows() {
        let r = collection_stats("e1", &e1(), &pats(&["A", "AB", "BA"]));
        assert_eq!((r.size_bytes, r.docs), (10, 3));
        assert!((r.avg_doc_len - 10.0 / 3.0).abs() < 1e-12);
        assert!((r.avg_docc - 7.0 / 3.0).abs() < 1e-12);
        let swissprot = StatsRow {
            collection: "Swissprot".into(),
            size_bytes: 143_244 * 398,
            docs: 143_244,
            avg_doc_len: 398.0,
            patterns: 0,
            avg_occ: 0.0,
            avg_docc: 0.0,
            occ_docc_ratio: 1.0,
        };
        let table = render_stats(&[swissprot]);
        let line = table.lines().nth(1).unwrap();
        let cells: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(&cells[..4], ["Swissprot", "57011112", "143244", "398.00"]);
    }

    #[test]
    fn csv_columns() {
        let idx = e1_index();
        let rows = bench_rows(
            "e1",
            &idx,
            &[Structure::BruteD, Structure::Pdl],
            &pats(&["A"]),
            RunOptions::new(Query::List),
            Some(3),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "collection,structure,params,mode,k,size_bpc,size_breakdown,patterns,total_time_s,avg_occ,avg_docc,occ_docc_ratio,seed"
        );
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("collection,structure"));
        let mut js = Vec::new();
        write_json(&mut js, &rows).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&js).unwrap();
        assert_eq!(v["rows"][1]["structure"], "pdl");
        assert_eq!(v["rows"][0]["seed"], 3);
    }

    #[test]
    fn topk_rows_need_support() {
        let idx = e1_index();
        let o = RunOptions::new(Query::TopK(2));
        assert!(run_queries(&idx, Structure::Mut, &pats(&["A"]), o).is_err());
        let st = run_queries(&idx, Structure::BruteL, &pats(&["A"]), o).unwrap();
        assert_eq!(st.total_docc, 2);
    }
}
