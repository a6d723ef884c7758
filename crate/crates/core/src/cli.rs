//! The `dgx` command line.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 on data errors.
//! Every run echoes its effective configuration to stderr as one JSON line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{self, RunOptions};
use crate::datagen::{self, GenSpec, Kind};
use crate::doclist::Scratch;
use crate::error::Error;
use crate::index::{Answer, BuildOptions, Index, Query, Structure};
use crate::pdl::{PdlMode, PdlParams};
use crate::Collection;

#[derive(Parser, Debug)]
#[command(name = "dgx", version, about = "Document listing and top-k retrieval indexes")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Generate a synthetic collection.
    Gen(GenArgs),
    /// Sample a pattern file from a collection.
    Patterns(PatternArgs),
    /// Build and save an index.
    Build(BuildArgs),
    /// Answer patterns with one structure.
    Query(QueryArgs),
    /// Time structures on a pattern batch and write CSV / JSON.
    Bench(BenchArgs),
    /// Print collection statistics.
    Stats(StatsArgs),
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: Kind,
    #[arg(long, default_value_t = 1)]
    bases: usize,
    #[arg(long, default_value_t = 100)]
    variants: usize,
    #[arg(long, default_value_t = 1000)]
    length: usize,
    #[arg(long, default_value_t = 0.01)]
    rate: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Text to cut base documents from (synthetic when omitted).
    #[arg(long)]
    source: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct PatternArgs {
    /// Collection file, or a directory with one document per file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 7)]
    len: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    keep: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    hex: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated structure names, or `all`.
    #[arg(long, default_value = "all", value_parser = parse_structures)]
    structures: StructureList,
    #[arg(long = "pdl-b", default_value_t = 256)]
    pdl_b: usize,
    #[arg(long = "pdl-beta", default_value_t = 16)]
    pdl_beta: u32,
    #[arg(long = "pdl-mode", default_value = "list", value_parser = parse_pdl_mode)]
    pdl_mode: PdlMode,
}

#[derive(Args, Debug, Serialize)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long, value_parser = parse_structure)]
    structure: Structure,
    #[arg(long)]
    patterns: PathBuf,
    #[arg(long, default_value = "list", value_parser = parse_mode)]
    mode: ModeArg,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Patterns are hex encoded, and printed that way.
    #[arg(long)]
    hex: bool,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    patterns: PathBuf,
    #[arg(long, default_value = "list", value_parser = parse_mode)]
    mode: ModeArg,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Structures to run; defaults to every stored one supporting the mode.
    #[arg(long, value_parser = parse_structures)]
    structures: Option<StructureList>,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    hex: bool,
    /// Also time the find step.
    #[arg(long = "include-find")]
    include_find: bool,
    /// Shard patterns over worker threads.
    #[arg(long)]
    parallel: bool,
    /// Collection label for the CSV (default: index file stem).
    #[arg(long)]
    collection: Option<String>,
    /// Generator seed to record in the CSV.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    patterns: Option<PathBuf>,
    #[arg(long)]
    hex: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    List,
    Topk,
}

#[derive(Debug, Clone, Serialize)]
struct StructureList(Vec<Structure>);

fn parse_kind(s: &str) -> Result<Kind, String> {
    Kind::parse(s).ok_or_else(|| format!("expected dna, concat or version, got `{s}`"))
}

fn parse_structure(s: &str) -> Result<Structure, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_structures(s: &str) -> Result<StructureList, String> {
    Structure::parse_list(s).map(StructureList).map_err(|e| e.to_string())
}

fn parse_pdl_mode(s: &str) -> Result<PdlMode, String> {
    PdlMode::parse(s).ok_or_else(|| format!("expected list, topk or topk+f, got `{s}`"))
}

fn parse_mode(s: &str) -> Result<ModeArg, String> {
    match s {
        "list" => Ok(ModeArg::List),
        "topk" => Ok(ModeArg::Topk),
        _ => Err(format!("expected list or topk, got `{s}`")),
    }
}

enum Failure {
    Usage(String),
    Data(String),
}

fn data(ctx: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::Data(format!("{ctx}: {e}"))
}

fn io(ctx: &str) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Data(format!("{ctx}: {e}"))
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            return match e.kind() {
                DisplayHelp | DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    let _ = writeln!(err, "config: {}", serde_json::to_string(&cli.cmd).unwrap_or_default());
    let res = match &cli.cmd {
        Command::Gen(a) => gen(a),
        Command::Patterns(a) => patterns(a),
        Command::Build(a) => build(a, err),
        Command::Query(a) => query(a, out),
        Command::Bench(a) => bench_cmd(a, out, err),
        Command::Stats(a) => stats(a, out),
    };
    match res {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Data(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn read_collection(path: &Path) -> std::result::Result<Collection, Failure> {
    let res = if path.is_dir() { Collection::read_dir(path) } else { Collection::read_docs(path) };
    res.map_err(|e| Failure::Data(format!("--input {}: {e}", path.display())))
}

fn read_patterns(path: &Path, hex: bool) -> std::result::Result<Vec<Vec<u8>>, Failure> {
    datagen::read_pattern_file(path, hex).map_err(|e| Failure::Data(format!("--patterns {}: {e}", path.display())))
}

fn gen(a: &GenArgs) -> Outcome {
    if !(0.0..1.0).contains(&a.rate) {
        return Err(Failure::Usage(format!("--rate must lie in [0, 1), got {}", a.rate)));
    }
    let mut spec = GenSpec::new(a.kind, a.bases, a.variants, a.length, a.rate, a.seed);
    if let Some(src) = &a.source {
        spec.source = Some(std::fs::read(src).map_err(io("--source"))?);
    }
    let c = datagen::generate(&spec).map_err(data("gen"))?;
    c.write_docs(&a.out).map_err(data("--out"))
}

fn patterns(a: &PatternArgs) -> Outcome {
    let c = read_collection(&a.input)?;
    let sa = crate::suffixes::build_sa(c.text());
    let pats = datagen::gen_patterns_substr(&c, &sa, a.len, a.samples, a.keep, a.seed).map_err(data("patterns"))?;
    let list: Vec<Vec<u8>> = pats.into_iter().map(|p| p.pattern).collect();
    datagen::write_pattern_file(&a.out, &list, a.hex).map_err(data("--out"))
}

fn build(a: &BuildArgs, err: &mut dyn Write) -> Outcome {
    if a.pdl_b < 2 {
        return Err(Failure::Usage(format!("--pdl-b must be at least 2, got {}", a.pdl_b)));
    }
    let c = read_collection(&a.input)?;
    let opts = BuildOptions {
        structures: a.structures.0.clone(),
        pdl: PdlParams { block_size: a.pdl_b, beta: a.pdl_beta, mode: a.pdl_mode },
    };
    let idx = Index::build(c, &opts).map_err(data("build"))?;
    idx.save(&a.out).map_err(data("--out"))?;
    let _ = writeln!(err, "built {} over n={} d={}", names(idx.structures()), idx.len(), idx.collection().num_docs());
    Ok(())
}

fn names(s: &[Structure]) -> String {
    s.iter().map(|x| x.name()).collect::<Vec<_>>().join(",")
}

fn load(path: &Path) -> std::result::Result<Index, Failure> {
    Index::load(path).map_err(|e| Failure::Data(format!("--index {}: {e}", path.display())))
}

fn to_query(mode: ModeArg, k: usize) -> std::result::Result<Query, Failure> {
    match mode {
        ModeArg::List => Ok(Query::List),
        ModeArg::Topk if k == 0 => Err(Failure::Usage("--k must be at least 1".into())),
        ModeArg::Topk => Ok(Query::TopK(k)),
    }
}

fn query(a: &QueryArgs, out: &mut dyn Write) -> Outcome {
    let q = to_query(a.mode, a.k)?;
    let idx = load(&a.index)?;
    let pats = read_patterns(&a.patterns, a.hex)?;
    if !idx.has(a.structure) {
        return Err(Failure::Data(format!("--structure: {}", Error::MissingStructure(a.structure.name().into()))));
    }
    if q != Query::List && !idx.supports_topk(a.structure) {
        return Err(Failure::Data(format!("--structure: {} does not answer top-k queries", a.structure)));
    }
    let mut sc = Scratch::new();
    let mut buf = Vec::new();
    for p in &pats {
        let ans = idx.query(a.structure, p, q, &mut sc).map_err(data("query"))?;
        if a.hex {
            buf.extend_from_slice(hex::encode(p).as_bytes());
        } else {
            buf.extend_from_slice(p);
        }
        buf.push(b'\t');
        buf.extend_from_slice(format_answer(&ans).as_bytes());
        buf.push(b'\n');
    }
    out.write_all(&buf).map_err(io("stdout"))
}

/// `1,2,3` for listing; `doc:freq` pairs for top-k when frequencies are
/// known.
pub fn format_answer(a: &Answer) -> String {
    match a {
        Answer::List(r) => r.docs.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
        Answer::TopK(t) => match &t.freqs {
            Some(f) => t.docs.iter().zip(f).map(|(d, f)| format!("{d}:{f}")).collect::<Vec<_>>().join(","),
            None => t.docs.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
        },
    }
}

fn bench_cmd(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let q = to_query(a.mode, a.k)?;
    let idx = load(&a.index)?;
    let pats = read_patterns(&a.patterns, a.hex)?;
    if pats.is_empty() {
        return Err(Failure::Data("--patterns: no patterns".into()));
    }
    let structures: Vec<Structure> = match &a.structures {
        Some(l) => l.0.clone(),
        None => idx
            .structures()
            .iter()
            .copied()
            .filter(|&s| q == Query::List || idx.supports_topk(s))
            .collect(),
    };
    if structures.is_empty() {
        return Err(Failure::Data("--index: no stored structure supports this mode".into()));
    }
    let name = a.collection.clone().unwrap_or_else(|| {
        a.index.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    });
    let opts = RunOptions { query: q, include_find: a.include_find, parallel: a.parallel };
    let rows = bench::bench_rows(&name, &idx, &structures, &pats, opts, a.seed).map_err(data("bench"))?;
    let f = std::fs::File::create(&a.csv).map_err(io("--csv"))?;
    bench::write_csv(f, &rows).map_err(data("--csv"))?;
    if let Some(j) = &a.json {
        let f = std::fs::File::create(j).map_err(io("--json"))?;
        bench::write_json(f, &rows).map_err(data("--json"))?;
    }
    let _ = writeln!(err, "note: {}", bench::SIZE_NOTE);
    for r in &rows {
        let _ = writeln!(
            out,
            "{}\t{:.3} bpc\t{:.6} s\tocc {:.2}\tdocc {:.2}",
            r.structure, r.size_bpc, r.total_time_s, r.avg_occ, r.avg_docc
        );
    }
    Ok(())
}

fn stats(a: &StatsArgs, out: &mut dyn Write) -> Outcome {
    let c = read_collection(&a.input)?;
    let pats = match &a.patterns {
        Some(p) => read_patterns(p, a.hex)?,
        None => Vec::new(),
    };
    if let Some(p) = pats.iter().find(|p| p.is_empty() || p.contains(&crate::corpus::TERMINATOR)) {
        return Err(Failure::Data(format!("--patterns: invalid pattern {}", hex::encode(p))));
    }
    let name = a.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let row = bench::collection_stats(&name, &c, &pats);
    out.write_all(bench::render_stats(&[row]).as_bytes()).map_err(io("stdout"))
}
