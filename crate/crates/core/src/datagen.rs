//! Synthetic repetitive collections and pattern sets.
//!
//! DNA: one source window is mutated into each base document at rate
//! `min(10p, 0.9)`, and every base into its variants at rate `p`; each
//! variant is a document. Concat and Version take consecutive source
//! windows as bases and mutate variants at rate `p`; Concat joins the
//! variants of a base into one document, Version keeps them apart.
//! Mutations replace a symbol by one drawn from the source's own symbol
//! distribution, which may be the original symbol.
//!
//! All randomness comes from ChaCha8 seeded with `GenSpec::seed`.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Collection, TERMINATOR};
use crate::doclist::{self, Located, Scratch};
use crate::error::{Error, Result};
use crate::{par, suffixes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Kind {
    Dna,
    Concat,
    Version,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Dna => "dna",
            Kind::Concat => "concat",
            Kind::Version => "version",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dna" => Some(Kind::Dna),
            "concat" => Some(Kind::Concat),
            "version" => Some(Kind::Version),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GenSpec {
    pub kind: Kind,
    pub base_count: usize,
    pub variants_per_base: usize,
    pub base_length: usize,
    pub rate: f64,
    pub seed: u64,
    /// Text to cut bases from; a synthetic one is generated when absent.
    #[serde(skip)]
    pub source: Option<Vec<u8>>,
}

impl GenSpec {
    pub fn new(kind: Kind, base_count: usize, variants_per_base: usize, base_length: usize, rate: f64, seed: u64) -> Self {
        GenSpec { kind, base_count, variants_per_base, base_length, rate, seed, source: None }
    }

    fn validate(&self) -> Result<()> {
        if self.base_count == 0 || self.variants_per_base == 0 || self.base_length == 0 {
            return Err(Error::InvalidParams(
                "bases, variants and length must all be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.rate) {
            return Err(Error::InvalidParams(format!("mutation rate {} outside [0, 1)", self.rate)));
        }
        Ok(())
    }
}

/// Per-symbol replacement probabilities.
#[derive(Debug, Clone)]
pub struct SymbolDist {
    symbols: Vec<u8>,
    index: WeightedIndex<f64>,
}

impl SymbolDist {
    pub fn new(weights: &[(u8, f64)]) -> Result<Self> {
        let kept: Vec<(u8, f64)> = weights.iter().copied().filter(|&(_, w)| w > 0.0).collect();
        if kept.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let index = WeightedIndex::new(kept.iter().map(|p| p.1)).map_err(|_| Error::EmptyDistribution)?;
        Ok(SymbolDist { symbols: kept.iter().map(|p| p.0).collect(), index })
    }

    /// Unigram frequencies of `s`.
    pub fn empirical(s: &[u8]) -> Result<Self> {
        let mut counts = [0u64; 256];
        for &b in s {
            counts[b as usize] += 1;
        }
        let w: Vec<(u8, f64)> = (0..=255u8).map(|b| (b, counts[b as usize] as f64)).collect();
        Self::new(&w)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u8 {
        self.symbols[self.index.sample(rng)]
    }
}

/// Replaces each position independently with probability `rate` by a draw
/// from `dist`.
pub fn mutate_zero_order<R: Rng>(s: &[u8], rate: f64, dist: &SymbolDist, rng: &mut R) -> Vec<u8> {
    let rate = rate.clamp(0.0, 1.0);
    s.iter()
        .map(|&b| if rng.gen_bool(rate) { dist.sample(rng) } else { b })
        .collect()
}

/// Base mutation rate for DNA bases.
pub fn base_rate(p: f64) -> f64 {
    (10.0 * p).min(0.9)
}

/// I.i.d. nucleotides with a mild AT bias.
pub fn synthetic_dna<R: Rng>(len: usize, rng: &mut R) -> Vec<u8> {
    let d = SymbolDist::new(&[(b'A', 0.3), (b'C', 0.2), (b'G', 0.2), (b'T', 0.3)]).unwrap();
    (0..len).map(|_| d.sample(rng)).collect()
}

/// Words over a generated vocabulary with Zipf-like frequencies,
/// separated by spaces.
pub fn synthetic_english<R: Rng>(len: usize, rng: &mut R) -> Vec<u8> {
    const ONSETS: &[&str] = &["", "b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "th", "w", "st", "pr"];
    const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ea", "ou"];
    const CODAS: &[&str] = &["", "", "n", "r", "s", "t", "d", "ng", "ll"];
    let vocab: Vec<Vec<u8>> = (0..500)
        .map(|_| {
            let syll = 1 + rng.gen_range(0..3);
            let mut w = String::new();
            for _ in 0..syll {
                w.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
                w.push_str(NUCLEI[rng.gen_range(0..NUCLEI.len())]);
                w.push_str(CODAS[rng.gen_range(0..CODAS.len())]);
            }
            w.into_bytes()
        })
        .collect();
    let zipf = WeightedIndex::new((1..=vocab.len()).map(|r| 1.0 / r as f64)).unwrap();
    let mut out = Vec::with_capacity(len + 16);
    while out.len() < len {
        out.extend_from_slice(&vocab[zipf.sample(rng)]);
        out.push(if rng.gen_bool(0.07) { b'\n' } else { b' ' });
    }
    out.truncate(len);
    out
}

struct Prepared {
    source: Vec<u8>,
    dist: SymbolDist,
    rng: ChaCha8Rng,
}

fn prepare(spec: &GenSpec, need: usize) -> Result<Prepared> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let source: Vec<u8> = match &spec.source {
        Some(s) => s.iter().copied().filter(|&b| b != TERMINATOR).collect(),
        None => match spec.kind {
            Kind::Dna => synthetic_dna(need, &mut rng),
            Kind::Concat | Kind::Version => synthetic_english(need, &mut rng),
        },
    };
    if source.len() < need {
        return Err(Error::SourceTooShort { have: source.len(), need });
    }
    let dist = SymbolDist::empirical(&source)?;
    Ok(Prepared { source, dist, rng })
}

/// Variants grouped by base.
fn variants(spec: &GenSpec) -> Result<Vec<Vec<Vec<u8>>>> {
    let (len, p) = (spec.base_length, spec.rate);
    match spec.kind {
        Kind::Dna => {
            let Prepared { source, dist, mut rng } = prepare(spec, len)?;
            let start = rng.gen_range(0..=source.len() - len);
            let window = &source[start..start + len];
            Ok((0..spec.base_count)
                .map(|_| {
                    let base = mutate_zero_order(window, base_rate(p), &dist, &mut rng);
                    (0..spec.variants_per_base)
                        .map(|_| mutate_zero_order(&base, p, &dist, &mut rng))
                        .collect()
                })
                .collect())
        }
        Kind::Concat | Kind::Version => {
            let total = spec.base_count * len;
            let Prepared { source, dist, mut rng } = prepare(spec, total)?;
            let start = rng.gen_range(0..=source.len() - total);
            Ok((0..spec.base_count)
                .map(|b| {
                    let base = &source[start + b * len..start + (b + 1) * len];
                    (0..spec.variants_per_base)
                        .map(|_| mutate_zero_order(base, p, &dist, &mut rng))
                        .collect()
                })
                .collect())
        }
    }
}

pub fn gen_dna(spec: &GenSpec) -> Result<Collection> {
    expect_kind(spec, Kind::Dna)?;
    Collection::new(&variants(spec)?.concat())
}

pub fn gen_concat(spec: &GenSpec) -> Result<Collection> {
    expect_kind(spec, Kind::Concat)?;
    let docs: Vec<Vec<u8>> = variants(spec)?.into_iter().map(|v| v.concat()).collect();
    Collection::new(&docs)
}

pub fn gen_version(spec: &GenSpec) -> Result<Collection> {
    expect_kind(spec, Kind::Version)?;
    Collection::new(&variants(spec)?.concat())
}

/// Dispatches on `spec.kind`.
pub fn generate(spec: &GenSpec) -> Result<Collection> {
    match spec.kind {
        Kind::Dna => gen_dna(spec),
        Kind::Concat => gen_concat(spec),
        Kind::Version => gen_version(spec),
    }
}

fn expect_kind(spec: &GenSpec, k: Kind) -> Result<()> {
    if spec.kind != k {
        return Err(Error::InvalidParams(format!("expected kind {}, got {}", k.name(), spec.kind.name())));
    }
    Ok(())
}

/// A pattern with its occurrence and document counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredPattern {
    pub pattern: Vec<u8>,
    pub occ: usize,
    pub docc: usize,
}

/// Samples `sample_count` substrings of length `len` uniformly among those
/// not crossing a terminator, drops duplicates, and keeps the `keep` with
/// the largest `occ / docc` (ties in lexicographic order).
pub fn gen_patterns_substr(
    c: &Collection,
    sa: &[u32],
    len: usize,
    sample_count: usize,
    keep: usize,
    seed: u64,
) -> Result<Vec<ScoredPattern>> {
    if len == 0 {
        return Err(Error::InvalidParams("pattern length must be at least 1".into()));
    }
    if keep > sample_count {
        return Err(Error::InvalidParams(format!("keep {keep} exceeds sample count {sample_count}")));
    }
    // cumulative count of valid starts per document
    let mut cum = Vec::with_capacity(c.num_docs());
    let mut total = 0usize;
    for g in 1..=c.num_docs() {
        total += (c.document(g).len() + 1).saturating_sub(len);
        cum.push(total);
    }
    if total == 0 {
        return Err(Error::PatternLengthExceedsDocs(len));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pats: Vec<Vec<u8>> = (0..sample_count)
        .map(|_| {
            let u = rng.gen_range(0..total);
            let g = cum.partition_point(|&x| x <= u);
            let off = u - if g == 0 { 0 } else { cum[g - 1] };
            c.document(g + 1)[off..off + len].to_vec()
        })
        .collect();
    pats.sort_unstable();
    pats.dedup();

    let d = c.num_docs();
    let src = Located { sa, coll: c };
    let mut scored = par::map_chunks_with(&pats, 256, Scratch::new, |s, p| {
        let (occ, docc) = match suffixes::find_range(c.text(), sa, p) {
            Some((sp, ep)) => (ep - sp + 1, doclist::list_brute(&src, d, sp, ep, s).unwrap().docc()),
            None => (0, 0),
        };
        ScoredPattern { pattern: p.clone(), occ, docc }
    });
    scored.sort_by(|a, b| {
        let lhs = a.occ as u128 * b.docc.max(1) as u128;
        let rhs = b.occ as u128 * a.docc.max(1) as u128;
        rhs.cmp(&lhs).then_with(|| a.pattern.cmp(&b.pattern))
    });
    scored.truncate(keep);
    Ok(scored)
}

/// One pattern per line, raw or hex encoded.
pub fn write_patterns<W: Write>(w: &mut W, patterns: &[Vec<u8>], hex_mode: bool) -> Result<()> {
    for (i, p) in patterns.iter().enumerate() {
        if hex_mode {
            writeln!(w, "{}", hex::encode(p))?;
        } else {
            if p.contains(&b'\n') {
                return Err(Error::MalformedInput(format!(
                    "pattern {} contains a newline; use hex mode",
                    i + 1
                )));
            }
            w.write_all(p)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads patterns, skipping empty lines. A trailing `\r` is kept in raw
/// mode since patterns are byte-transparent.
pub fn read_patterns<R: BufRead>(r: R, hex_mode: bool) -> Result<Vec<Vec<u8>>> {
    let mut out = Vec::new();
    for (i, line) in r.split(b'\n').enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if hex_mode {
            let text = std::str::from_utf8(&line)
                .map_err(|_| Error::MalformedInput(format!("line {}: not hex", i + 1)))?;
            out.push(
                hex::decode(text.trim())
                    .map_err(|e| Error::MalformedInput(format!("line {}: {e}", i + 1)))?,
            );
        } else {
            out.push(line);
        }
    }
    Ok(out)
}

pub fn read_pattern_file(path: impl AsRef<Path>, hex_mode: bool) -> Result<Vec<Vec<u8>>> {
    let f = std::fs::File::open(path)?;
    read_patterns(std::io::BufReader::new(f), hex_mode)
}

pub fn write_pattern_file(path: impl AsRef<Path>, patterns: &[Vec<u8>], hex_mode: bool) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_patterns(&mut w, patterns, hex_mode)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::e1;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(99)
    }

    fn hamming(a: &[u8], b: &[u8]) -> usize {
        a.iter().zip(b).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn mutate_limits() {
        let s = b"ACGTACGTAC".to_vec();
        let d = SymbolDist::empirical(&s).unwrap();
        assert_eq!(mutate_zero_order(&s, 0.0, &d, &mut rng()), s);
        let only_a = SymbolDist::new(&[(b'A', 1.0), (b'C', 0.0)]).unwrap();
        assert_eq!(mutate_zero_order(&s, 1.0, &only_a, &mut rng()), vec![b'A'; 10]);
        assert!(matches!(SymbolDist::new(&[(b'A', 0.0)]), Err(Error::EmptyDistribution)));
        assert!(matches!(SymbolDist::empirical(b""), Err(Error::EmptyDistribution)));
    }

    #[test]
    fn mutation_count_near_expectation() {
        let mut r = rng();
        let s = synthetic_dna(10_000, &mut r);
        // replacements are drawn over four letters, so a quarter keep the symbol
        let d = SymbolDist::new(&[(b'A', 1.0), (b'C', 1.0), (b'G', 1.0), (b'T', 1.0)]).unwrap();
        let diff = hamming(&s, &mutate_zero_order(&s, 0.01, &d, &mut r));
        assert!((50..=150).contains(&diff), "{diff}");
    }

    #[test]
    fn zero_order_preserved() {
        let mut r = rng();
        let s = synthetic_english(50_000, &mut r);
        let d = SymbolDist::empirical(&s).unwrap();
        let out = mutate_zero_order(&s, 1.0, &d, &mut r);
        let n = s.len() as f64;
        for b in 0..=255u8 {
            let p = s.iter().filter(|&&x| x == b).count() as f64 / n;
            let got = out.iter().filter(|&&x| x == b).count() as f64;
            let sigma = (n * p * (1.0 - p)).sqrt();
            assert!((got - n * p).abs() <= 4.0 * sigma + 1e-9, "byte {b}: {got} vs {}", n * p);
        }
    }

    #[test]
    fn dna_shapes() {
        let c = gen_dna(&GenSpec::new(Kind::Dna, 1, 100, 1000, 0.01, 42)).unwrap();
        assert_eq!((c.num_docs(), c.len()), (100, 100 * 1001));
        let c = gen_dna(&GenSpec::new(Kind::Dna, 1, 3, 50, 0.0, 1)).unwrap();
        assert_eq!(c.document(1), c.document(2));
        assert_eq!(c.document(2), c.document(3));
    }

    #[test]
    fn dna_divergence_grows_with_rate() {
        let mean_dist = |p: f64| {
            let c = gen_dna(&GenSpec::new(Kind::Dna, 1, 20, 1000, p, 42)).unwrap();
            let docs: Vec<&[u8]> = c.documents().collect();
            let mut sum = 0;
            let mut pairs = 0;
            for i in 0..docs.len() {
                for j in i + 1..docs.len() {
                    sum += hamming(docs[i], docs[j]);
                    pairs += 1;
                }
            }
            sum as f64 / pairs as f64
        };
        let (a, b, c) = (mean_dist(0.001), mean_dist(0.01), mean_dist(0.1));
        assert!(a < b && b < c, "{a} {b} {c}");
    }

    #[test]
    fn segmentation_law() {
        let mut spec = GenSpec::new(Kind::Concat, 2, 2, 200, 0.05, 9);
        let concat = gen_concat(&spec).unwrap();
        spec.kind = Kind::Version;
        let version = gen_version(&spec).unwrap();
        assert_eq!((concat.num_docs(), version.num_docs()), (2, 4));
        let strip = |c: &Collection| c.text().iter().copied().filter(|&b| b != 0).collect::<Vec<_>>();
        assert_eq!(strip(&concat), strip(&version));
        assert_eq!(concat.document(1), [version.document(1), version.document(2)].concat());
    }

    #[test]
    fn concat_size() {
        let c = gen_concat(&GenSpec::new(Kind::Concat, 10, 100, 10_000, 0.003, 7)).unwrap();
        assert_eq!(c.len(), 10 * 100 * 10_000 + 10);
    }

    #[test]
    fn version_lists_more_documents_than_concat() {
        let mut spec = GenSpec::new(Kind::Concat, 3, 10, 300, 0.01, 5);
        let concat = gen_concat(&spec).unwrap();
        spec.kind = Kind::Version;
        let version = gen_version(&spec).unwrap();
        let mean_docc = |c: &Collection| {
            let sa = suffixes::build_sa(c.text());
            let pats = gen_patterns_substr(c, &sa, 4, 200, 200, 3).unwrap();
            pats.iter().map(|p| p.docc as f64).sum::<f64>() / pats.len() as f64
        };
        assert!(mean_docc(&version) > mean_docc(&concat));
    }

    #[test]
    fn deterministic() {
        for kind in [Kind::Dna, Kind::Concat, Kind::Version] {
            let spec = GenSpec::new(kind, 2, 3, 100, 0.03, 11);
            assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
            let other = GenSpec { seed: 12, ..spec.clone() };
            assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
        }
    }

    #[test]
    fn errors() {
        let mut spec = GenSpec::new(Kind::Version, 2, 2, 100, 0.01, 1);
        spec.source = Some(b"ACGT".to_vec());
        assert_eq!(gen_version(&spec), Err(Error::SourceTooShort { have: 4, need: 200 }));
        spec.kind = Kind::Dna;
        assert!(gen_version(&spec).is_err());
        assert!(gen_dna(&GenSpec::new(Kind::Dna, 0, 1, 1, 0.1, 1)).is_err());
        let c = e1();
        let sa = suffixes::build_sa(c.text());
        assert_eq!(gen_patterns_substr(&c, &sa, 4, 10, 10, 1), Err(Error::PatternLengthExceedsDocs(4)));
    }

    #[test]
    fn e1_patterns() {
        let c = e1();
        let sa = suffixes::build_sa(c.text());
        let pats = gen_patterns_substr(&c, &sa, 2, 1000, 1000, 1).unwrap();
        let got: Vec<(&[u8], usize, usize)> =
            pats.iter().map(|p| (p.pattern.as_slice(), p.occ, p.docc)).collect();
        assert_eq!(got, vec![(&b"AB"[..], 2, 2), (&b"BA"[..], 2, 2)]);
    }

    #[test]
    fn copies_rank_by_per_doc_frequency() {
        let c = Collection::new(&[b"AAAB"; 3]).unwrap();
        let sa = suffixes::build_sa(c.text());
        let pats = gen_patterns_substr(&c, &sa, 1, 500, 500, 4).unwrap();
        let got: Vec<(&[u8], usize, usize)> =
            pats.iter().map(|p| (p.pattern.as_slice(), p.occ, p.docc)).collect();
        assert_eq!(got, vec![(&b"A"[..], 9, 3), (&b"B"[..], 3, 3)]);
    }

    #[test]
    fn pattern_files() {
        let pats = vec![b"AB".to_vec(), vec![0xff, b'\n', 0x01]];
        let mut buf = Vec::new();
        write_patterns(&mut buf, &pats, true).unwrap();
        assert_eq!(buf, b"4142\nff0a01\n");
        assert_eq!(read_patterns(buf.as_slice(), true).unwrap(), pats);
        assert!(write_patterns(&mut Vec::new(), &pats, false).is_err());
        assert_eq!(read_patterns(&b"AB\n\nBA"[..], false).unwrap(), vec![b"AB".to_vec(), b"BA".to_vec()]);
        assert!(read_patterns(&b"zz\n"[..], true).is_err());
    }
}
