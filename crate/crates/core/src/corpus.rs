//! Document collections: documents concatenated with `0x00` terminators and
//! the bitvector `B` marking where each document starts.
//!
//! Positions are 1-based throughout: `T[1..=n]`, documents `1..=d`.

use std::fs;
use std::path::Path;

use crate::bits::Bitvector;
use crate::error::{Error, Result};

/// Byte closing every document; sorts before every other byte.
pub const TERMINATOR: u8 = 0x00;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection {
    text: Vec<u8>,
    starts: Vec<usize>,
    bounds: Bitvector,
}

impl Collection {
    pub fn new<D: AsRef<[u8]>>(docs: &[D]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCollection);
        }
        let total = docs.iter().map(|d| d.as_ref().len() + 1).sum();
        let mut text = Vec::with_capacity(total);
        for (g, doc) in docs.iter().enumerate() {
            let doc = doc.as_ref();
            if let Some(off) = doc.iter().position(|&c| c == TERMINATOR) {
                return Err(Error::ForbiddenByte { doc: g + 1, offset: off + 1 });
            }
            text.extend_from_slice(doc);
            text.push(TERMINATOR);
        }
        Ok(Self::from_terminated(text))
    }

    /// Rebuilds a collection from its stored concatenation, which must be
    /// nonempty and end with the terminator.
    pub fn from_text(text: Vec<u8>) -> Result<Self> {
        match text.last() {
            None => Err(Error::EmptyCollection),
            Some(&TERMINATOR) => Ok(Self::from_terminated(text)),
            Some(_) => Err(Error::Format("text does not end with a terminator".into())),
        }
    }

    fn from_terminated(text: Vec<u8>) -> Self {
        let mut starts = vec![1];
        starts.extend(
            text.iter()
                .enumerate()
                .filter(|&(i, &c)| c == TERMINATOR && i + 1 < text.len())
                .map(|(i, _)| i + 2),
        );
        let bounds = Bitvector::from_ones(text.len(), starts.iter().copied());
        Collection { text, starts, bounds }
    }

    pub fn text(&self) -> &[u8] {
        &self.text
    }

    /// `n`, total length including terminators.
    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// `d`, the number of documents.
    pub fn num_docs(&self) -> usize {
        self.starts.len()
    }

    pub fn doc_starts(&self) -> &[usize] {
        &self.starts
    }

    pub fn bounds(&self) -> &Bitvector {
        &self.bounds
    }

    pub fn rank1(&self, j: usize) -> Result<usize> {
        self.bounds.rank1(j)
    }

    /// Document containing `T[i]`.
    pub fn doc_of(&self, i: usize) -> Result<usize> {
        if i == 0 || i > self.len() {
            return Err(Error::OutOfBounds { pos: i, len: self.len() });
        }
        Ok(self.bounds.rank1_unchecked(i))
    }

    #[inline]
    pub(crate) fn doc_of_unchecked(&self, i: usize) -> usize {
        self.bounds.rank1_unchecked(i)
    }

    /// Body of document `g` (1-based), without its terminator.
    pub fn document(&self, g: usize) -> &[u8] {
        let start = self.starts[g - 1] - 1;
        let end = self.starts.get(g).map_or(self.text.len(), |&s| s - 1) - 1;
        &self.text[start..end]
    }

    pub fn documents(&self) -> impl Iterator<Item = &[u8]> + '_ {
        (1..=self.num_docs()).map(move |g| self.document(g))
    }

    /// Reads a `.docs` file: the raw concatenation, terminators included.
    pub fn read_docs(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(fs::read(path)?)
    }

    pub fn write_docs(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, &self.text)?;
        Ok(())
    }

    /// One document per regular file, in lexicographic filename order.
    pub fn read_dir(path: impl AsRef<Path>) -> Result<Self> {
        let mut files: Vec<_> = fs::read_dir(path)?
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
            .map(|e| e.path())
            .collect();
        files.sort();
        let docs = files.iter().map(fs::read).collect::<std::io::Result<Vec<_>>>()?;
        Self::new(&docs)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Collection;

    /// `["ABA", "AB", "BA"]`
    pub fn e1() -> Collection {
        Collection::new(&["ABA", "AB", "BA"]).unwrap()
    }
}
