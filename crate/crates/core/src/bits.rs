//! Plain bitvector with rank support and fixed-width packed integer arrays.

use crate::error::{Error, Result};

const WORDS_PER_BLOCK: usize = 8;
const BITS_PER_BLOCK: usize = 64 * WORDS_PER_BLOCK;

/// A bitvector addressed with 1-based positions, answering `rank1` in
/// constant time from per-block cumulative counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitvector {
    len: usize,
    words: Vec<u64>,
    // ones strictly before each block of `BITS_PER_BLOCK` bits
    block_ranks: Vec<u64>,
}

impl Bitvector {
    /// Builds from the 1-based positions of the set bits.
    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for p in ones {
            debug_assert!(p >= 1 && p <= len);
            let i = p - 1;
            words[i / 64] |= 1 << (i % 64);
        }
        Self::from_words(len, words)
    }

    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(len.div_ceil(64), 0);
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        let mut block_ranks = Vec::with_capacity(words.len() / WORDS_PER_BLOCK + 1);
        let mut acc = 0u64;
        for chunk in words.chunks(WORDS_PER_BLOCK) {
            block_ranks.push(acc);
            acc += chunk.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        }
        block_ranks.push(acc);
        Bitvector { len, words, block_ranks }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bit at 1-based position `p`.
    pub fn get(&self, p: usize) -> bool {
        let i = p - 1;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        *self.block_ranks.last().unwrap_or(&0) as usize
    }

    /// Number of set bits in positions `1..=j`.
    pub fn rank1(&self, j: usize) -> Result<usize> {
        if j > self.len {
            return Err(Error::OutOfBounds { pos: j, len: self.len });
        }
        Ok(self.rank1_unchecked(j))
    }

    #[inline]
    pub(crate) fn rank1_unchecked(&self, j: usize) -> usize {
        let block = j / BITS_PER_BLOCK;
        let mut r = self.block_ranks[block];
        let first = block * WORDS_PER_BLOCK;
        let full = j / 64;
        for w in &self.words[first..full] {
            r += w.count_ones() as u64;
        }
        let rem = j % 64;
        if rem != 0 {
            r += (self.words[full] & ((1u64 << rem) - 1)).count_ones() as u64;
        }
        r as usize
    }

    /// Bytes used by the bits plus the rank directory.
    pub fn size_in_bytes(&self) -> usize {
        8 * (self.words.len() + self.block_ranks.len())
    }
}

/// Number of bits needed to write `v` (at least 1).
pub fn bit_width(v: u64) -> u32 {
    (64 - v.leading_zeros()).max(1)
}

/// Unsigned integers packed at a fixed bit width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedInts {
    width: u32,
    len: usize,
    data: Vec<u64>,
}

impl PackedInts {
    pub fn with_width(width: u32, len: usize) -> Self {
        assert!((1..=64).contains(&width));
        let words = (len * width as usize).div_ceil(64);
        PackedInts { width, len, data: vec![0; words] }
    }

    /// Packs `values` at the narrowest width holding their maximum.
    pub fn from_slice<T: Copy + Into<u64>>(values: &[T]) -> Self {
        let max = values.iter().map(|&v| v.into()).max().unwrap_or(0);
        let mut p = Self::with_width(bit_width(max), values.len());
        for (i, &v) in values.iter().enumerate() {
            p.set(i, v.into());
        }
        p
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn payload_bits(&self) -> u64 {
        self.len as u64 * self.width as u64
    }

    /// 0-based access.
    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        let bit = i * self.width as usize;
        let (w, o) = (bit / 64, bit % 64);
        let mask = if self.width == 64 { u64::MAX } else { (1u64 << self.width) - 1 };
        let lo = self.data[w] >> o;
        if o + self.width as usize > 64 {
            (lo | self.data[w + 1] << (64 - o)) & mask
        } else {
            lo & mask
        }
    }

    pub fn set(&mut self, i: usize, v: u64) {
        let bit = i * self.width as usize;
        let (w, o) = (bit / 64, bit % 64);
        let mask = if self.width == 64 { u64::MAX } else { (1u64 << self.width) - 1 };
        debug_assert!(v & !mask == 0, "value {v} exceeds width {}", self.width);
        let v = v & mask;
        self.data[w] = (self.data[w] & !(mask << o)) | (v << o);
        if o + self.width as usize > 64 {
            let hi = 64 - o;
            self.data[w + 1] = (self.data[w + 1] & !(mask >> hi)) | (v >> hi);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_vec_u32(&self) -> Vec<u32> {
        self.iter().map(|v| v as u32).collect()
    }

    /// Little-endian payload truncated to `ceil(len * width / 8)` bytes.
    pub fn payload_bytes(&self) -> Vec<u8> {
        let nbytes = (self.payload_bits() as usize).div_ceil(8);
        let mut out: Vec<u8> = self.data.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(nbytes);
        out
    }

    pub fn from_payload(width: u32, len: usize, bytes: &[u8]) -> Result<Self> {
        if !(1..=64).contains(&width) {
            return Err(Error::Format(format!("bad integer width {width}")));
        }
        let nbytes = (len * width as usize).div_ceil(8);
        if bytes.len() != nbytes {
            return Err(Error::Format(format!(
                "packed array needs {nbytes} bytes, found {}",
                bytes.len()
            )));
        }
        let mut data = vec![0u64; (len * width as usize).div_ceil(64)];
        for (i, b) in bytes.iter().enumerate() {
            data[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        Ok(PackedInts { width, len, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_on_e1_boundaries() {
        let b = Bitvector::from_ones(10, [1, 5, 8]);
        assert_eq!(b.rank1(0).unwrap(), 0);
        assert_eq!(b.rank1(5).unwrap(), 2);
        assert_eq!(b.rank1(10).unwrap(), 3);
        assert!(matches!(b.rank1(11), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn width_of_small_values() {
        assert_eq!(bit_width(0), 1);
        assert_eq!(bit_width(1), 1);
        assert_eq!(bit_width(2), 2);
        assert_eq!(bit_width(3), 2);
        assert_eq!(bit_width(u64::MAX), 64);
    }

    proptest! {
        #[test]
        fn rank_matches_scan(bits in proptest::collection::vec(any::<bool>(), 0..2000)) {
            let ones = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1);
            let bv = Bitvector::from_ones(bits.len(), ones);
            let mut acc = 0;
            prop_assert_eq!(bv.rank1(0).unwrap(), 0);
            for (i, &b) in bits.iter().enumerate() {
                acc += b as usize;
                prop_assert_eq!(bv.rank1(i + 1).unwrap(), acc);
                prop_assert_eq!(bv.get(i + 1), b);
            }
        }

        #[test]
        fn packed_round_trip(values in proptest::collection::vec(any::<u64>(), 0..300), shift in 0u32..64) {
            let values: Vec<u64> = values.into_iter().map(|v| v >> shift).collect();
            let p = PackedInts::from_slice(&values);
            prop_assert_eq!(p.iter().collect::<Vec<_>>(), values.clone());
            let q = PackedInts::from_payload(p.width(), p.len(), &p.payload_bytes()).unwrap();
            prop_assert_eq!(q, p);
        }
    }
}
