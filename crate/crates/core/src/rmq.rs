//! Range-minimum queries returning the leftmost minimum.
//!
//! The array is cut into blocks of [`BLOCK`] values; a sparse table of
//! power-of-two windows is built over the block minima and partial blocks
//! at the ends of a query are scanned. Space is `O((n / BLOCK) log n)`
//! words on top of the values themselves.

use crate::error::{Error, Result};

pub const BLOCK: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rmq {
    values: Vec<u32>,
    // levels[k][x]: 0-based position of the leftmost minimum over blocks x..x + 2^k
    levels: Vec<Vec<u32>>,
}

impl Rmq {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyArray);
        }
        let nblocks = values.len().div_ceil(BLOCK);
        let base: Vec<u32> = (0..nblocks)
            .map(|b| {
                let lo = b * BLOCK;
                let hi = (lo + BLOCK).min(values.len());
                leftmost_min(&values, lo, hi - 1) as u32
            })
            .collect();
        let mut levels = vec![base];
        let mut width = 1;
        while 2 * width <= nblocks {
            let prev = levels.last().unwrap();
            let next = (0..=nblocks - 2 * width)
                .map(|x| pick(&values, prev[x], prev[x + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        Ok(Rmq { values, levels })
    }

    pub(crate) fn from_parts(values: Vec<u32>, levels: Vec<Vec<u32>>) -> Result<Self> {
        let nblocks = values.len().div_ceil(BLOCK);
        if values.is_empty() || levels.is_empty() || levels[0].len() != nblocks {
            return Err(Error::Format("inconsistent RMQ tables".into()));
        }
        Ok(Rmq { values, levels })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub(crate) fn levels(&self) -> &[Vec<u32>] {
        &self.levels
    }

    /// Value at 1-based position `i`.
    #[inline]
    pub fn value(&self, i: usize) -> u32 {
        self.values[i - 1]
    }

    /// Leftmost position of the minimum of `a[i..=j]`, 1-based.
    pub fn query(&self, i: usize, j: usize) -> Result<usize> {
        if i == 0 || i > j || j > self.len() {
            return Err(Error::InvalidRange { sp: i, ep: j, len: self.len() });
        }
        Ok(self.query_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn query_unchecked(&self, i: usize, j: usize) -> usize {
        let (l, r) = (i - 1, j - 1);
        let (bl, br) = (l / BLOCK, r / BLOCK);
        if bl == br {
            return leftmost_min(&self.values, l, r) + 1;
        }
        let mut best = leftmost_min(&self.values, l, (bl + 1) * BLOCK - 1) as u32;
        if br > bl + 1 {
            let (x, y) = (bl + 1, br - 1);
            let k = (usize::BITS - 1 - (y - x + 1).leading_zeros()) as usize;
            let lv = &self.levels[k];
            best = pick(&self.values, best, lv[x]);
            best = pick(&self.values, best, lv[y + 1 - (1 << k)]);
        }
        let tail = leftmost_min(&self.values, br * BLOCK, r) as u32;
        pick(&self.values, best, tail) as usize + 1
    }

    pub fn size_in_bytes(&self) -> usize {
        4 * (self.values.len() + self.levels.iter().map(Vec::len).sum::<usize>())
    }
}

// prefers `a` on ties; callers pass the left candidate first
#[inline]
fn pick(values: &[u32], a: u32, b: u32) -> u32 {
    if values[b as usize] < values[a as usize] {
        b
    } else {
        a
    }
}

#[inline]
fn leftmost_min(values: &[u32], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for k in lo + 1..=hi {
        if values[k] < values[best] {
            best = k;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scan(a: &[u32], i: usize, j: usize) -> usize {
        (i..=j).min_by_key(|&k| (a[k - 1], k)).unwrap()
    }

    #[test]
    fn small_arrays() {
        assert_eq!(Rmq::new(vec![5]).unwrap().query(1, 1).unwrap(), 1);
        assert_eq!(Rmq::new(vec![3, 1, 2]).unwrap().query(1, 3).unwrap(), 2);
        assert_eq!(Rmq::new(vec![2, 1, 1, 4]).unwrap().query(1, 4).unwrap(), 2);
        assert_eq!(Rmq::new(vec![]), Err(Error::EmptyArray));
    }

    #[test]
    fn e1_c_and_ilcp() {
        let c = Rmq::new(vec![0, 0, 0, 1, 2, 3, 5, 6, 4, 7]).unwrap();
        assert_eq!(c.query(4, 7).unwrap(), 4);
        let ilcp = Rmq::new(vec![0, 0, 0, 0, 0, 0, 1, 0, 0, 0]).unwrap();
        assert_eq!(ilcp.query(4, 7).unwrap(), 4);
        for k in 1..=10 {
            assert_eq!(c.query(k, k).unwrap(), k);
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        let r = Rmq::new(vec![1, 2, 3]).unwrap();
        assert!(r.query(0, 1).is_err());
        assert!(r.query(3, 2).is_err());
        assert!(r.query(1, 4).is_err());
    }

    #[test]
    fn agrees_with_scan_on_random_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 100_000 {
            let n = rng.gen_range(1..=512);
            let alphabet = rng.gen_range(1..=20);
            let a: Vec<u32> = (0..n).map(|_| rng.gen_range(0..alphabet)).collect();
            let r = Rmq::new(a.clone()).unwrap();
            for _ in 0..200 {
                let i = rng.gen_range(1..=n);
                let j = rng.gen_range(i..=n);
                assert_eq!(r.query(i, j).unwrap(), scan(&a, i, j), "{a:?} [{i},{j}]");
                checked += 1;
            }
        }
    }
}
