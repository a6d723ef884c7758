use crate::error::{Error, Result};

/// Run-length encoded non-increasing frequencies with differentially coded
/// run heads: `heads[0]` is the first value, then each entry is the drop
/// from the previous head.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FreqEncoding {
    pub lengths: Vec<u32>,
    pub heads: Vec<u32>,
}

impl FreqEncoding {
    pub fn encode(freqs: &[u32]) -> Result<Self> {
        let mut enc = FreqEncoding::default();
        let mut last = 0u32;
        for (i, &f) in freqs.iter().enumerate() {
            if f == 0 || (i > 0 && f > last) {
                return Err(Error::NotMonotone(i));
            }
            if i > 0 && f == last {
                *enc.lengths.last_mut().unwrap() += 1;
            } else {
                enc.heads.push(if i == 0 { f } else { last - f });
                enc.lengths.push(1);
            }
            last = f;
        }
        Ok(enc)
    }

    /// Encodes frequencies of a range of `total` suffixes, checking that the
    /// run count `r` obeys `r (r + 1) / 2 <= total`.
    pub fn encode_bounded(freqs: &[u32], total: usize) -> Result<Self> {
        let enc = Self::encode(freqs)?;
        let r = enc.num_runs();
        if r * (r + 1) / 2 > total {
            return Err(Error::RunBound { runs: r, total });
        }
        Ok(enc)
    }

    pub fn num_runs(&self) -> usize {
        self.lengths.len()
    }

    pub fn len(&self) -> usize {
        self.lengths.iter().map(|&l| l as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn decode(&self) -> Vec<u32> {
        self.decode_prefix(usize::MAX)
    }

    pub fn decode_prefix(&self, k: usize) -> Vec<u32> {
        let mut out = Vec::new();
        let mut value = 0u32;
        for (r, (&len, &h)) in self.lengths.iter().zip(&self.heads).enumerate() {
            value = if r == 0 { h } else { value - h };
            let take = (len as usize).min(k - out.len());
            out.extend(std::iter::repeat_n(value, take));
            if out.len() >= k {
                break;
            }
        }
        out
    }
}
