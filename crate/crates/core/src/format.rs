//! The `.dgx` container: magic `DGX1`, a 32-bit version, then tagged
//! sections, each a 4-byte tag and a 64-bit body length. All integers are
//! little-endian. Integer arrays are stored as a width byte, a 64-bit
//! count and the values packed at that width.

use std::io::{Read, Write};

use crate::bits::PackedInts;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DGX1";
pub const VERSION: u32 = 1;
/// Tag plus length prefix.
pub const SECTION_HEADER_BYTES: u64 = 12;

pub type Tag = [u8; 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub tag: Tag,
    pub body: Vec<u8>,
    /// Bits of actual content, excluding widths, counts and padding.
    pub payload_bits: u64,
}

impl Section {
    /// Tag with padding removed; RMQ sections carry their source key,
    /// e.g. `RMQ:C`.
    pub fn name(&self) -> String {
        let tag = tag_str(&self.tag);
        if &self.tag == b"RMQ " && self.body.len() >= 4 {
            let key: Tag = self.body[..4].try_into().unwrap();
            format!("RMQ:{}", tag_str(&key))
        } else {
            tag
        }
    }

    pub fn total_bits(&self) -> u64 {
        8 * (SECTION_HEADER_BYTES + self.body.len() as u64)
    }
}

fn tag_str(t: &Tag) -> String {
    String::from_utf8_lossy(t).trim_end().to_string()
}

/// Builds one section body.
#[derive(Debug, Default)]
pub struct Encoder {
    buf: Vec<u8>,
    payload: u64,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn tag(&mut self, t: &Tag) -> &mut Self {
        self.buf.extend_from_slice(t);
        self
    }

    /// Raw bytes counted as `bits` of payload.
    pub fn raw(&mut self, bytes: &[u8], bits: u64) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self.payload += bits;
        self
    }

    pub fn packed(&mut self, p: &PackedInts) -> &mut Self {
        self.u8(p.width() as u8).u64(p.len() as u64);
        self.raw(&p.payload_bytes(), p.payload_bits())
    }

    pub fn ints(&mut self, values: &[u32]) -> &mut Self {
        self.packed(&PackedInts::from_slice(values))
    }

    pub fn finish(self, tag: &Tag) -> Section {
        Section { tag: *tag, body: self.buf, payload_bits: self.payload }
    }
}

/// Reads one section body front to back.
pub struct Decoder<'a> {
    data: &'a [u8],
    pos: usize,
    what: String,
}

impl<'a> Decoder<'a> {
    pub fn new(s: &'a Section) -> Self {
        Decoder { data: &s.body, pos: 0, what: s.name() }
    }

    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < k {
            return Err(Error::Format(format!("section {} is truncated", self.what)));
        }
        let out = &self.data[self.pos..self.pos + k];
        self.pos += k;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("count overflows usize".into()))
    }

    pub fn tag(&mut self) -> Result<Tag> {
        Ok(self.take(4)?.try_into().unwrap())
    }

    pub fn raw(&mut self, k: usize) -> Result<&'a [u8]> {
        self.take(k)
    }

    pub fn packed(&mut self) -> Result<PackedInts> {
        let width = self.u8()? as u32;
        let len = self.usize()?;
        let nbytes = len
            .checked_mul(width as usize)
            .ok_or_else(|| Error::Format("packed array too large".into()))?
            .div_ceil(8);
        let bytes = self.take(nbytes)?;
        PackedInts::from_payload(width, len, bytes)
    }

    pub fn ints(&mut self) -> Result<Vec<u32>> {
        let p = self.packed()?;
        if p.width() > 32 {
            return Err(Error::Format(format!("section {} holds values wider than 32 bits", self.what)));
        }
        Ok(p.to_vec_u32())
    }

    pub fn done(&self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Format(format!("trailing bytes in section {}", self.what)));
        }
        Ok(())
    }
}

pub fn write_container<W: Write>(w: &mut W, sections: &[Section]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for s in sections {
        w.write_all(&s.tag)?;
        w.write_all(&(s.body.len() as u64).to_le_bytes())?;
        w.write_all(&s.body)?;
    }
    Ok(())
}

/// Parses a container. Payload bit counts are not recoverable from the
/// bytes alone and are left at zero.
pub fn read_container<R: Read>(r: &mut R) -> Result<Vec<Section>> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    if data.len() < 8 || &data[..4] != MAGIC {
        return Err(Error::Format("missing DGX1 magic".into()));
    }
    let version = u32::from_le_bytes(data[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut pos = 8;
    let mut out = Vec::new();
    while pos < data.len() {
        if data.len() - pos < SECTION_HEADER_BYTES as usize {
            return Err(Error::Format("truncated section header".into()));
        }
        let tag: Tag = data[pos..pos + 4].try_into().unwrap();
        let len = u64::from_le_bytes(data[pos + 4..pos + 12].try_into().unwrap());
        pos += 12;
        let len = usize::try_from(len)
            .ok()
            .filter(|&l| l <= data.len() - pos)
            .ok_or_else(|| Error::Format(format!("section {} overruns the file", tag_str(&tag))))?;
        out.push(Section { tag, body: data[pos..pos + len].to_vec(), payload_bits: 0 });
        pos += len;
    }
    Ok(out)
}
