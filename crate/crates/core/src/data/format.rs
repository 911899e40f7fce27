//! Little-endian binary dataset container.
//!
//! ```text
//! offset  size      field
//! 0       4         magic "HCDS"
//! 4       2         version (u16) = 1
//! 6       2         reserved (u16) = 0
//! 8       8         N (u64)
//! 16      4         d (u32)
//! 20      4         C (u32)
//! 24      4*N       labels (u32)
//! 24+4N   4*N*d     features (f32, row-major)
//! ```

use std::fs;
use std::path::Path;

use super::dataset::FeatureDataset;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"HCDS";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 24;

pub fn encode_dataset(ds: &FeatureDataset) -> Vec<u8> {
    let n = ds.len();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * n + 4 * ds.features().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(ds.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(ds.num_classes() as u32).to_le_bytes());
    for &l in ds.labels() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    for &v in ds.features() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format_err(
                self.bytes.len(),
                format!("truncated while reading {what} ({len} bytes needed at offset {})", self.pos),
            )),
        }
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_dataset(bytes: &[u8]) -> Result<FeatureDataset> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4, "magic")? != MAGIC {
        return Err(format_err(0, "bad magic, expected \"HCDS\""));
    }
    let version = cur.u16("version")?;
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let reserved = cur.u16("reserved")?;
    if reserved != 0 {
        return Err(format_err(6, format!("reserved field is {reserved}, expected 0")));
    }
    let n = cur.u64("sample count")?;
    let d = cur.u32("feature dim")? as usize;
    let c = cur.u32("class count")? as usize;
    if n == 0 || d == 0 || c == 0 {
        return Err(format_err(8, format!("N={n}, d={d}, C={c}; all must be >= 1")));
    }
    let n = usize::try_from(n).map_err(|_| format_err(8, "sample count too large"))?;
    let payload = n.checked_mul(4).zip(n.checked_mul(d).and_then(|f| f.checked_mul(4)));
    let (label_bytes, feature_bytes) = payload.ok_or_else(|| format_err(8, "payload size overflows"))?;

    let label_start = cur.pos;
    let raw = cur.take(label_bytes, "labels")?;
    let mut labels = Vec::with_capacity(n);
    for (i, chunk) in raw.chunks_exact(4).enumerate() {
        let l = u32::from_le_bytes(chunk.try_into().unwrap());
        if l as usize >= c {
            return Err(format_err(
                label_start + 4 * i,
                format!("label {l} of sample {i} is not below class count {c}"),
            ));
        }
        labels.push(l);
    }

    let feature_start = cur.pos;
    let raw = cur.take(feature_bytes, "features")?;
    let mut features = Vec::with_capacity(n * d);
    for (i, chunk) in raw.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(format_err(feature_start + 4 * i, "non-finite feature value"));
        }
        features.push(v);
    }
    if cur.pos != bytes.len() {
        return Err(format_err(cur.pos, format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    FeatureDataset::new(d, c, features, labels)
}

pub fn save_dataset(ds: &FeatureDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_dataset(ds)).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<FeatureDataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dataset(&bytes)
}
