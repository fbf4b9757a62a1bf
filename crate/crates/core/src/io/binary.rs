//! Versioned little-endian binary formats.
//!
//! Coefficient file (`UFGC`, version 1):
//!
//! ```text
//! magic "UFGC" | version u32 | N u32 | features u32 | high passes u32 | levels u32
//! | (high passes · levels + 1) × (r u32, j u32) | payload f64, row-major
//! ```
//!
//! Checkpoint file (`UFGP`, version 1):
//!
//! ```text
//! magic "UFGP" | version u32 | tensors u32
//! | tensors × (name length u32, name bytes, ndim u32, ndim × u64, payload f64 × len)
//! ```

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayD, IxDyn};

use crate::error::{Error, Result};
use crate::framelet::{block_ids, BlockId, CoefficientStack};

pub const COEFF_MAGIC: &[u8; 4] = b"UFGC";
pub const CHECKPOINT_MAGIC: &[u8; 4] = b"UFGP";
pub const FORMAT_VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format(format!("truncated payload at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("size does not fit in memory".into()))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("payload too large".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }
    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        let m = self.take(4)?;
        if m != magic {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(m),
                String::from_utf8_lossy(magic)
            )));
        }
        let v = self.u32()?;
        if v != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format version {v}, expected {FORMAT_VERSION}")));
        }
        Ok(())
    }
    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn encode_coefficients(c: &CoefficientStack<f64>) -> Vec<u8> {
    let ids = c.block_ids();
    let high = ids.iter().map(|b| b.r).max().unwrap_or(0);
    let levels = ids.iter().map(|b| b.j).max().unwrap_or(0);
    let mut out = Vec::with_capacity(24 + ids.len() * 8 + c.data().len() * 8);
    out.extend_from_slice(COEFF_MAGIC);
    for v in [FORMAT_VERSION, c.num_nodes() as u32, c.num_features() as u32, high as u32, levels as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for b in ids {
        out.extend_from_slice(&(b.r as u32).to_le_bytes());
        out.extend_from_slice(&(b.j as u32).to_le_bytes());
    }
    for v in c.data().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_coefficients(bytes: &[u8]) -> Result<CoefficientStack<f64>> {
    let mut r = Reader { buf: bytes, pos: 0 };
    r.header(COEFF_MAGIC)?;
    let n = r.u32()? as usize;
    let d = r.u32()? as usize;
    let high = r.u32()? as usize;
    let levels = r.u32()? as usize;
    if levels == 0 {
        return Err(Error::Format("scale level must be at least 1".into()));
    }
    let blocks = high * levels + 1;
    let mut ids = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        let rr = r.u32()? as usize;
        let j = r.u32()? as usize;
        ids.push(BlockId { r: rr, j });
    }
    if ids != block_ids(high, levels) {
        return Err(Error::Format("block map does not match the declared layout".into()));
    }
    let len = blocks
        .checked_mul(n)
        .and_then(|x| x.checked_mul(d))
        .ok_or_else(|| Error::Format("coefficient dimensions overflow".into()))?;
    let data = r.f64s(len)?;
    r.finish()?;
    let data = Array2::from_shape_vec((blocks * n, d), data).expect("length checked");
    CoefficientStack::new(n, ids, data)
}

pub fn write_coefficients(path: &Path, c: &CoefficientStack<f64>) -> Result<()> {
    Ok(fs::write(path, encode_coefficients(c))?)
}

pub fn read_coefficients(path: &Path) -> Result<CoefficientStack<f64>> {
    decode_coefficients(&fs::read(path)?)
}

/// Long-form CSV: `r,j,node,feature,value`.
pub fn coefficients_csv(c: &CoefficientStack<f64>) -> String {
    let mut s = String::from("r,j,node,feature,value\n");
    for (b, id) in c.block_ids().iter().enumerate() {
        for (node, row) in c.block(b).rows().into_iter().enumerate() {
            for (feature, v) in row.iter().enumerate() {
                s.push_str(&format!("{},{},{node},{feature},{v:?}\n", id.r, id.j));
            }
        }
    }
    s
}

/// Named tensors in a fixed order.
pub type Checkpoint = Vec<(String, ArrayD<f64>)>;

pub fn encode_checkpoint(tensors: &Checkpoint) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, t) in tensors {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.ndim() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in t.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { buf: bytes, pos: 0 };
    r.header(CHECKPOINT_MAGIC)?;
    let count = r.u32()? as usize;
    let mut out = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = String::from_utf8(r.take(len)?.to_vec()).map_err(|_| Error::Format("tensor name is not UTF-8".into()))?;
        let ndim = r.u32()? as usize;
        let shape = (0..ndim).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
        let size = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| Error::Format("tensor shape overflows".into()))?;
        let data = r.f64s(size)?;
        out.push((name, ArrayD::from_shape_vec(IxDyn(&shape), data).expect("length checked")));
    }
    r.finish()?;
    Ok(out)
}

pub fn write_checkpoint(path: &Path, tensors: &Checkpoint) -> Result<()> {
    Ok(fs::write(path, encode_checkpoint(tensors))?)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&fs::read(path)?)
}
