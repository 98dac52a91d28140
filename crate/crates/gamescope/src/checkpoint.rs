//! Binary parameter checkpoints.
//!
//! Layout, all integers little-endian:
//! `b"GSCK"`, `u32` version, `u32` segment count, then per segment a `u32`
//! name length, the UTF-8 name, `u64` rows and `u64` cols; finally every
//! value as an `f64`.

use std::path::Path;

use gamescope_core::autograd::{ParamLayout, ParamVector};

use crate::error::{AppError, Result};

pub const MAGIC: &[u8; 4] = b"GSCK";
pub const VERSION: u32 = 1;

pub fn encode(v: &ParamVector) -> Vec<u8> {
    let segs = v.layout().segments();
    let mut out = Vec::with_capacity(16 + 8 * v.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(segs.len() as u32).to_le_bytes());
    for s in segs {
        out.extend_from_slice(&(s.name.len() as u32).to_le_bytes());
        out.extend_from_slice(s.name.as_bytes());
        out.extend_from_slice(&(s.rows as u64).to_le_bytes());
        out.extend_from_slice(&(s.cols as u64).to_le_bytes());
    }
    for x in v.values() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(AppError::format("checkpoint is truncated"));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<ParamVector> {
    let mut r = Reader { bytes };
    if r.take(4)? != MAGIC {
        return Err(AppError::format("not a checkpoint file (bad magic)"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(AppError::format(format!("unsupported checkpoint version {version}")));
    }
    let count = r.u32()?;
    let mut layout = ParamLayout::new();
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?).map_err(|_| AppError::format("segment name is not UTF-8"))?;
        let rows = usize::try_from(r.u64()?).map_err(|_| AppError::format("segment too large"))?;
        let cols = usize::try_from(r.u64()?).map_err(|_| AppError::format("segment too large"))?;
        layout = layout.with(name, rows, cols);
    }
    let n = layout.len();
    if r.bytes.len() != 8 * n {
        return Err(AppError::format(format!("checkpoint holds {} value bytes, layout needs {}", r.bytes.len(), 8 * n)));
    }
    let values = r.bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    ParamVector::new(layout, values).map_err(AppError::from)
}

pub fn save(path: &Path, v: &ParamVector) -> Result<()> {
    std::fs::write(path, encode(v)).map_err(AppError::io(path))
}

pub fn load(path: &Path) -> Result<ParamVector> {
    decode(&std::fs::read(path).map_err(AppError::io(path))?)
}

/// Loads a checkpoint and checks it against the expected layout.
pub fn load_matching(path: &Path, expected: &ParamLayout) -> Result<ParamVector> {
    let v = load(path)?;
    if v.layout() != expected {
        return Err(AppError::format(format!("{}: parameter layout does not match the game", path.display())));
    }
    Ok(v)
}
