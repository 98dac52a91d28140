use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Named, shaped segments of a flat parameter vector, in storage order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParamLayout {
    segments: Vec<Segment>,
}

impl ParamLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// A single column segment.
    pub fn flat(name: &str, len: usize) -> Self {
        Self::new().with(name, len, 1)
    }

    pub fn with(mut self, name: &str, rows: usize, cols: usize) -> Self {
        self.segments.push(Segment { name: name.to_string(), rows, cols });
        self
    }

    /// Concatenation, prefixing every segment name of `other`.
    pub fn extend(mut self, prefix: &str, other: &ParamLayout) -> Self {
        for s in &other.segments {
            self.segments.push(Segment { name: format!("{prefix}{}", s.name), ..s.clone() });
        }
        self
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.iter().map(Segment::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offset and shape of a named segment.
    pub fn find(&self, name: &str) -> Option<(usize, &Segment)> {
        let mut offset = 0;
        for s in &self.segments {
            if s.name == name {
                return Some((offset, s));
            }
            offset += s.len();
        }
        None
    }

    /// Same shapes in the same order; names are not compared.
    pub fn same_shapes(&self, other: &ParamLayout) -> bool {
        self.segments.len() == other.segments.len()
            && self.segments.iter().zip(&other.segments).all(|(a, b)| (a.rows, a.cols) == (b.rows, b.cols))
    }
}

/// A flat vector of finite parameters with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    layout: Arc<ParamLayout>,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(layout: ParamLayout, values: Vec<f64>) -> Result<Self> {
        Self::with_layout(Arc::new(layout), values)
    }

    pub fn with_layout(layout: Arc<ParamLayout>, values: Vec<f64>) -> Result<Self> {
        if layout.len() != values.len() {
            return Err(Error::shape(format!("layout holds {} values, got {}", layout.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::argument(format!("parameter {i} is not finite")));
        }
        Ok(ParamVector { layout, values })
    }

    pub fn zeros(layout: ParamLayout) -> Self {
        let n = layout.len();
        ParamVector { layout: Arc::new(layout), values: vec![0.0; n] }
    }

    /// An unnamed single-segment vector.
    pub fn from_flat(values: Vec<f64>) -> Result<Self> {
        Self::new(ParamLayout::flat("values", values.len()), values)
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn shared_layout(&self) -> Arc<ParamLayout> {
        self.layout.clone()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn segment(&self, name: &str) -> Option<&[f64]> {
        self.layout.find(name).map(|(o, s)| &self.values[o..o + s.len()])
    }

    /// Same layout, new values.
    pub fn replaced(&self, values: Vec<f64>) -> Result<Self> {
        Self::with_layout(self.layout.clone(), values)
    }

    /// Splits into per-segment slices, in layout order.
    pub fn unpack(&self) -> Vec<(&Segment, &[f64])> {
        let mut out = Vec::with_capacity(self.layout.segments.len());
        let mut offset = 0;
        for s in &self.layout.segments {
            out.push((s, &self.values[offset..offset + s.len()]));
            offset += s.len();
        }
        out
    }

    /// Concatenates per-segment values into a vector with `layout`.
    pub fn pack(layout: ParamLayout, parts: &[&[f64]]) -> Result<Self> {
        if parts.len() != layout.segments.len() {
            return Err(Error::shape(format!("{} segments, got {} parts", layout.segments.len(), parts.len())));
        }
        for (s, p) in layout.segments.iter().zip(parts) {
            if s.len() != p.len() {
                return Err(Error::shape(format!("segment {} holds {} values, got {}", s.name, s.len(), p.len())));
            }
        }
        Self::new(layout, parts.concat())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_unpack_round_trip() {
        let layout = ParamLayout::new().with("w", 2, 2).with("b", 1, 2);
        let p = ParamVector::pack(layout.clone(), &[&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0]]).unwrap();
        assert_eq!(p.segment("b").unwrap(), &[5.0, 6.0]);
        let parts: Vec<&[f64]> = p.unpack().into_iter().map(|(_, v)| v).collect();
        assert_eq!(ParamVector::pack(layout, &parts).unwrap(), p);
    }

    #[test]
    fn rejects_mismatch_and_non_finite() {
        let layout = ParamLayout::flat("x", 2);
        assert!(matches!(ParamVector::new(layout.clone(), vec![1.0]), Err(Error::Shape(_))));
        assert!(ParamVector::new(layout, vec![1.0, f64::INFINITY]).is_err());
    }
}
