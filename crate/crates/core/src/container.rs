//! `SPGD` model container: named, shaped f64 tensors in little-endian form.
//!
//! ```text
//! magic "SPGD" | u32 version | u32 section count
//! per section: u32 name len | name bytes | u8 dtype (1 = f64)
//!              | u32 ndim | u64 dims[ndim] | f64 payload (row-major)
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SPGD";
pub const VERSION: u32 = 1;
const DTYPE_F64: u8 = 1;

#[derive(Debug, Clone)]
pub struct Tensor {
    pub dims: Vec<u64>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(dims: Vec<u64>, data: Vec<f64>) -> Result<Self> {
        let expected = element_count(&dims)?;
        if expected != data.len() {
            return Err(Error::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    /// Bitwise equality, so NaN payloads compare equal to themselves.
    pub fn bit_eq(&self, other: &Tensor) -> bool {
        self.dims == other.dims
            && self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn element_count(dims: &[u64]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| {
            usize::try_from(d).ok().and_then(|d| acc.checked_mul(d))
        })
        .ok_or_else(|| Error::Container(format!("tensor shape {dims:?} is too large")))
}

#[derive(Debug, Clone, Default)]
pub struct ModelContainer {
    sections: BTreeMap<String, Tensor>,
}

impl ModelContainer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str)
    }

    pub fn bit_eq(&self, other: &ModelContainer) -> bool {
        self.sections.len() == other.sections.len()
            && self
                .sections
                .iter()
                .zip(&other.sections)
                .all(|((na, a), (nb, b))| na == nb && a.bit_eq(b))
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        let name = name.into();
        if name.is_empty() || u32::try_from(name.len()).is_err() {
            return Err(Error::Container(format!("invalid section name {name:?}")));
        }
        self.sections.insert(name, tensor);
        Ok(())
    }

    pub fn insert_scalar(&mut self, name: impl Into<String>, value: f64) -> Result<()> {
        self.insert(name, Tensor::new(vec![], vec![value])?)
    }

    pub fn insert_vector(&mut self, name: impl Into<String>, values: &[f64]) -> Result<()> {
        self.insert(
            name,
            Tensor::new(vec![values.len() as u64], values.to_vec())?,
        )
    }

    pub fn insert_matrix(&mut self, name: impl Into<String>, m: &DMatrix<f64>) -> Result<()> {
        // nalgebra is column-major; the payload is row-major.
        let data = m.transpose().as_slice().to_vec();
        self.insert(
            name,
            Tensor::new(vec![m.nrows() as u64, m.ncols() as u64], data)?,
        )
    }

    pub fn insert_array2(&mut self, name: impl Into<String>, a: ArrayView2<'_, f64>) -> Result<()> {
        let (r, c) = a.dim();
        self.insert(
            name,
            Tensor::new(vec![r as u64, c as u64], a.iter().copied().collect())?,
        )
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.sections
            .get(name)
            .ok_or_else(|| Error::MissingSection(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        let t = self.get(name)?;
        match t.data.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::Container(format!(
                "section {name:?} is not a scalar"
            ))),
        }
    }

    /// Scalar section holding a non-negative integer.
    pub fn count(&self, name: &str) -> Result<usize> {
        let v = self.scalar(name)?;
        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as usize)
        } else {
            Err(Error::Container(format!(
                "section {name:?} is not a count: {v}"
            )))
        }
    }

    pub fn vector(&self, name: &str) -> Result<Vec<f64>> {
        let t = self.get(name)?;
        if t.dims.len() != 1 {
            return Err(Error::Container(format!(
                "section {name:?} has {} dimensions, expected 1",
                t.dims.len()
            )));
        }
        Ok(t.data.clone())
    }

    fn shape2(&self, name: &str) -> Result<(&Tensor, usize, usize)> {
        let t = self.get(name)?;
        match t.dims.as_slice() {
            [r, c] => Ok((t, *r as usize, *c as usize)),
            _ => Err(Error::Container(format!(
                "section {name:?} has {} dimensions, expected 2",
                t.dims.len()
            ))),
        }
    }

    pub fn matrix(&self, name: &str) -> Result<DMatrix<f64>> {
        let (t, r, c) = self.shape2(name)?;
        Ok(DMatrix::from_row_slice(r, c, &t.data))
    }

    pub fn array2(&self, name: &str) -> Result<Array2<f64>> {
        let (t, r, c) = self.shape2(name)?;
        Array2::from_shape_vec((r, c), t.data.clone())
            .map_err(|e| Error::Container(format!("section {name:?}: {e}")))
    }

    /// Rejects any section not accepted by `known`.
    pub fn check_sections(&self, known: impl Fn(&str) -> bool) -> Result<()> {
        match self.names().find(|n| !known(n)) {
            Some(n) => Err(Error::UnknownSection(n.to_string())),
            None => Ok(()),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.sections.len() as u32).to_le_bytes());
        for (name, t) in &self.sections {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.push(DTYPE_F64);
            out.extend_from_slice(&(t.dims.len() as u32).to_le_bytes());
            for d in &t.dims {
                out.extend_from_slice(&d.to_le_bytes());
            }
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Container("bad magic (expected SPGD)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Container(format!("unsupported version {version}")));
        }
        let count = r.u32()?;
        let mut sections = BTreeMap::new();
        for _ in 0..count {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::Container("section name is not UTF-8".into()))?
                .to_string();
            let dtype = r.take(1)?[0];
            if dtype != DTYPE_F64 {
                return Err(Error::Container(format!(
                    "section {name:?} has unsupported dtype tag {dtype}"
                )));
            }
            let ndim = r.u32()? as usize;
            let mut dims = Vec::with_capacity(ndim.min(16));
            for _ in 0..ndim {
                dims.push(r.u64()?);
            }
            let n = element_count(&dims)?;
            let payload = r.take(
                n.checked_mul(8)
                    .ok_or_else(|| Error::Container(format!("section {name:?} is too large")))?,
            )?;
            let data = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if sections
                .insert(name.clone(), Tensor { dims, data })
                .is_some()
            {
                return Err(Error::Container(format!("duplicate section {name:?}")));
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::Container(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Ok(Self { sections })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Container(msg) => Error::Container(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Container("truncated data".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
