//! The `TNSR` binary tensor format and on-disk layouts for decompositions.
//!
//! A file is the 4 bytes `TNSR`, a `u32` version (1), a `u8` dtype (1 for
//! f64, 2 for f32), a `u8` mode count, two zero bytes, one `u64` per extent
//! and then the values, first index fastest. All integers and values are
//! little endian. f32 payloads are widened to f64 on load.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cur::{CurDecomposition, CurVariant, HosvdDecomposition};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tensor::{DenseTensor, IndexSet};

pub const MAGIC: [u8; 4] = *b"TNSR";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F64,
    F32,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::F64 => 1,
            Dtype::F32 => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Dtype::F64),
            2 => Ok(Dtype::F32),
            other => Err(Error::MalformedFile(format!("unknown dtype code {other}"))),
        }
    }

    pub fn width(self) -> usize {
        match self {
            Dtype::F64 => 8,
            Dtype::F32 => 4,
        }
    }
}

pub fn write_tensor<W: Write>(w: &mut W, t: &DenseTensor, dtype: Dtype) -> Result<()> {
    let order = u8::try_from(t.order())
        .map_err(|_| Error::InvalidShape(format!("{} modes do not fit the header", t.order())))?;
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[dtype.code(), order, 0, 0])?;
    for &d in t.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    match dtype {
        Dtype::F64 => {
            for v in t.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Dtype::F32 => {
            for &v in t.data() {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

struct Header {
    dtype: Dtype,
    dims: Vec<usize>,
    len: usize,
}

impl Header {
    fn payload_bytes(&self) -> Result<usize> {
        self.len
            .checked_mul(self.dtype.width())
            .ok_or_else(|| Error::MalformedFile("payload size overflows".into()))
    }
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut head = [0u8; HEADER_LEN];
    r.read_exact(&mut head)
        .map_err(|_| Error::MalformedFile("truncated header".into()))?;
    if head[..4] != MAGIC {
        return Err(Error::MalformedFile("bad magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::MalformedFile(format!("unsupported version {version}")));
    }
    let dtype = Dtype::from_code(head[8])?;
    let order = head[9] as usize;
    if head[10] != 0 || head[11] != 0 {
        return Err(Error::MalformedFile("reserved bytes are not zero".into()));
    }
    if order == 0 {
        return Err(Error::MalformedFile("zero modes".into()));
    }
    let mut dims = Vec::with_capacity(order);
    let mut len = 1usize;
    for _ in 0..order {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)
            .map_err(|_| Error::MalformedFile("truncated extents".into()))?;
        let d = usize::try_from(u64::from_le_bytes(b))
            .map_err(|_| Error::MalformedFile("extent does not fit in memory".into()))?;
        if d == 0 {
            return Err(Error::MalformedFile("zero extent".into()));
        }
        len = len
            .checked_mul(d)
            .ok_or_else(|| Error::MalformedFile("element count overflows".into()))?;
        dims.push(d);
    }
    Ok(Header { dtype, dims, len })
}

fn read_payload<R: Read>(r: &mut R, header: Header) -> Result<DenseTensor> {
    let mut bytes = vec![0u8; header.payload_bytes()?];
    r.read_exact(&mut bytes)
        .map_err(|_| Error::MalformedFile("payload shorter than declared".into()))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::MalformedFile("trailing bytes after payload".into()));
    }
    let data: Vec<f64> = match header.dtype {
        Dtype::F64 => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect(),
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect(),
    };
    DenseTensor::new(header.dims, data)
}

pub fn read_tensor<R: Read>(r: &mut R) -> Result<DenseTensor> {
    let header = read_header(r)?;
    read_payload(r, header)
}

pub fn save_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    save_tensor_as(path, t, Dtype::F64)
}

pub fn save_tensor_as(path: impl AsRef<Path>, t: &DenseTensor, dtype: Dtype) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor(&mut w, t, dtype)?;
    w.flush()?;
    Ok(())
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let file = File::open(path)?;
    let file_len = file.metadata()?.len();
    let mut r = BufReader::new(file);
    let header = read_header(&mut r)?;
    // Reject size mismatches before allocating the payload.
    let expected = (HEADER_LEN + 8 * header.dims.len()) as u64 + header.payload_bytes()? as u64;
    if expected != file_len {
        return Err(Error::MalformedFile(format!(
            "file is {file_len} bytes, header declares {expected}"
        )));
    }
    read_payload(&mut r, header)
}

/// Matrices are stored as 2-mode tensors (column-major).
pub fn save_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    save_tensor(path, &DenseTensor::new(vec![m.nrows(), m.ncols()], m.as_slice().to_vec())?)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let t = load_tensor(path)?;
    if t.order() != 2 {
        return Err(Error::MalformedFile(format!(
            "expected a matrix, found {} modes",
            t.order()
        )));
    }
    let (r, c) = (t.dims()[0], t.dims()[1]);
    Ok(Matrix::from_vec(r, c, t.into_data()))
}

#[derive(Debug, Serialize, Deserialize)]
struct CurManifest {
    variant: CurVariant,
    dims: Vec<usize>,
    ranks: Vec<usize>,
    row_indices: Vec<Vec<usize>>,
    fiber_indices: Vec<Vec<usize>>,
}

pub const CUR_MANIFEST: &str = "cur.json";

/// Writes `core.tnsr`, `c_{i}.tnsr`, `u_{i}.tnsr` and `cur.json`.
pub fn save_cur(dir: impl AsRef<Path>, dec: &CurDecomposition) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    save_tensor(dir.join("core.tnsr"), dec.core())?;
    for (i, (c, u)) in dec.fibers().iter().zip(dec.intersections()).enumerate() {
        save_matrix(dir.join(format!("c_{i}.tnsr")), c)?;
        save_matrix(dir.join(format!("u_{i}.tnsr")), u)?;
    }
    let manifest = CurManifest {
        variant: dec.variant(),
        dims: dec.dims().to_vec(),
        ranks: dec.ranks().to_vec(),
        row_indices: dec.row_indices().iter().map(|s| s.indices().to_vec()).collect(),
        fiber_indices: dec.fiber_indices().iter().map(|s| s.indices().to_vec()).collect(),
    };
    let w = BufWriter::new(File::create(dir.join(CUR_MANIFEST))?);
    serde_json::to_writer_pretty(w, &manifest)?;
    Ok(())
}

pub fn load_cur(dir: impl AsRef<Path>) -> Result<CurDecomposition> {
    let dir = dir.as_ref();
    let manifest: CurManifest = serde_json::from_reader(BufReader::new(File::open(dir.join(CUR_MANIFEST))?))?;
    let n = manifest.dims.len();
    if manifest.row_indices.len() != n || manifest.fiber_indices.len() != n {
        return Err(Error::MalformedFile(format!(
            "manifest lists {} modes but {} row and {} fiber index sets",
            n,
            manifest.row_indices.len(),
            manifest.fiber_indices.len()
        )));
    }
    let core = load_tensor(dir.join("core.tnsr"))?;
    let mut fibers = Vec::with_capacity(n);
    let mut intersections = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        fibers.push(load_matrix(dir.join(format!("c_{i}.tnsr")))?);
        intersections.push(load_matrix(dir.join(format!("u_{i}.tnsr")))?);
        let other: usize = manifest
            .dims
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &d)| d)
            .product();
        rows.push(IndexSet::new(manifest.row_indices[i].clone(), manifest.dims[i])?);
        cols.push(IndexSet::new(manifest.fiber_indices[i].clone(), other)?);
    }
    let dec = CurDecomposition::from_parts(
        manifest.variant,
        core,
        fibers,
        intersections,
        rows,
        cols,
        manifest.ranks,
    )?;
    if dec.dims() != manifest.dims {
        return Err(Error::DimensionMismatch(format!(
            "factor files describe {:?}, manifest says {:?}",
            dec.dims(),
            manifest.dims
        )));
    }
    Ok(dec)
}

/// Writes `core.tnsr` and `factor_{i}.tnsr`.
pub fn save_hosvd(dir: impl AsRef<Path>, h: &HosvdDecomposition) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    save_tensor(dir.join("core.tnsr"), h.core())?;
    for (i, w) in h.factors().iter().enumerate() {
        save_matrix(dir.join(format!("factor_{i}.tnsr")), w)?;
    }
    Ok(())
}

pub fn load_hosvd(dir: impl AsRef<Path>) -> Result<HosvdDecomposition> {
    let dir = dir.as_ref();
    let core = load_tensor(dir.join("core.tnsr"))?;
    let factors = (0..core.order())
        .map(|i| load_matrix(dir.join(format!("factor_{i}.tnsr"))))
        .collect::<Result<Vec<_>>>()?;
    HosvdDecomposition::new(core, factors)
}
