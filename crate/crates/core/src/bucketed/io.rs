//! On-disk form of a bucketed matrix: a JSON header plus a binary blob.
//!
//! The blob holds, bucket after bucket, `n_rows + 1` row pointers and the
//! column indices as little-endian `u32`, then the values at the bucket's own
//! width (half as raw binary16 bits, quad as a `(hi, lo)` pair of doubles,
//! nothing for the drop format). Values are kept scaled as in memory; the
//! header records each bucket's scale exponent.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Bucket, BucketScheme, BucketedMatrix};
use crate::error::{Error, Result};
use crate::precision::{half_from_bits, half_to_bits, FpFormat};

const MAGIC: &str = "bspai-bucketed/1";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    n_rows: usize,
    n_cols: usize,
    scheme: BucketScheme,
    norm_value: f64,
    buckets: Vec<Layout>,
}

#[derive(Serialize, Deserialize)]
struct Layout {
    fmt: FpFormat,
    scale_exp: i32,
    nnz: usize,
    offset: u64,
    bytes: u64,
}

fn value_width(fmt: FpFormat) -> usize {
    fmt.bits() as usize / 8
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Config(format!("bucketed blob: {}", msg.into()))
}

impl BucketedMatrix {
    /// Writes the header to `json` and the arrays to `blob`.
    pub fn save<J: Write, B: Write>(&self, json: J, mut blob: B) -> Result<()> {
        let mut layouts = Vec::with_capacity(self.buckets.len());
        let mut offset = 0u64;
        for b in &self.buckets {
            let bytes = encode_bucket(b)?;
            blob.write_all(&bytes)?;
            layouts.push(Layout { fmt: b.fmt, scale_exp: b.scale_exp, nnz: b.nnz(), offset, bytes: bytes.len() as u64 });
            offset += bytes.len() as u64;
        }
        let header = Header {
            format: MAGIC.into(),
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            scheme: self.scheme.clone(),
            norm_value: self.norm_value,
            buckets: layouts,
        };
        serde_json::to_writer_pretty(json, &header)?;
        Ok(())
    }

    pub fn load<J: Read, B: Read>(json: J, mut blob: B) -> Result<Self> {
        let header: Header = serde_json::from_reader(json)?;
        if header.format != MAGIC {
            return Err(corrupt(format!("unknown format tag `{}`", header.format)));
        }
        header.scheme.validate()?;
        if header.buckets.len() != header.scheme.q()
            || header.buckets.iter().zip(&header.scheme.precisions).any(|(l, &f)| l.fmt != f)
        {
            return Err(corrupt("bucket formats disagree with the scheme"));
        }
        let mut data = Vec::new();
        blob.read_to_end(&mut data)?;
        let mut buckets = Vec::with_capacity(header.buckets.len());
        for l in &header.buckets {
            let (lo, hi) = (l.offset as usize, (l.offset + l.bytes) as usize);
            let bytes = data.get(lo..hi).ok_or_else(|| corrupt("bucket extends past the end of the blob"))?;
            let b = decode_bucket(bytes, l.fmt, l.scale_exp, header.n_rows, l.nnz)?;
            if b.col_idx.iter().any(|&j| j >= header.n_cols) {
                return Err(corrupt("column index out of range"));
            }
            buckets.push(b);
        }
        Ok(BucketedMatrix {
            n_rows: header.n_rows,
            n_cols: header.n_cols,
            scheme: header.scheme,
            norm_value: header.norm_value,
            buckets,
        })
    }
}

fn to_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| corrupt("index does not fit in 32 bits"))
}

fn encode_bucket(b: &Bucket) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(4 * (b.row_ptr.len() + b.nnz()) + value_width(b.fmt) * b.nnz());
    for &p in b.row_ptr.iter().chain(&b.col_idx) {
        out.extend_from_slice(&to_u32(p)?.to_le_bytes());
    }
    for &v in &b.values {
        match b.fmt {
            FpFormat::Half => out.extend_from_slice(&half_to_bits(v).to_le_bytes()),
            FpFormat::Single => out.extend_from_slice(&(v as f32).to_le_bytes()),
            FpFormat::Double => out.extend_from_slice(&v.to_le_bytes()),
            // stored values are doubles, so the low word is zero
            FpFormat::Quad => {
                out.extend_from_slice(&v.to_le_bytes());
                out.extend_from_slice(&0f64.to_le_bytes());
            }
            FpFormat::Drop => {}
        }
    }
    Ok(out)
}

fn decode_bucket(bytes: &[u8], fmt: FpFormat, scale_exp: i32, n_rows: usize, nnz: usize) -> Result<Bucket> {
    let width = value_width(fmt);
    let want = 4 * (n_rows + 1 + nnz) + width * nnz;
    if bytes.len() != want {
        return Err(corrupt(format!("expected {want} bytes for a {} bucket, found {}", fmt.name(), bytes.len())));
    }
    let mut words = bytes.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize);
    let row_ptr: Vec<usize> = words.by_ref().take(n_rows + 1).collect();
    let col_idx: Vec<usize> = words.take(nnz).collect();
    if row_ptr.first() != Some(&0) || row_ptr.last() != Some(&nnz) || row_ptr.windows(2).any(|w| w[0] > w[1]) {
        return Err(corrupt("row pointers are not monotone"));
    }
    let raw = &bytes[4 * (n_rows + 1 + nnz)..];
    let values = match fmt {
        FpFormat::Half => raw
            .chunks_exact(2)
            .map(|c| half_from_bits(u16::from_le_bytes([c[0], c[1]])))
            .collect(),
        FpFormat::Single => raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        FpFormat::Double => raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect(),
        FpFormat::Quad => raw
            .chunks_exact(16)
            .map(|c| f64::from_le_bytes(c[..8].try_into().unwrap()) + f64::from_le_bytes(c[8..].try_into().unwrap()))
            .collect(),
        FpFormat::Drop => vec![0.0; nnz],
    };
    Ok(Bucket { fmt, row_ptr, col_idx, values, scale_exp })
}
