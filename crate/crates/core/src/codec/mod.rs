//! Descriptions: self-delimiting bitstrings standing in for programs that
//! print a finite approximation of a Cantor set.
//!
//! Layout (big-endian bit packing):
//! `"EDC1" | version u8 | codec u2 | ℓ u14 | codec header | payload |
//! zero padding to a byte | CRC-24 over all preceding bytes`.
//! `total_bits` counts everything except the padding.

pub mod bits;
pub mod ck;
pub mod poly;
pub mod rand;

use alloc::string::String;
use alloc::vec::Vec;

use self::bits::{BitReader, BitWriter};
use crate::numeric::{hausdorff_vs_intervals, pow2, FinitePointSet, Interval};
use crate::{Error, Result, Q};

pub const MAGIC: &[u8; 4] = b"EDC1";
pub const VERSION: u8 = 1;
/// Fractional guard bits the decoders carry beyond the coefficient grid.
pub const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodecId {
    Poly = 0,
    Analytic = 1,
    RandCentral = 2,
    Ck = 3,
}

impl CodecId {
    pub fn from_bits(v: u64) -> Self {
        match v & 3 {
            0 => CodecId::Poly,
            1 => CodecId::Analytic,
            2 => CodecId::RandCentral,
            _ => CodecId::Ck,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodecId::Poly => "poly",
            CodecId::Analytic => "analytic",
            CodecId::RandCentral => "rand",
            CodecId::Ck => "ck",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Description {
    pub codec: CodecId,
    /// `ε = 2^{-ℓ}`.
    pub ell: u32,
    pub bytes: Vec<u8>,
    pub total_bits: u64,
}

impl Description {
    pub fn eps(&self) -> Q {
        pow2(-(self.ell as i64))
    }

    /// Parses and checks a serialized description (magic, version, codec
    /// body, checksum, no trailing bytes).
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self> {
        let (codec, ell, total_bits) = {
            let (mut r, codec, ell) = open(&bytes)?;
            match codec {
                CodecId::Poly | CodecId::Analytic => {
                    poly::Parsed::read(&mut r, codec)?;
                }
                CodecId::RandCentral => {
                    rand::Parsed::read(&mut r, ell)?;
                }
                CodecId::Ck => {
                    ck::Parsed::read(&mut r)?;
                }
            }
            (codec, ell, r.finish()?)
        };
        Ok(Self { codec, ell, bytes, total_bits })
    }
}

/// Per-encode diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CodecReport {
    pub total_bits: u64,
    /// Measured `d_H(decoded, reference)`.
    pub dh_achieved: Q,
    /// Certified error of the reference itself (zero when exact).
    pub reference_error: Q,
    pub n_bar: usize,
    pub params: Vec<(&'static str, String)>,
}

impl CodecReport {
    /// `d_H(decoded, reference) + reference error < ε`.
    pub fn within(&self, eps: &Q) -> bool {
        &(&self.dh_achieved + &self.reference_error) < eps
    }
}

pub(crate) fn begin(codec: CodecId, ell: u32) -> Result<BitWriter> {
    if ell >= 1 << 14 {
        return Err(Error::Invalid("ε exponent does not fit in 14 bits".into()));
    }
    let mut w = BitWriter::new();
    for b in MAGIC {
        w.write(*b as u64, 8);
    }
    w.write(VERSION as u64, 8);
    w.write(codec as u64, 2);
    w.write(ell as u64, 14);
    Ok(w)
}

pub(crate) fn seal(codec: CodecId, ell: u32, w: BitWriter) -> Description {
    let (bytes, total_bits) = w.finish();
    Description { codec, ell, bytes, total_bits }
}

pub(crate) fn open(bytes: &[u8]) -> Result<(BitReader<'_>, CodecId, u32)> {
    let mut r = BitReader::new(bytes);
    for b in MAGIC {
        if r.read(8).map_err(|_| Error::Format("bad magic".into()))? != *b as u64 {
            return Err(Error::Format("bad magic".into()));
        }
    }
    let v = r.read(8)?;
    if v != VERSION as u64 {
        return Err(Error::Format(alloc::format!("unsupported version {v}")));
    }
    let codec = CodecId::from_bits(r.read(2)?);
    let ell = r.read(14)? as u32;
    Ok((r, codec, ell))
}

pub(crate) fn write_i8(w: &mut BitWriter, v: i64) -> Result<()> {
    let v = i8::try_from(v).map_err(|_| Error::Invalid("header field out of i8 range".into()))?;
    w.write(v as u8 as u64, 8);
    Ok(())
}

pub(crate) fn read_i8(r: &mut BitReader<'_>) -> Result<i64> {
    Ok(r.read(8)? as u8 as i8 as i64)
}

pub(crate) fn write_u(w: &mut BitWriter, v: u64, n: u32) -> Result<()> {
    if n < 64 && v >> n != 0 {
        return Err(Error::Invalid(alloc::format!("header field {v} does not fit in {n} bits")));
    }
    w.write(v, n);
    Ok(())
}

/// Decodes into a point set, refusing outputs above `budget` points.
pub fn decode(d: &Description, budget: usize) -> Result<FinitePointSet> {
    let (mut r, codec, ell) = open(&d.bytes)?;
    let pts = match codec {
        CodecId::Poly | CodecId::Analytic => {
            let p = poly::Parsed::read(&mut r, codec)?;
            r.finish()?;
            p.decode(budget)?
        }
        CodecId::RandCentral => {
            let p = rand::Parsed::read(&mut r, ell)?;
            r.finish()?;
            p.decode(budget)?
        }
        CodecId::Ck => {
            let p = ck::Parsed::read(&mut r)?;
            r.finish()?;
            p.decode(budget)?
        }
    };
    Ok(pts)
}

/// Feeds the decoded points in increasing order to `sink` without
/// necessarily materializing them (the central-set decoder streams; the
/// others materialize under `budget`). Returns the number of points.
pub fn decode_sorted(d: &Description, budget: usize, sink: &mut dyn FnMut(&Q)) -> Result<u64> {
    let (mut r, codec, ell) = open(&d.bytes)?;
    if codec == CodecId::RandCentral {
        let p = rand::Parsed::read(&mut r, ell)?;
        r.finish()?;
        return p.stream(budget, sink);
    }
    let pts = decode(d, budget)?;
    for x in pts.points() {
        sink(x);
    }
    Ok(pts.len() as u64)
}

/// `d_H(decode(d), ⋃ reference)`; the central-set codec streams, the
/// others materialize under `budget`.
pub fn measure(d: &Description, reference: &[Interval], budget: usize) -> Result<Q> {
    let (mut r, codec, ell) = open(&d.bytes)?;
    if codec == CodecId::RandCentral {
        let p = rand::Parsed::read(&mut r, ell)?;
        r.finish()?;
        return p.measure(reference, budget);
    }
    hausdorff_vs_intervals(&decode(d, budget)?, reference)
}
