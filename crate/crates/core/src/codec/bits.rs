//! Big-endian bit packing with Elias-gamma integers and a CRC-24 trailer.

use alloc::vec::Vec;

use crc::{Crc, CRC_24_OPENPGP};
use num_bigint::{BigInt, Sign};
use num_traits::{Signed, Zero};

use crate::{Error, Result};

pub const CRC24: Crc<u32> = Crc::<u32>::new(&CRC_24_OPENPGP);

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    nbits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> u64 {
        self.nbits
    }

    pub fn push_bit(&mut self, b: bool) {
        let off = (self.nbits % 8) as u32;
        if off == 0 {
            self.bytes.push(0);
        }
        if b {
            *self.bytes.last_mut().expect("byte") |= 0x80 >> off;
        }
        self.nbits += 1;
    }

    /// Low `n` bits of `v`, most significant first.
    pub fn write(&mut self, v: u64, n: u32) {
        debug_assert!(n <= 64 && (n == 64 || v >> n == 0), "{v} does not fit in {n} bits");
        for i in (0..n).rev() {
            self.push_bit((v >> i) & 1 == 1);
        }
    }

    /// Non-negative big integer in exactly `n` bits.
    pub fn write_big(&mut self, v: &BigInt, n: u32) {
        debug_assert!(!v.is_negative() && v.bits() <= n as u64);
        for i in (0..n as u64).rev() {
            self.push_bit(v.bit(i));
        }
    }

    /// Elias gamma code of `v ≥ 1`: `⌊log2 v⌋` zeros, then `v` in binary.
    pub fn write_gamma(&mut self, v: u64) {
        assert!(v >= 1, "gamma code needs v ≥ 1");
        let len = 64 - v.leading_zeros();
        self.write(0, len - 1);
        self.write(v, len);
    }

    /// Pads to a byte boundary and appends the CRC-24 of everything before.
    /// Returns the bytes and the bit count excluding padding.
    pub fn finish(mut self) -> (Vec<u8>, u64) {
        let content = self.nbits;
        let crc = CRC24.checksum(&self.bytes);
        self.bytes.extend_from_slice(&crc.to_be_bytes()[1..]);
        (self.bytes, content + 24)
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

fn truncated() -> Error {
    Error::Format("truncated payload".into())
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn bit(&mut self) -> Result<bool> {
        let byte = *self.bytes.get((self.pos / 8) as usize).ok_or_else(truncated)?;
        let b = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(b)
    }

    pub fn read(&mut self, n: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | self.bit()? as u64;
        }
        Ok(v)
    }

    pub fn read_big(&mut self, n: u32) -> Result<BigInt> {
        if (self.bytes.len() as u64) * 8 < self.pos + n as u64 {
            return Err(truncated());
        }
        let mut digits = Vec::with_capacity(n as usize / 8 + 1);
        let mut acc = 0u8;
        let lead = n % 8;
        // gather into big-endian bytes, left-padded to whole bytes
        for i in 0..(n + (8 - lead) % 8) {
            let b = if i < (8 - lead) % 8 { false } else { self.bit()? };
            acc = (acc << 1) | b as u8;
            if i % 8 == 7 {
                digits.push(acc);
                acc = 0;
            }
        }
        if digits.is_empty() {
            return Ok(BigInt::zero());
        }
        Ok(BigInt::from_bytes_be(Sign::Plus, &digits))
    }

    pub fn read_gamma(&mut self) -> Result<u64> {
        let mut zeros = 0u32;
        while !self.bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(Error::Format("gamma code too long".into()));
            }
        }
        let rest = self.read(zeros)?;
        Ok((1u64 << zeros) | rest)
    }

    /// Skips padding, checks the CRC-24 trailer and that nothing follows.
    /// Returns the content bit count plus the trailer (the description's
    /// `total_bits`).
    pub fn finish(mut self) -> Result<u64> {
        let content = self.pos;
        let end = content.div_ceil(8) as usize;
        if (end as u64) * 8 != content {
            // padding must be zero
            while !self.pos.is_multiple_of(8) {
                if self.bit()? {
                    return Err(Error::Format("non-zero padding".into()));
                }
            }
        }
        if self.bytes.len() < end + 3 {
            return Err(truncated());
        }
        if self.bytes.len() > end + 3 {
            return Err(Error::Format("trailing bytes after checksum".into()));
        }
        let want = CRC24.checksum(&self.bytes[..end]);
        let got = u32::from_be_bytes([0, self.bytes[end], self.bytes[end + 1], self.bytes[end + 2]]);
        if want != got {
            return Err(Error::Format("checksum mismatch".into()));
        }
        Ok(content + 24)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn crc24_check_value() {
        // catalogue check value for CRC-24/OPENPGP over "123456789"
        assert_eq!(CRC24.checksum(b"123456789"), 0x21cf02);
    }

    #[test]
    fn gamma_codes() {
        let mut w = BitWriter::new();
        for v in [1u64, 2, 3, 4, 17, 1 << 40] {
            w.write_gamma(v);
        }
        // 1 → "1", 2 → "010", 3 → "011"
        let (bytes, _) = w.finish();
        assert_eq!(bytes[0] >> 1, 0b1010011);
        let mut r = BitReader::new(&bytes);
        for v in [1u64, 2, 3, 4, 17, 1 << 40] {
            assert_eq!(r.read_gamma().unwrap(), v);
        }
    }

    #[test]
    fn detects_corruption_and_truncation() {
        let mut w = BitWriter::new();
        w.write(0xabcdef, 24);
        w.write(5, 3);
        let (mut bytes, total) = w.finish();
        assert_eq!(total, 27 + 24);
        let mut r = BitReader::new(&bytes);
        r.read(27).unwrap();
        assert_eq!(r.finish().unwrap(), total);
        bytes[1] ^= 4;
        let mut r = BitReader::new(&bytes);
        r.read(27).unwrap();
        assert!(r.finish().is_err());
        let mut r = BitReader::new(&bytes[..2]);
        assert!(r.read(27).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(vals in proptest::collection::vec((any::<u64>(), 0u32..=64), 0..40), big in any::<u128>()) {
            let mut w = BitWriter::new();
            for (v, n) in &vals {
                let v = if *n == 64 { *v } else { v & ((1u64 << n) - 1) };
                w.write(v, *n);
            }
            let bb = BigInt::from(big);
            w.write_big(&bb, 130);
            let (bytes, _) = w.finish();
            let mut r = BitReader::new(&bytes);
            for (v, n) in &vals {
                let v = if *n == 64 { *v } else { v & ((1u64 << n) - 1) };
                prop_assert_eq!(r.read(*n).unwrap(), v);
            }
            prop_assert_eq!(r.read_big(130).unwrap(), bb);
            prop_assert!(r.finish().is_ok());
        }
    }
}
