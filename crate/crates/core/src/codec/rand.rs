//! Random central Cantor set codec.
//!
//! Header: `n̄ u16`, with `n̄ = min{n : 2^{-n} < ε/2}`. Payload: `λ̃_1` at
//! precision `ε`, then `λ̃_k` at precision `2^{k-2} ε` for `k = 2..n̄`, each a
//! grid offset in `[0, 1]`. Levels whose allowed error reaches 1 carry no
//! bits and decode as `λ̃_k = 1/2`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::bits::BitReader;
use super::{begin, seal, write_u, CodecId, CodecReport, Description};
use crate::numeric::{pow2, precision_for, quantize, FinitePointSet, HausdorffStream, Interval, QuantRange, QuantizedReal};
use crate::random_cantor::{build_central, depth_below, LambdaStream};
use crate::{invalid, Error, Result, Q};

/// Streaming decodes may visit this many times the materialization budget.
pub const STREAM_FACTOR: usize = 16;

/// `n̄ = ℓ + 2`.
pub fn rand_depth(ell: u32) -> usize {
    ell as usize + 2
}

/// Allowed error for `λ̃_k`, or `None` once it reaches 1.
fn level_eps(ell: u32, k: usize) -> Option<Q> {
    let e = if k == 1 { -(ell as i64) } else { k as i64 - 2 - ell as i64 };
    (e < 0).then(|| pow2(e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandParams {
    pub n_bar: usize,
    /// Levels that carry payload bits.
    pub coded_levels: usize,
    pub payload_bits: u64,
}

pub fn encode_rand_central(lambdas: &[Q], ell: u32) -> Result<(Description, RandParams)> {
    let n_bar = rand_depth(ell);
    if lambdas.len() < n_bar {
        return invalid(format!("need {n_bar} λ values, got {}", lambdas.len()));
    }
    if lambdas.iter().any(|l| !(l.is_positive() && l < &Q::one())) {
        return invalid("λ values must lie in (0,1)");
    }
    let unit = QuantRange::unit();
    let mut w = begin(CodecId::RandCentral, ell)?;
    write_u(&mut w, n_bar as u64, 16)?;
    let (mut coded, mut payload) = (0, 0u64);
    for (i, l) in lambdas[..n_bar].iter().enumerate() {
        let Some(e) = level_eps(ell, i + 1) else { break };
        let qr = quantize(l, &unit, &e)?;
        w.write_big(&qr.offset(&unit), qr.bit_cost);
        coded += 1;
        payload += qr.bit_cost as u64;
    }
    Ok((seal(CodecId::RandCentral, ell, w), RandParams { n_bar, coded_levels: coded, payload_bits: payload }))
}

/// A parsed central-set description: `λ̃_k = mantissa_k · 2^{-p_k}`.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub n_bar: usize,
    pub mantissas: Vec<BigInt>,
    pub precisions: Vec<u32>,
}

impl Parsed {
    pub(crate) fn read(r: &mut BitReader<'_>, ell: u32) -> Result<Self> {
        let n_bar = r.read(16)? as usize;
        if n_bar == 0 {
            return Err(Error::Format("zero depth".into()));
        }
        let unit = QuantRange::unit();
        let (mut mantissas, mut precisions) = (Vec::with_capacity(n_bar), Vec::with_capacity(n_bar));
        for k in 1..=n_bar {
            match level_eps(ell, k) {
                Some(e) => {
                    let p = precision_for(&e);
                    let off = r.read_big(unit.bit_cost(p))?;
                    mantissas.push(QuantizedReal::from_offset(&unit, p, off).mantissa);
                    precisions.push(p as u32);
                }
                None => {
                    mantissas.push(BigInt::one());
                    precisions.push(1);
                }
            }
        }
        Ok(Self { n_bar, mantissas, precisions })
    }

    pub fn lambdas(&self) -> Vec<Q> {
        self.mantissas.iter().zip(&self.precisions).map(|(m, p)| Q::new(m.clone(), BigInt::one() << *p)).collect()
    }

    /// Level lengths as mantissas over the common scale `2^E`.
    fn scaled_lengths(&self) -> (Vec<BigInt>, u64) {
        let e: u64 = self.precisions.iter().map(|p| *p as u64).sum::<u64>() + self.n_bar as u64;
        let mut lengths = Vec::with_capacity(self.n_bar + 1);
        let mut num = BigInt::one();
        let mut den_bits = 0u64;
        lengths.push(BigInt::one() << e);
        for (m, p) in self.mantissas.iter().zip(&self.precisions) {
            num *= m;
            den_bits += *p as u64 + 1;
            lengths.push(&num << (e - den_bits));
        }
        (lengths, e)
    }

    /// Walks the depth-`n̄` endpoints in increasing order as numerators
    /// over `2^E / f`.
    fn walk(&self, budget: usize, f: &BigInt, sink: &mut dyn FnMut(&BigInt)) -> Result<(u64, u64)> {
        let n = self.n_bar;
        let needed = (1u128 << n.min(120)) * 2;
        let cap = budget.saturating_mul(STREAM_FACTOR);
        if needed > cap as u128 {
            return Err(Error::Budget { needed, limit: cap });
        }
        let (len, e) = self.scaled_lengths();
        let len: Vec<BigInt> = len.iter().map(|l| l * f).collect();
        let shift: Vec<BigInt> = (1..=n).map(|k| &len[k - 1] - &len[k]).collect();
        let last = &len[n];
        // prefix[k]: left end of the current level-k interval
        let mut prefix: Vec<BigInt> = alloc::vec![BigInt::from(0); n + 1];
        for leaf in 0..1u64 << n {
            if leaf > 0 {
                // the bit of level n − t flips to 1, deeper bits reset to 0
                let lvl = n - leaf.trailing_zeros() as usize;
                prefix[lvl] = &prefix[lvl - 1] + &shift[lvl - 1];
                for k in lvl + 1..=n {
                    prefix[k] = prefix[k - 1].clone();
                }
            }
            sink(&prefix[n]);
            sink(&(&prefix[n] + last));
        }
        Ok((2 << n, e))
    }

    /// Endpoints of the depth-`n̄` intervals in increasing order.
    pub(crate) fn stream(&self, budget: usize, sink: &mut dyn FnMut(&Q)) -> Result<u64> {
        let den = BigInt::one() << self.scaled_lengths().1;
        let (count, _) = self.walk(budget, &BigInt::one(), &mut |x| sink(&Q::new_raw(x.clone(), den.clone())))?;
        Ok(count)
    }

    /// `d_H` against `reference` in integer arithmetic: every coordinate is
    /// scaled by `2S`, `S` the common denominator of points and reference,
    /// so distances and gap midpoints are exact integers.
    pub(crate) fn measure(&self, reference: &[Interval], budget: usize) -> Result<Q> {
        let e = self.scaled_lengths().1;
        let mut s = BigInt::one() << e;
        for iv in reference {
            s = s.lcm(iv.lo.denom()).lcm(iv.hi.denom());
        }
        let s2 = &s << 1u32;
        let ends: Vec<BigInt> =
            reference.iter().flat_map(|iv| [&s2 / iv.lo.denom() * iv.lo.numer(), &s2 / iv.hi.denom() * iv.hi.numer()]).collect();
        let mut h = HausdorffStream::from_ends(ends)?;
        let f = &s2 >> e;
        self.walk(budget, &f, &mut |x| h.push(x))?;
        Ok(Q::new(h.finish()?, s2))
    }

    pub(crate) fn decode(&self, budget: usize) -> Result<FinitePointSet> {
        crate::ifs::check_budget(2, self.n_bar, budget)?;
        let mut pts = Vec::with_capacity(2usize << self.n_bar);
        self.stream(budget, &mut |x| pts.push(x.clone()))?;
        Ok(FinitePointSet::clamped(pts))
    }
}

/// Reference: the exact level whose interval length drops below `ε/4`.
pub fn rand_reference(stream: &LambdaStream, eps: &Q, budget: usize) -> Result<Vec<Interval>> {
    let m = depth_below(stream, &(eps / Q::from_integer(4.into())), 120)?;
    Ok(build_central(&stream.values(m), m, budget)?.intervals(m))
}

pub fn roundtrip_rand(stream: &LambdaStream, ell: u32, budget: usize) -> Result<(Description, CodecReport)> {
    let (d, params) = encode_rand_central(&stream.values(rand_depth(ell)), ell)?;
    let reference = rand_reference(stream, &d.eps(), budget)?;
    let dh = super::measure(&d, &reference, budget)?;
    let rep = CodecReport {
        total_bits: d.total_bits,
        dh_achieved: dh,
        reference_error: Q::from_integer(0.into()),
        n_bar: params.n_bar,
        params: alloc::vec![
            ("coded_levels", params.coded_levels.to_string()),
            ("payload_bits", params.payload_bits.to_string()),
            ("reference_depth", (reference.len().trailing_zeros()).to_string()),
        ],
    };
    Ok((d, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode, decode_sorted};
    use crate::numeric::{hausdorff_vs_intervals, q, qi};
    use crate::random_cantor::{constant, LambdaDist};

    const B: usize = 1 << 22;

    #[test]
    fn depth_examples() {
        assert_eq!(rand_depth(4), 6);
        assert!(pow2(-6) < pow2(-5) && pow2(-5) >= pow2(-5));
    }

    #[test]
    fn halves_against_deep_reference() {
        let lam = constant(q(1, 2), 16);
        let (d, p) = encode_rand_central(&lam, 8).unwrap();
        assert_eq!(p.n_bar, 10);
        let pts = decode(&d, B).unwrap();
        let reference = build_central(&lam, 16, B).unwrap();
        let dh = hausdorff_vs_intervals(&pts, &reference.intervals(16)).unwrap();
        assert!(dh < pow2(-8), "{dh}");
    }

    #[test]
    fn zero_bit_levels_decode_to_half() {
        let lam = constant(q(1, 3), 8);
        let (d, p) = encode_rand_central(&lam, 4).unwrap();
        // k = 1..5 carry bits (2^{k-2}·2^{-4} < 1 ⟺ k < 6)
        assert_eq!(p.coded_levels, 5);
        let (mut r, _, ell) = super::super::open(&d.bytes).unwrap();
        let parsed = Parsed::read(&mut r, ell).unwrap();
        assert_eq!(parsed.lambdas()[5], q(1, 2));
    }

    #[test]
    fn stream_matches_materialized() {
        let s = LambdaStream::new(3, LambdaDist::Uniform { a: q(3, 10), b: q(1, 2) }).unwrap();
        let (d, _) = encode_rand_central(&s.values(12), 10).unwrap();
        let pts = decode(&d, B).unwrap();
        let mut streamed = Vec::new();
        decode_sorted(&d, B, &mut |x| streamed.push(x.clone())).unwrap();
        assert!(streamed.windows(2).all(|w| w[0] <= w[1]));
        streamed.dedup();
        assert_eq!(pts.points(), &streamed[..]);
    }

    #[test]
    fn integer_measure_matches_rational() {
        let s = LambdaStream::new(8, LambdaDist::Uniform { a: q(3, 10), b: q(1, 2) }).unwrap();
        let (d, _) = encode_rand_central(&s.values(10), 8).unwrap();
        let reference = rand_reference(&s, &d.eps(), B).unwrap();
        let pts = decode(&d, B).unwrap();
        let want = hausdorff_vs_intervals(&pts, &reference).unwrap();
        assert_eq!(crate::codec::measure(&d, &reference, B).unwrap(), want);
    }

    #[test]
    fn seeded_roundtrips() {
        let s = LambdaStream::new(11, LambdaDist::Uniform { a: q(3, 10), b: q(1, 2) }).unwrap();
        let mut prev = 0;
        for ell in [6, 9, 12] {
            let (d, rep) = roundtrip_rand(&s, ell, B).unwrap();
            assert!(rep.within(&d.eps()), "ℓ={ell}: {}", rep.dh_achieved);
            assert!(d.total_bits > prev);
            prev = d.total_bits;
        }
    }

    #[test]
    fn rejects_bad_lambdas() {
        assert!(encode_rand_central(&constant(qi(1), 10), 4).is_err());
        assert!(encode_rand_central(&constant(q(1, 2), 3), 4).is_err());
    }
}
