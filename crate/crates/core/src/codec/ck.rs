//! C^k codec: local first-order Taylor tables of the two generating maps
//! over the dyadic cells that meet the set.
//!
//! Header: `g u8 | p u8 | n̄ u16 | G u8 | N γ | cell gaps γ × N`, then per
//! retained cell `ỹ_s` (offset inside the cell) and `c̃_{i,0}, c̃_{i,1}` for
//! `i = 0, 1`. Cells have width `2^{-g} ≤ ε′^{1/k}`; values sit on `2^{-p}`
//! with `2^{-p} ≤ ε′`; `c_0 ∈ [0,1]`, `c_1 ∈ [0,1/2]`.
//!
//! The decoder runs every itinerary of length `n̄` from both ends of
//! `[0,1]`, evaluating `φ̃_i(z) = c̃_{i,0} + c̃_{i,1}(z − ỹ_s)` with `s` the
//! cell holding the running point (or its retained neighbour when
//! rounding pushed it across a cell edge).

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::bits::BitReader;
use super::{begin, seal, write_u, CodecId, CodecReport, Description, GUARD_BITS};
use crate::ck::{build_ck_levels, CkCantor, CkLevels};
use crate::numeric::{floor, pow2, qi, quantize, scale2, to_f64, FinitePointSet, Interval, QuantRange, QuantizedReal};
use crate::{Error, Result, Q};

#[derive(Debug, Clone, PartialEq)]
pub struct CkParams {
    pub k: f64,
    pub m_const: f64,
    pub k_rem: f64,
    pub log2_eps_prime: f64,
    pub grid: u32,
    pub precision: u32,
    pub n_bar: usize,
    pub cover_depth: usize,
    pub cells: usize,
    pub retries: u32,
}

/// Smallest `n` with `ρ_max^n < ε/2`.
pub fn ck_depth(c: &CkCantor, eps: &Q) -> usize {
    let (r, half) = (c.params.rho_max(), eps / qi(2));
    let mut x = Q::one();
    let mut n = 0;
    while x >= half {
        x *= &r;
        n += 1;
    }
    n
}

/// Depth needed by an encode at `ε` (cover level + 1, reference level).
pub fn levels_needed(c: &CkCantor, ell: u32) -> usize {
    let eps = pow2(-(ell as i64));
    // generous: ε′ ≥ ε/2^8 in practice, cover level ⌈log ε′/log ρ⌉ + 1
    let rho = to_f64(&c.params.rho);
    let cover = libm::ceil((ell as f64 + 8.0) * libm::log(2.0) / -libm::log(rho)) as usize + 1;
    cover.max(ck_depth(c, &(&eps / qi(2))))
}

fn cell_of(x: &Q, g: u32) -> u64 {
    let c = floor(&scale2(x, g as i64)).to_i64().unwrap_or(0).max(0) as u64;
    c.min((1u64 << g) - 1)
}

/// A level-`n̂` endpoint with its images under both maps.
struct Anchor {
    x: Q,
    img: [Q; 2],
    slope: [Q; 2],
}

fn anchors(levels: &CkLevels, d: usize) -> Vec<Anchor> {
    let (lv, up) = (&levels.intervals[d], &levels.intervals[d + 1]);
    let mut out = Vec::with_capacity(2 * lv.len());
    for (k, j) in lv.iter().enumerate() {
        let len = j.len();
        let kids = [&up[k], &up[k + (1 << d)]];
        let slope = [kids[0].len() / &len, kids[1].len() / &len];
        out.push(Anchor { x: j.lo.clone(), img: [kids[0].lo.clone(), kids[1].lo.clone()], slope: slope.clone() });
        out.push(Anchor { x: j.hi.clone(), img: [kids[0].hi.clone(), kids[1].hi.clone()], slope });
    }
    out
}

/// Retained cells and the anchor used in each (smallest endpoint inside).
fn cover(an: &[Anchor], levels: &CkLevels, d: usize, g: u32) -> (Vec<u64>, Vec<usize>) {
    let mut cells: Vec<u64> = Vec::new();
    for j in &levels.intervals[d] {
        let (a, b) = (cell_of(&j.lo, g), cell_of(&j.hi, g));
        for s in a..=b {
            if cells.last() != Some(&s) {
                cells.push(s);
            }
        }
    }
    let mut pick = Vec::with_capacity(cells.len());
    let mut i = 0;
    for &s in &cells {
        while cell_of(&an[i].x, g) < s {
            i += 1;
        }
        pick.push(i);
    }
    (cells, pick)
}

/// Empirical remainder constant: `max |φ_i(z) − φ_i(y) − c_1(y)(z−y)| / |z−y|^k`
/// over anchors `z` in the cell of `y` and its neighbours.
fn remainder_constant(an: &[Anchor], cells: &[u64], pick: &[usize], g: u32, k: f64) -> f64 {
    let xs: Vec<f64> = an.iter().map(|a| to_f64(&a.x)).collect();
    let w = libm::exp2(-(g as f64));
    let mut kr: f64 = 0.0;
    for (ci, &s) in cells.iter().enumerate() {
        let y = &an[pick[ci]];
        let lo = (s as f64 - 1.0) * w;
        let hi = (s as f64 + 2.0) * w;
        let start = xs.partition_point(|&x| x < lo);
        for (j, z) in an.iter().enumerate().skip(start) {
            if xs[j] >= hi {
                break;
            }
            let dz = &z.x - &y.x;
            if dz.is_zero() {
                continue;
            }
            for i in 0..2 {
                let r = &z.img[i] - &y.img[i] - &y.slope[i] * &dz;
                let v = to_f64(&r.abs()) / libm::pow(to_f64(&dz.abs()), k);
                kr = kr.max(v);
            }
        }
    }
    kr
}

fn gamma_bits(v: u64) -> u64 {
    2 * (63 - v.leading_zeros() as u64) + 1
}

/// Encodes with the levels already built (at least [`levels_needed`] deep).
pub fn encode_ck_with(c: &CkCantor, levels: &CkLevels, ell: u32, budget: usize) -> Result<(Description, CkParams)> {
    let eps = pow2(-(ell as i64));
    let k = c.smoothness();
    let rho = to_f64(&c.params.rho);
    let rho_max = c.params.rho_max();
    let one_minus = Q::one() - &rho_max;
    let reference = reference_from(levels, &eps)?;

    // provisional grid to calibrate the remainder constant
    let sum_c = 1.0 + to_f64(&rho_max);
    let base_m = 2.0 * (k + 1.0 + sum_c);
    let provisional = to_f64(&eps) * to_f64(&one_minus) / base_m;
    let g0 = libm::ceil(-libm::log2(provisional) / k) as u32;
    let d0 = (libm::ceil(libm::log(provisional) / libm::log(rho)) as usize).min(levels.depth - 1);
    let an0 = anchors(levels, d0);
    let (cells0, pick0) = cover(&an0, levels, d0, g0);
    let k_rem = remainder_constant(&an0, &cells0, &pick0, g0, k);

    let mut m_const = 2.0 * (k + 1.0 + k_rem + sum_c);
    for retries in 0..2u32 {
        // ε′ = ε(1−ρ_max)/M, rounded down to a power of two
        let lp = libm::log2(to_f64(&eps) * to_f64(&one_minus) / m_const);
        let p = libm::ceil(-lp) as u32;
        let g = libm::ceil(p as f64 / k) as u32;
        let d = (libm::ceil(-(p as f64) * libm::log(2.0) / libm::log(rho)) as usize).max(1);
        if d + 1 > levels.depth {
            return Err(Error::Budget { needed: 1u128 << (d + 2).min(120), limit: budget });
        }
        let an = anchors(levels, d);
        let (cells, pick) = cover(&an, levels, d, g);
        let n_bar = ck_depth(c, &eps);
        let d_out = write(ell, g, p, n_bar, &cells, &pick, &an)?;
        let params = CkParams {
            k,
            m_const,
            k_rem,
            log2_eps_prime: lp,
            grid: g,
            precision: p,
            n_bar,
            cover_depth: d,
            cells: cells.len(),
            retries,
        };
        match super::measure(&d_out, &reference, budget) {
            Ok(dh) if dh < eps => return Ok((d_out, params)),
            Ok(_) | Err(Error::EscapedCover) => m_const *= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Contract(format!("C^k codec missed ε = 2^-{ell} after doubling M")))
}

fn write(ell: u32, g: u32, p: u32, n_bar: usize, cells: &[u64], pick: &[usize], an: &[Anchor]) -> Result<Description> {
    let mut w = begin(CodecId::Ck, ell)?;
    write_u(&mut w, g as u64, 8)?;
    write_u(&mut w, p as u64, 8)?;
    write_u(&mut w, n_bar as u64, 16)?;
    write_u(&mut w, GUARD_BITS as u64, 8)?;
    w.write_gamma(cells.len() as u64);
    let mut prev = 0u64;
    for (i, &s) in cells.iter().enumerate() {
        w.write_gamma(if i == 0 { s + 1 } else { s - prev });
        prev = s;
    }
    let eps_p = pow2(-(p as i64));
    let (unit, slope) = (QuantRange::unit(), QuantRange::new(Q::zero(), Q::new(1.into(), 2.into()))?);
    for (&s, &a) in cells.iter().zip(pick) {
        let cell = cell_range(s, g);
        let y = quantize(&an[a].x, &cell, &eps_p)?;
        w.write_big(&y.offset(&cell), y.bit_cost);
        for i in 0..2 {
            let c0 = quantize(&an[a].img[i], &unit, &eps_p)?;
            w.write_big(&c0.offset(&unit), c0.bit_cost);
            let c1 = quantize(&an[a].slope[i], &slope, &eps_p)?;
            w.write_big(&c1.offset(&slope), c1.bit_cost);
        }
    }
    Ok(seal(CodecId::Ck, ell, w))
}

fn cell_range(s: u64, g: u32) -> QuantRange {
    let lo = Q::new(BigInt::from(s), BigInt::one() << g);
    let hi = &lo + pow2(-(g as i64));
    QuantRange { lo, hi }
}

/// Parsed Taylor table: mantissas over `2^{-(p+G)}`.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub grid: u32,
    pub precision: u32,
    pub n_bar: usize,
    pub guard: u32,
    pub cells: Vec<u64>,
    /// `ỹ_s` per cell.
    pub anchor: Vec<BigInt>,
    /// `[c̃_{0,0}, c̃_{0,1}, c̃_{1,0}, c̃_{1,1}]` per cell.
    pub coeffs: Vec<[BigInt; 4]>,
}

impl Parsed {
    pub(crate) fn read(r: &mut BitReader<'_>) -> Result<Self> {
        let grid = r.read(8)? as u32;
        let precision = r.read(8)? as u32;
        let n_bar = r.read(16)? as usize;
        let guard = r.read(8)? as u32;
        if grid == 0 || grid > 62 || precision < grid || guard == 0 {
            return Err(Error::Format("bad C^k grid header".into()));
        }
        let n = r.read_gamma()?;
        if n == 0 || n > 1u64 << grid {
            return Err(Error::Format("bad retained-cell count".into()));
        }
        let mut cells = Vec::with_capacity(n as usize);
        let mut prev = 0u64;
        for i in 0..n {
            let gap = r.read_gamma()?;
            let s = if i == 0 { gap - 1 } else { prev + gap };
            if s >= 1u64 << grid {
                return Err(Error::Format("cell index out of range".into()));
            }
            cells.push(s);
            prev = s;
        }
        let p = precision as i64;
        let sh = guard as u64;
        let (unit, slope) = (QuantRange::unit(), QuantRange::new(Q::zero(), Q::new(1.into(), 2.into()))?);
        let mut anchor = Vec::with_capacity(cells.len());
        let mut coeffs = Vec::with_capacity(cells.len());
        for &s in &cells {
            let cell = cell_range(s, grid);
            let y = r.read_big(cell.bit_cost(p))?;
            anchor.push(QuantizedReal::from_offset(&cell, p, y).mantissa << sh);
            let mut cs: [BigInt; 4] = Default::default();
            for i in 0..2 {
                let c0 = r.read_big(unit.bit_cost(p))?;
                cs[2 * i] = QuantizedReal::from_offset(&unit, p, c0).mantissa << sh;
                let c1 = r.read_big(slope.bit_cost(p))?;
                cs[2 * i + 1] = QuantizedReal::from_offset(&slope, p, c1).mantissa << sh;
            }
            coeffs.push(cs);
        }
        Ok(Self { grid, precision, n_bar, guard, cells, anchor, coeffs })
    }

    fn scale(&self) -> u32 {
        self.precision + self.guard
    }

    /// Index of the retained cell for a running point, tolerating one cell
    /// of drift.
    fn lookup(&self, z: &BigInt) -> Result<usize> {
        let f = self.scale();
        let raw = (z >> (f - self.grid) as usize).to_i64().unwrap_or(-1);
        let s = raw.clamp(0, (1i64 << self.grid) - 1) as u64;
        match self.cells.binary_search(&s) {
            Ok(i) => Ok(i),
            Err(pos) => {
                let left = pos.checked_sub(1).filter(|&i| s - self.cells[i] <= 1);
                let right = (pos < self.cells.len() && self.cells[pos] - s <= 1).then_some(pos);
                match (left, right) {
                    (Some(l), Some(r)) => {
                        // nearer anchor wins
                        let dl = (z - &self.anchor[l]).abs();
                        let dr = (z - &self.anchor[r]).abs();
                        Ok(if dr < dl { r } else { l })
                    }
                    (Some(i), None) | (None, Some(i)) => Ok(i),
                    (None, None) => Err(Error::EscapedCover),
                }
            }
        }
    }

    fn apply(&self, i: usize, z: &BigInt) -> Result<BigInt> {
        let s = self.lookup(z)?;
        let c = &self.coeffs[s];
        let f = self.scale() as usize;
        let t = &c[2 * i + 1] * (z - &self.anchor[s]);
        let half = BigInt::one() << (f - 1);
        Ok(&c[2 * i] + ((t + half) >> f))
    }

    pub(crate) fn decode(&self, budget: usize) -> Result<FinitePointSet> {
        crate::ifs::check_budget(2, self.n_bar, budget)?;
        let one = BigInt::one() << self.scale();
        let mut out: Vec<BigInt> = Vec::with_capacity(2usize << self.n_bar);
        // breadth-first: the innermost map is applied first
        for v in [BigInt::zero(), one.clone()] {
            let mut cur = alloc::vec![v];
            for _ in 0..self.n_bar {
                let mut next = Vec::with_capacity(cur.len() * 2);
                for z in &cur {
                    for i in 0..2 {
                        next.push(self.apply(i, z)?);
                    }
                }
                cur = next;
            }
            out.extend(cur);
        }
        let den = BigInt::one() << self.scale();
        let pts = out.into_iter().map(|m| Q::new(m.clamp(BigInt::zero(), one.clone()), den.clone())).collect();
        Ok(FinitePointSet::clamped(pts))
    }
}

/// Reference union: the first level whose intervals are shorter than `ε/4`.
pub fn reference_from(levels: &CkLevels, eps: &Q) -> Result<Vec<Interval>> {
    let d = levels
        .depth_below(&(eps / qi(4)))
        .ok_or_else(|| Error::Budget { needed: 1u128 << (levels.depth + 2).min(120), limit: 1 << levels.depth })?;
    Ok(levels.intervals[d].clone())
}

pub fn encode_ck(c: &CkCantor, ell: u32, budget: usize) -> Result<(Description, CkParams)> {
    let levels = build_ck_levels(c, levels_needed(c, ell), budget)?;
    encode_ck_with(c, &levels, ell, budget)
}

pub fn roundtrip_ck(c: &CkCantor, ell: u32, budget: usize) -> Result<(Description, CodecReport)> {
    let levels = build_ck_levels(c, levels_needed(c, ell), budget)?;
    roundtrip_ck_with(c, &levels, ell, budget)
}

/// Round trip reusing prebuilt levels (deep enough for the largest `ℓ`).
pub fn roundtrip_ck_with(c: &CkCantor, levels: &CkLevels, ell: u32, budget: usize) -> Result<(Description, CodecReport)> {
    let (d, params) = encode_ck_with(c, levels, ell, budget)?;
    let reference = reference_from(levels, &d.eps())?;
    let dh = super::measure(&d, &reference, budget)?;
    let rep = CodecReport {
        total_bits: d.total_bits,
        dh_achieved: dh,
        reference_error: Q::zero(),
        n_bar: params.n_bar,
        params: alloc::vec![
            ("k", format!("{:.4}", params.k)),
            ("M", format!("{:.4}", params.m_const)),
            ("K_rem", format!("{:.4}", params.k_rem)),
            ("log2_eps_prime", format!("{:.4}", params.log2_eps_prime)),
            ("g", params.grid.to_string()),
            ("p", params.precision.to_string()),
            ("cover_depth", params.cover_depth.to_string()),
            ("cells", params.cells.to_string()),
            ("retries", params.retries.to_string()),
            ("gap_bits_bound", (gamma_bits(1u64 << params.grid) * params.cells as u64).to_string()),
        ],
    };
    Ok((d, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ck::{ScalingParams, CkCantor};
    use crate::codec::decode;
    use crate::numeric::q;
    use crate::random_cantor::LambdaDist;

    const B: usize = 1 << 22;

    pub(crate) fn family(seed: u64) -> CkCantor {
        CkCantor::new(ScalingParams::new(q(1, 4), q(1, 2), q(1, 20), seed, LambdaDist::Uniform { a: qi(0), b: qi(1) }).unwrap())
    }

    #[test]
    fn roundtrips_and_determinism() {
        let c = family(7);
        let levels = build_ck_levels(&c, levels_needed(&c, 12), B).unwrap();
        let mut prev = 0;
        for ell in [8, 10, 12] {
            let (d, rep) = roundtrip_ck_with(&c, &levels, ell, B).unwrap();
            assert!(rep.within(&d.eps()), "ℓ={ell} dh={}", rep.dh_achieved);
            assert!(d.total_bits > prev);
            prev = d.total_bits;
            let (d2, _) = encode_ck_with(&c, &levels, ell, B).unwrap();
            assert_eq!(d.bytes, d2.bytes);
            assert_eq!(decode(&d, B).unwrap(), decode(&d2, B).unwrap());
        }
    }

    #[test]
    fn depth_rule() {
        // ρ_max = 0.35: 0.35^n < 2^-9 first at n = 6
        assert_eq!(ck_depth(&family(0), &pow2(-8)), 6);
    }
}
