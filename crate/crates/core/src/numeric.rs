//! Exact 1-D metric primitives: dyadic quantization with bit accounting,
//! Hausdorff distances between finite sets and interval unions, and the
//! hole-separation certificate.

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{invalid, Error, Result, Q};

// ---------------------------------------------------------------------------
// rational helpers

#[inline]
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[inline]
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `2^e` for any integer `e`.
pub fn pow2(e: i64) -> Q {
    let m = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Q::from_integer(m)
    } else {
        Q::new_raw(BigInt::one(), m)
    }
}

/// Largest `c` with `2^c ≤ x`, for `x > 0`.
pub fn floor_log2(x: &Q) -> i64 {
    debug_assert!(x.is_positive());
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    // 2^(nb-1) ≤ n < 2^nb, 2^(db-1) ≤ d < 2^db  ⇒  c ∈ {nb-db-1, nb-db}
    let c = nb - db;
    if &pow2(c) <= x {
        c
    } else {
        c - 1
    }
}

/// Smallest `c` with `2^c ≥ x`, for `x > 0`.
pub fn ceil_log2(x: &Q) -> i64 {
    let f = floor_log2(x);
    if pow2(f) == *x {
        f
    } else {
        f + 1
    }
}

pub fn floor(x: &Q) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil(x: &Q) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// Round half up: `⌊x + 1/2⌋`.
pub fn round_half_up(x: &Q) -> BigInt {
    let two = BigInt::from(2);
    (x.numer() * &two + x.denom()).div_floor(&(x.denom() * two))
}

/// Exact value scaled by `2^p`.
pub fn scale2(x: &Q, p: i64) -> Q {
    if p >= 0 {
        Q::new(x.numer() << (p as u64), x.denom().clone())
    } else {
        Q::new(x.numer().clone(), x.denom() << p.unsigned_abs())
    }
}

/// `m · 2^{-p}` as a rational.
pub fn dyadic(m: BigInt, p: i64) -> Q {
    if p >= 0 {
        Q::new(m, BigInt::one() << (p as u64))
    } else {
        Q::from_integer(m << p.unsigned_abs())
    }
}

/// `x` rounded half-up onto the grid `2^{-p}`.
pub fn round_to_grid(x: &Q, p: i64) -> Q {
    dyadic(round_half_up(&scale2(x, p)), p)
}

pub fn to_f64(x: &Q) -> f64 {
    // numer/denom may each overflow f64; shift both into range first.
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift_n = (nb - 64).max(0);
    let shift_d = (db - 64).max(0);
    let n = (x.numer() >> shift_n as u64).to_f64().unwrap_or(f64::NAN);
    let d = (x.denom() >> shift_d as u64).to_f64().unwrap_or(f64::NAN);
    let e = shift_n - shift_d;
    n / d * libm::exp2(e as f64)
}

/// Best rational with denominator `2^53` near `v` (only for building inputs).
pub fn from_f64(v: f64) -> Q {
    Q::from_float(v).unwrap_or_else(Q::zero)
}

// ---------------------------------------------------------------------------
// quantization

/// A closed range `[lo, hi]` a quantized value is known to lie in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantRange {
    pub lo: Q,
    pub hi: Q,
}

impl QuantRange {
    pub fn new(lo: Q, hi: Q) -> Result<Self> {
        if lo > hi {
            return invalid("range lower end exceeds upper end");
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: Q::zero(), hi: Q::one() }
    }

    /// Symmetric range `[-w, w]`.
    pub fn symmetric(w: Q) -> Self {
        Self { lo: -w.clone(), hi: w }
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Grid index of the lowest representable mantissa at precision `p`.
    pub fn base_mantissa(&self, p: i64) -> BigInt {
        round_half_up(&scale2(&self.lo, p))
    }

    /// Bits needed to store a mantissa offset at precision `p`.
    pub fn bit_cost(&self, p: i64) -> u32 {
        let x = scale2(&self.width(), p);
        if x > q(1, 2) {
            (ceil_log2(&x) + 1) as u32
        } else if self.base_mantissa(p) == round_half_up(&scale2(&self.hi, p)) {
            0
        } else {
            1
        }
    }
}

/// A real stored as `mantissa · 2^{-precision_exp}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[must_use]
pub struct QuantizedReal {
    pub mantissa: BigInt,
    pub precision_exp: i64,
    pub bit_cost: u32,
}

impl QuantizedReal {
    pub fn value(&self) -> Q {
        dyadic(self.mantissa.clone(), self.precision_exp)
    }

    /// The unsigned offset actually serialized: `mantissa − base`.
    pub fn offset(&self, range: &QuantRange) -> BigInt {
        &self.mantissa - range.base_mantissa(self.precision_exp)
    }

    /// Inverse of [`offset`](Self::offset).
    pub fn from_offset(range: &QuantRange, p: i64, offset: BigInt) -> Self {
        Self {
            mantissa: range.base_mantissa(p) + offset,
            precision_exp: p,
            bit_cost: range.bit_cost(p),
        }
    }
}

/// Smallest `p` with `2^{-p-1} < ε′`, i.e. the coarsest grid whose
/// round-to-nearest error is strictly below `ε′`.
pub fn precision_for(eps: &Q) -> i64 {
    floor_log2(&(Q::one() / eps))
}

/// Quantize `x ∈ range` so that `|value − x| ≤ 2^{-p-1} < ε′`.
///
/// Rounding is half-up on the grid. Values are *not* pulled back inside the
/// range after rounding: doing so could break the error bound when an end of
/// the range is off-grid, and the serialized offset stays non-negative and
/// below `2^bit_cost` either way.
pub fn quantize(x: &Q, range: &QuantRange, eps: &Q) -> Result<QuantizedReal> {
    if !eps.is_positive() {
        return invalid("ε′ must be positive");
    }
    if !range.contains(x) {
        return Err(Error::OutOfRange);
    }
    let p = precision_for(eps);
    Ok(QuantizedReal {
        mantissa: round_half_up(&scale2(x, p)),
        precision_exp: p,
        bit_cost: range.bit_cost(p),
    })
}

// ---------------------------------------------------------------------------
// point sets and intervals

/// Strictly increasing rationals in `[0,1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FinitePointSet {
    points: Vec<Q>,
}

impl FinitePointSet {
    /// Sorts and deduplicates; rejects points outside `[0,1]`.
    pub fn new(mut points: Vec<Q>) -> Result<Self> {
        if points.iter().any(|p| p.is_negative() || p > &Q::one()) {
            return invalid("points must lie in [0,1]");
        }
        points.sort();
        points.dedup();
        Ok(Self { points })
    }

    /// Like [`new`](Self::new) but projects onto `[0,1]` first. Projection
    /// onto a convex set containing the target never increases distances to
    /// it, so decoders use this for points that drift out by rounding.
    pub fn clamped(points: Vec<Q>) -> Self {
        let one = Q::one();
        let pts = points
            .into_iter()
            .map(|p| {
                if p.is_negative() {
                    Q::zero()
                } else if p > one {
                    one.clone()
                } else {
                    p
                }
            })
            .collect();
        Self::new(pts).expect("clamped")
    }

    pub fn points(&self) -> &[Q] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_vec(self) -> Vec<Q> {
        self.points
    }

    /// The mirror image `x ↦ 1 − x`.
    pub fn reflect(&self) -> Self {
        let mut pts: Vec<Q> = self.points.iter().map(|p| Q::one() - p).collect();
        pts.reverse();
        Self { points: pts }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
}

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Result<Self> {
        if lo > hi {
            return invalid("interval with lo > hi");
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: Q::zero(), hi: Q::one() }
    }

    pub fn point(x: Q) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn len(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }
}

/// Distance from `x` to a non-empty sorted point list.
pub fn dist_to_sorted(x: &Q, pts: &[Q]) -> Q {
    let i = pts.partition_point(|p| p <= x);
    let mut best: Option<Q> = None;
    if i > 0 {
        best = Some(x - &pts[i - 1]);
    }
    if i < pts.len() {
        let d = &pts[i] - x;
        best = Some(match best {
            Some(b) if b <= d => b,
            _ => d,
        });
    }
    best.expect("non-empty")
}

fn check_intervals(j: &[Interval]) -> Result<()> {
    for w in j.windows(2) {
        if w[0].hi > w[1].lo {
            return invalid("intervals must be sorted and disjoint");
        }
    }
    Ok(())
}

/// Coordinates the streaming distance can run on: exact rationals, or
/// integers on a common scale (where gap midpoints must stay integral,
/// i.e. all coordinates even).
pub trait Coord: Clone + Ord {
    fn origin() -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn twice(&self) -> Self;
    fn half(&self) -> Self;
}

impl Coord for Q {
    fn origin() -> Self {
        <Q as Zero>::zero()
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn twice(&self) -> Self {
        self * qi(2)
    }
    fn half(&self) -> Self {
        self / qi(2)
    }
}

impl Coord for BigInt {
    fn origin() -> Self {
        <BigInt as Zero>::zero()
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn twice(&self) -> Self {
        self << 1u32
    }
    fn half(&self) -> Self {
        debug_assert!(!(self & BigInt::one()).is_one(), "odd coordinate difference");
        self >> 1u32
    }
}

/// Streaming Hausdorff distance between a point sequence fed in increasing
/// order and a fixed union of sorted, non-overlapping closed intervals.
///
/// Memory is `O(|J|)`; each pushed point costs `O(1)` amortized. Decoders
/// whose output is too large to hold use this directly.
pub struct HausdorffStream<T: Coord = Q> {
    // interval ends, flattened: lo_0, hi_0, lo_1, hi_1, …
    ends: Vec<T>,
    // pointer for the A → J direction
    ia: usize,
    // next interval end to evaluate for J → A
    iq: usize,
    // interval receiving gap midpoints
    ig: usize,
    prev: Option<T>,
    best: T,
    count: u64,
}

impl HausdorffStream<Q> {
    pub fn new(j: &[Interval]) -> Result<Self> {
        check_intervals(j)?;
        Self::from_ends(j.iter().flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]).collect())
    }
}

impl<T: Coord> HausdorffStream<T> {
    /// `ends` must be sorted: `lo_0 ≤ hi_0 ≤ lo_1 ≤ …`.
    pub fn from_ends(ends: Vec<T>) -> Result<Self> {
        if ends.is_empty() {
            return Err(Error::EmptySet);
        }
        if !ends.len().is_multiple_of(2) || ends.windows(2).any(|w| w[0] > w[1]) {
            return invalid("intervals must be sorted and disjoint");
        }
        Ok(Self { ends, ia: 0, iq: 0, ig: 0, prev: None, best: T::origin(), count: 0 })
    }

    fn bump(&mut self, d: T) {
        if d > self.best {
            self.best = d;
        }
    }

    fn lo(&self, i: usize) -> &T {
        &self.ends[2 * i]
    }

    fn hi(&self, i: usize) -> &T {
        &self.ends[2 * i + 1]
    }

    /// Feed the next point; points must be non-decreasing.
    pub fn push(&mut self, a: &T) {
        if let Some(p) = &self.prev {
            debug_assert!(p <= a, "points must be pushed in order");
            if p == a {
                return;
            }
        }
        self.count += 1;
        let nj = self.ends.len() / 2;
        // A → J
        while self.ia < nj && self.hi(self.ia) < a {
            self.ia += 1;
        }
        let da = if self.ia == nj {
            a.minus(self.hi(nj - 1))
        } else if self.lo(self.ia) <= a {
            T::origin()
        } else {
            let right = self.lo(self.ia).minus(a);
            if self.ia > 0 {
                let left = a.minus(self.hi(self.ia - 1));
                if left < right {
                    left
                } else {
                    right
                }
            } else {
                right
            }
        };
        self.bump(da);
        // J → A: interval ends strictly left of a see (prev, a) as neighbours
        while self.iq < self.ends.len() {
            let x = &self.ends[self.iq];
            if x >= a {
                break;
            }
            let d = match &self.prev {
                Some(p) => {
                    let l = x.minus(p);
                    let r = a.minus(x);
                    if l < r {
                        l
                    } else {
                        r
                    }
                }
                None => a.minus(x),
            };
            self.bump(d);
            self.iq += 1;
        }
        // J → A: the gap (prev, a) peaks at its midpoint
        if let Some(p) = self.prev.take() {
            let s = p.plus(a); // 2·midpoint
            while self.ig < nj && self.hi(self.ig).twice() < s {
                self.ig += 1;
            }
            if self.ig < nj && self.lo(self.ig).twice() <= s {
                self.bump(a.minus(&p).half());
            }
        }
        self.prev = Some(a.clone());
    }

    pub fn finish(mut self) -> Result<T> {
        let Some(last) = self.prev.take() else {
            return Err(Error::EmptySet);
        };
        while self.iq < self.ends.len() {
            let d = self.ends[self.iq].minus(&last);
            self.bump(d);
            self.iq += 1;
        }
        Ok(self.best)
    }

    pub fn points_seen(&self) -> u64 {
        self.count
    }
}

/// `sup_{a∈A} d(a, ⋃J)` for sorted points and sorted disjoint intervals.
pub fn directed_to_intervals(a: &[Q], j: &[Interval]) -> Q {
    let mut best = Q::zero();
    let mut i = 0;
    for x in a {
        while i < j.len() && &j[i].hi < x {
            i += 1;
        }
        let d = if i == j.len() {
            x - &j[j.len() - 1].hi
        } else if &j[i].lo <= x {
            continue;
        } else if i > 0 {
            min_q(&j[i].lo - x, x - &j[i - 1].hi)
        } else {
            &j[i].lo - x
        };
        if d > best {
            best = d;
        }
    }
    best
}

/// A sorted interval union over one common denominator, for repeated
/// exact comparisons against other unions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledIntervals {
    pub den: BigInt,
    /// `lo, hi` numerators, interleaved.
    pub ends: Vec<BigInt>,
}

impl ScaledIntervals {
    pub fn new(j: &[Interval]) -> Self {
        let mut den = BigInt::one();
        for x in j.iter().flat_map(|iv| [&iv.lo, &iv.hi]) {
            if !(&den % x.denom()).is_zero() {
                den = den.lcm(x.denom());
            }
        }
        let ends = j.iter().flat_map(|iv| [&den / iv.lo.denom() * iv.lo.numer(), &den / iv.hi.denom() * iv.hi.numer()]).collect();
        Self { den, ends }
    }

    fn rescaled(&self, den: &BigInt) -> Vec<BigInt> {
        let f = den / &self.den;
        if f.is_one() {
            self.ends.clone()
        } else {
            self.ends.iter().map(|x| x * &f).collect()
        }
    }
}

/// `sup_{x∈E} d(x, ⋃J)` over interleaved integer endpoint lists.
fn directed_ends(e: &[BigInt], j: &[BigInt]) -> BigInt {
    let mut best = BigInt::zero();
    let mut i = 0;
    let n = j.len() / 2;
    for x in e {
        while i < n && &j[2 * i + 1] < x {
            i += 1;
        }
        let d = if i == n {
            x - &j[2 * n - 1]
        } else if &j[2 * i] <= x {
            continue;
        } else if i > 0 {
            (&j[2 * i] - x).min(x - &j[2 * i - 1])
        } else {
            &j[2 * i] - x
        };
        if d > best {
            best = d;
        }
    }
    best
}

/// Certified lower bound on `d_H` of two closed sets, each given by a cover
/// whose interval endpoints belong to the set.
pub fn cover_lower_bound(a: &ScaledIntervals, b: &ScaledIntervals) -> Q {
    let den = a.den.lcm(&b.den);
    let (ea, eb) = (a.rescaled(&den), b.rescaled(&den));
    let d = directed_ends(&ea, &eb).max(directed_ends(&eb, &ea));
    Q::new(d, den)
}

/// `d_H(A, ⋃J)` for sorted, non-overlapping closed intervals.
pub fn hausdorff_vs_intervals(a: &FinitePointSet, j: &[Interval]) -> Result<Q> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    check_intervals(j)?;
    if let Some(d) = hausdorff_scaled(a.points(), j) {
        return d;
    }
    let mut s = HausdorffStream::new(j)?;
    for p in a.points() {
        s.push(p);
    }
    s.finish()
}

/// Largest common denominator (in bits) worth rescaling to integers.
const SCALED_MAX_BITS: u64 = 4096;

/// Integer fast path: rescale by `2S`, `S` the common denominator, so all
/// distances and gap midpoints are integers. `None` if `S` is too large.
fn hausdorff_scaled(a: &[Q], j: &[Interval]) -> Option<Result<Q>> {
    let mut s = BigInt::one();
    let all = a.iter().chain(j.iter().flat_map(|iv| [&iv.lo, &iv.hi]));
    for x in all {
        if !(s.clone() % x.denom()).is_zero() {
            s = s.lcm(x.denom());
            if s.bits() > SCALED_MAX_BITS {
                return None;
            }
        }
    }
    let s2 = s << 1u32;
    let scale = |x: &Q| &s2 / x.denom() * x.numer();
    let ends: Vec<BigInt> = j.iter().flat_map(|iv| [scale(&iv.lo), scale(&iv.hi)]).collect();
    let mut h = match HausdorffStream::from_ends(ends) {
        Ok(h) => h,
        Err(e) => return Some(Err(e)),
    };
    for x in a {
        h.push(&scale(x));
    }
    Some(h.finish().map(|d| Q::new(d, s2)))
}

/// `d_H(A, B)` for finite sets by a single merge pass.
pub fn hausdorff_finite(a: &FinitePointSet, b: &FinitePointSet) -> Result<Q> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let (pa, pb) = (a.points(), b.points());
    Ok(max_q(directed(pa, pb), directed(pb, pa)))
}

/// `sup_{x∈A} d(x, B)` for sorted non-empty lists, two-pointer.
pub fn directed(a: &[Q], b: &[Q]) -> Q {
    let mut best = Q::zero();
    let mut j = 0;
    for x in a {
        while j + 1 < b.len() && &b[j + 1] <= x {
            j += 1;
        }
        let mut d = (x - &b[j]).abs();
        if &b[j] < x && j + 1 < b.len() {
            let r = &b[j + 1] - x;
            if r < d {
                d = r;
            }
        }
        if d > best {
            best = d;
        }
    }
    best
}

pub(crate) fn max_q(a: Q, b: Q) -> Q {
    if a >= b {
        a
    } else {
        b
    }
}

pub(crate) fn min_q(a: Q, b: Q) -> Q {
    if a <= b {
        a
    } else {
        b
    }
}

// ---------------------------------------------------------------------------
// hole separation

/// An outer interval `[a,b]` with a hole `[c,d]` inside its interior: the
/// set lives in `[a,c] ∪ [d,b]` and contains `c` and `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoleConfig {
    pub outer: Interval,
    pub hole: Interval,
}

impl HoleConfig {
    pub fn new(outer: Interval, hole: Interval) -> Result<Self> {
        if !(outer.lo < hole.lo && hole.hi < outer.hi) {
            return invalid("hole must lie in the interior of the outer interval");
        }
        Ok(Self { outer, hole })
    }
}

/// Certificate that two closed sets respecting these hole structures are
/// more than `ε` apart in Hausdorff distance.
///
/// Besides the classical hypotheses (outer ends `ε`-close, both holes longer
/// than `2ε`, hole ends differing by more than `ε`) this also demands that
/// some hole end of one configuration sits inside the other hole with more
/// than `ε` clearance on both sides. That point belongs to its own set and
/// is `> ε` away from the other set, which is what actually proves the
/// bound. The classical hypotheses alone admit counterexamples (two holes
/// shifted by a little more than `ε` with the remaining ends matched by
/// stray points), see the unit tests.
pub fn separation_test(f: &HoleConfig, g: &HoleConfig, eps: &Q) -> Result<bool> {
    if !eps.is_positive() {
        return invalid("ε must be positive");
    }
    let two_eps = eps * qi(2);
    let (a, b, c, d) = (&f.outer.lo, &f.outer.hi, &f.hole.lo, &f.hole.hi);
    let (a2, b2, c2, d2) = (&g.outer.lo, &g.outer.hi, &g.hole.lo, &g.hole.hi);
    let classical = (a - a2).abs() <= *eps
        && (b - b2).abs() <= *eps
        && (d - c) > two_eps
        && (d2 - c2) > two_eps
        && max_q((c - c2).abs(), (d - d2).abs()) > *eps;
    if !classical {
        return Ok(false);
    }
    let inside = |e: &Q, lo: &Q, hi: &Q| &(lo + eps) < e && e < &(hi - eps);
    Ok(inside(c, c2, d2) || inside(d, c2, d2) || inside(c2, c, d) || inside(d2, c, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[Q]) -> FinitePointSet {
        FinitePointSet::new(v.to_vec()).unwrap()
    }

    fn brute(a: &[Q], b: &[Q]) -> Q {
        let dir = |x: &[Q], y: &[Q]| {
            x.iter()
                .map(|p| y.iter().map(|r| (p - r).abs()).min().unwrap())
                .max()
                .unwrap()
        };
        max_q(dir(a, b), dir(b, a))
    }

    #[test]
    fn finite_examples() {
        let a = set(&[qi(0), qi(1)]);
        assert_eq!(hausdorff_finite(&a, &a).unwrap(), qi(0));
        assert_eq!(hausdorff_finite(&set(&[qi(0)]), &set(&[qi(1)])).unwrap(), qi(1));
        let c = set(&[qi(0), q(1, 3), q(2, 3), qi(1)]);
        assert_eq!(hausdorff_finite(&c, &a).unwrap(), q(1, 3));
        assert_eq!(hausdorff_finite(&a, &FinitePointSet::default()), Err(Error::EmptySet));
    }

    #[test]
    fn interval_examples() {
        let c = set(&[qi(0), q(1, 3), q(2, 3), qi(1)]);
        let j = [Interval::new(qi(0), q(1, 3)).unwrap(), Interval::new(q(2, 3), qi(1)).unwrap()];
        assert_eq!(hausdorff_vs_intervals(&c, &j).unwrap(), q(1, 6));
        let a = set(&[qi(0), qi(1)]);
        assert_eq!(hausdorff_vs_intervals(&a, &[Interval::unit()]).unwrap(), q(1, 2));
        let h = set(&[q(1, 2)]);
        assert_eq!(hausdorff_vs_intervals(&h, &[Interval::point(q(1, 2))]).unwrap(), qi(0));
        assert!(hausdorff_vs_intervals(&h, &[]).is_err());
        let overlapping = [Interval::new(qi(0), q(1, 2)).unwrap(), Interval::new(q(1, 3), qi(1)).unwrap()];
        assert!(hausdorff_vs_intervals(&h, &overlapping).is_err());
    }

    #[test]
    fn quantize_examples() {
        let u = QuantRange::unit();
        let r = quantize(&q(1, 3), &u, &pow2(-8)).unwrap();
        assert_eq!((r.mantissa.clone(), r.precision_exp), (BigInt::from(85), 8));
        assert_eq!(r.value(), q(85, 256));
        assert!((r.value() - q(1, 3)).abs() < pow2(-8));
        assert_eq!(r.bit_cost, 9);

        let h = quantize(&q(1, 2), &u, &pow2(-4)).unwrap();
        assert_eq!(h.value(), q(1, 2));
        assert_eq!(h.bit_cost, 5);

        assert_eq!(quantize(&q(999, 1000), &u, &pow2(-3)).unwrap().value(), qi(1));
        assert_eq!(quantize(&qi(2), &u, &pow2(-3)), Err(Error::OutOfRange));
        assert!(quantize(&qi(0), &u, &qi(0)).is_err());
    }

    #[test]
    fn bit_cost_small_grids() {
        let u = QuantRange::unit();
        // p = 0: grid {0, 1}, both reachable from [0,1]
        assert_eq!(u.bit_cost(0), 1);
        // p = -1: grid step 2; everything in [0,1] rounds to 0 or 2 (1 rounds up)
        assert_eq!(u.bit_cost(-1), 1);
        assert_eq!(u.bit_cost(-3), 0);
        let narrow = QuantRange::new(q(1, 10), q(2, 10)).unwrap();
        assert_eq!(narrow.bit_cost(0), 0);
    }

    #[test]
    fn offset_roundtrip() {
        let r = QuantRange::new(q(-3, 7), q(5, 11)).unwrap();
        for k in 0..50 {
            let x = q(-3, 7) + (q(5, 11) - q(-3, 7)) * q(k, 49);
            let v = quantize(&x, &r, &pow2(-10)).unwrap();
            let off = v.offset(&r);
            assert!(!off.is_negative());
            assert!(off < (BigInt::one() << v.bit_cost));
            assert_eq!(QuantizedReal::from_offset(&r, v.precision_exp, off), v);
        }
    }

    #[test]
    fn log2_helpers() {
        assert_eq!(floor_log2(&qi(1)), 0);
        assert_eq!(floor_log2(&q(1, 3)), -2);
        assert_eq!(ceil_log2(&q(1, 3)), -1);
        assert_eq!(floor_log2(&qi(8)), 3);
        assert_eq!(ceil_log2(&qi(9)), 4);
        assert_eq!(precision_for(&q(1, 100)), 6);
        assert_eq!(round_half_up(&q(-1, 2)), BigInt::from(0));
        assert_eq!(round_half_up(&q(5, 2)), BigInt::from(3));
        assert_eq!(ceil(&q(-5, 2)), BigInt::from(-2));
        assert!((to_f64(&q(1, 3)) - 1.0 / 3.0).abs() < 1e-15);
    }

    fn hole(a: Q, b: Q, c: Q, d: Q) -> HoleConfig {
        HoleConfig::new(Interval::new(a, b).unwrap(), Interval::new(c, d).unwrap()).unwrap()
    }

    #[test]
    fn separation_examples() {
        let f = hole(qi(0), qi(1), q(3, 10), q(7, 10));
        let g = hole(qi(0), qi(1), q(4, 10), q(8, 10));
        assert!(separation_test(&f, &g, &q(5, 100)).unwrap());
        assert!(!separation_test(&f, &f, &q(1, 100)).unwrap());
        let n = hole(qi(0), qi(1), q(45, 100), q(55, 100));
        assert!(!separation_test(&n, &n, &q(6, 100)).unwrap());
        assert!(separation_test(&f, &g, &qi(0)).is_err());
        assert!(HoleConfig::new(Interval::unit(), Interval::new(qi(0), q(1, 2)).unwrap()).is_err());
    }

    /// Holes shifted by slightly more than ε with every hole end still
    /// matched within ε by the other set: the classical hypotheses hold but
    /// the sets are only 0.02 apart.
    #[test]
    fn classical_hypotheses_alone_are_unsound() {
        let f = hole(qi(0), qi(1), q(30, 100), q(42, 100));
        let g = hole(qi(0), qi(1), q(40, 100), q(52, 100));
        let eps = q(5, 100);
        let fs = set(&[qi(0), q(30, 100), q(42, 100), q(52, 100), qi(1)]);
        let gs = set(&[qi(0), q(30, 100), q(40, 100), q(52, 100), qi(1)]);
        assert_eq!(hausdorff_finite(&fs, &gs).unwrap(), q(2, 100));
        assert!(!separation_test(&f, &g, &eps).unwrap());
    }

    fn arb_union() -> impl Strategy<Value = Vec<Interval>> {
        proptest::collection::vec(0u32..=96, 2..12).prop_map(|mut c| {
            c.sort();
            c.dedup();
            c.chunks(2).filter(|w| w.len() == 2).map(|w| Interval::new(q(w[0] as i64, 96), q(w[1] as i64, 96)).unwrap()).collect()
        })
    }

    fn arb_set(max: usize) -> impl Strategy<Value = Vec<Q>> {
        proptest::collection::vec((0u32..=1000).prop_map(|k| q(k as i64, 1000)), 1..=max)
    }

    proptest! {
        #[test]
        fn finite_matches_brute_force(a in arb_set(64), b in arb_set(64)) {
            let (sa, sb) = (set(&a), set(&b));
            prop_assert_eq!(hausdorff_finite(&sa, &sb).unwrap(), brute(sa.points(), sb.points()));
        }

        #[test]
        fn intervals_match_dense_oracle(a in proptest::collection::vec((0u32..=100).prop_map(|k| q(k as i64, 100)), 1..=16),
                                        cuts in proptest::collection::vec(0u32..=16, 2..10)) {
            // A on the 1/100 grid, interval ends on 1/16; every breakpoint of
            // x ↦ d(x, A) lies on the 1/400 grid, so sampling there is exact
            let mut c = cuts.clone();
            c.sort();
            c.dedup();
            let j: Vec<Interval> = c.chunks(2).filter(|w| w.len() == 2)
                .map(|w| Interval::new(q(w[0] as i64, 16), q(w[1] as i64, 16)).unwrap())
                .collect();
            prop_assume!(!j.is_empty());
            let sa = set(&a);
            let mut samples = Vec::new();
            for iv in &j {
                let lo = floor(&(&iv.lo * qi(400))).to_i64().unwrap();
                let hi = floor(&(&iv.hi * qi(400))).to_i64().unwrap();
                for k in lo..=hi { samples.push(q(k, 400)); }
            }
            let want = brute(sa.points(), &samples);
            prop_assert_eq!(hausdorff_vs_intervals(&sa, &j).unwrap(), want);
        }

        #[test]
        fn cover_bound_matches_rational_path(a in arb_union(), b in arb_union()) {
            prop_assume!(!a.is_empty() && !b.is_empty());
            let ends = |j: &[Interval]| j.iter().flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]).collect::<Vec<_>>();
            let want = max_q(directed_to_intervals(&ends(&a), &b), directed_to_intervals(&ends(&b), &a));
            prop_assert_eq!(cover_lower_bound(&ScaledIntervals::new(&a), &ScaledIntervals::new(&b)), want);
        }

        #[test]
        fn quantize_error_and_doubling(num in 0i64..=10_000, l in 1i64..40) {
            let u = QuantRange::unit();
            let x = q(num, 10_000);
            let e = pow2(-l);
            let v = quantize(&x, &u, &e).unwrap();
            prop_assert!((v.value() - &x).abs() < e);
            let v2 = quantize(&x, &u, &pow2(-l - 1)).unwrap();
            prop_assert_eq!(v2.bit_cost, v.bit_cost + 1);
        }
    }
}
