//! Iterated function systems on `[0,1]`: maps, words, level sets.
//!
//! A word `ω_1 … ω_n` acts as `φ_{ω_n} ∘ ⋯ ∘ φ_{ω_1}` (the first symbol is
//! applied first), so `J_{ω_1^n} = φ_{ω_1^n}([0,1])` and the depth-`n+1`
//! intervals are `φ_i(J_{ω_1^n})`, i.e. a new symbol goes on the *right*
//! of the word while its interval sits inside `J_{ω_2^{n+1}}`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::numeric::{dyadic, max_q, pow2, qi, round_half_up, scale2, to_f64, FinitePointSet, Interval};
use crate::{invalid, Error, Result, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapSpec {
    Affine { a: Q, b: Q },
    /// `Σ_α c_α x^α`, `α = 0..=N`.
    Polynomial { coeffs: Vec<Q> },
    /// `Σ_h c_h x^h`, `h = 0..N`, with `|c_h| R^h ≤ r`.
    TruncatedSeries { coeffs: Vec<Q>, radius: Q, bound: Q },
}

impl MapSpec {
    /// Power-basis coefficients, constant term first.
    pub fn coeffs(&self) -> Vec<Q> {
        match self {
            MapSpec::Affine { a, b } => vec![b.clone(), a.clone()],
            MapSpec::Polynomial { coeffs } | MapSpec::TruncatedSeries { coeffs, .. } => coeffs.clone(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            MapSpec::Affine { .. } => 1,
            MapSpec::Polynomial { coeffs } | MapSpec::TruncatedSeries { coeffs, .. } => {
                coeffs.len().saturating_sub(1)
            }
        }
    }

    pub fn eval(&self, x: &Q) -> Q {
        match self {
            MapSpec::Affine { a, b } => a * x + b,
            MapSpec::Polynomial { coeffs } | MapSpec::TruncatedSeries { coeffs, .. } => horner(coeffs, x),
        }
    }

    fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs().iter().map(to_f64).collect()
    }
}

pub fn horner(coeffs: &[Q], x: &Q) -> Q {
    let mut acc = Q::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn horner_f64(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn deriv_f64(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(h, v)| h as f64 * v).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IfsSpec {
    pub maps: Vec<MapSpec>,
    pub rho: Q,
}

impl IfsSpec {
    pub fn new(maps: Vec<MapSpec>, rho: Q) -> Result<Self> {
        if maps.len() < 2 {
            return invalid("an IFS needs at least two maps");
        }
        if maps.len() > 255 {
            return invalid("at most 255 maps are supported");
        }
        if !(rho.is_positive() && rho < Q::one()) {
            return invalid("contraction rate must lie in (0,1)");
        }
        Ok(Self { maps, rho })
    }

    pub fn arity(&self) -> usize {
        self.maps.len()
    }

    /// `φ_0(x) = x/3`, `φ_1(x) = x/3 + 2/3`.
    pub fn middle_third() -> Self {
        let third = Q::new(1.into(), 3.into());
        Self {
            maps: vec![
                MapSpec::Affine { a: third.clone(), b: Q::zero() },
                MapSpec::Affine { a: third.clone(), b: Q::new(2.into(), 3.into()) },
            ],
            rho: third,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.maps.iter().map(MapSpec::degree).max().unwrap_or(0)
    }

    pub fn is_affine(&self) -> bool {
        self.maps.iter().all(|m| matches!(m, MapSpec::Affine { .. }))
    }
}

/// A finite word over the index set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

/// `φ_w(x)`, applying `φ_{w_1}` first.
pub fn compose_apply(ifs: &IfsSpec, w: &Word, x: &Q) -> Result<Q> {
    let mut y = x.clone();
    for &s in &w.0 {
        let m = ifs.maps.get(s as usize).ok_or_else(|| Error::Invalid(format!("symbol {s} outside index set")))?;
        y = m.eval(&y);
    }
    Ok(y)
}

/// The `|I|^n` intervals at depth `n`. Interval `k` belongs to the word
/// whose base-`|I|` digits (least significant first) are `ω_1, ω_2, …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSet {
    pub depth: usize,
    pub arity: usize,
    pub intervals: Vec<Interval>,
    pub endpoints: FinitePointSet,
    /// Certified bound on how far each stored endpoint may be from the
    /// exact one (zero when computed exactly).
    pub error_bound: Q,
}

impl LevelSet {
    pub fn word_of(&self, mut idx: usize) -> Word {
        let mut w = Vec::with_capacity(self.depth);
        for _ in 0..self.depth {
            w.push((idx % self.arity) as u8);
            idx /= self.arity;
        }
        Word(w)
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        if w.len() != self.depth {
            return None;
        }
        let mut idx = 0usize;
        for &s in w.0.iter().rev() {
            if s as usize >= self.arity {
                return None;
            }
            idx = idx * self.arity + s as usize;
        }
        Some(idx)
    }

    pub fn interval(&self, w: &Word) -> Option<&Interval> {
        self.index_of(w).map(|i| &self.intervals[i])
    }

    /// Intervals in spatial order.
    pub fn sorted_intervals(&self) -> Vec<Interval> {
        let mut v = self.intervals.clone();
        v.sort_by(|a, b| a.lo.cmp(&b.lo));
        v
    }

    pub fn max_len(&self) -> Q {
        self.intervals.iter().map(Interval::len).fold(Q::zero(), max_q)
    }
}

pub(crate) fn check_budget(arity: usize, n: usize, budget: usize) -> Result<usize> {
    let mut count: u128 = 1;
    for _ in 0..n {
        count = count.saturating_mul(arity as u128);
    }
    // two endpoints per interval
    let needed = count.saturating_mul(2);
    if needed > budget as u128 {
        return Err(Error::Budget { needed, limit: budget });
    }
    Ok(count as usize)
}

fn image(lo: Q, hi: Q) -> Interval {
    if lo <= hi {
        Interval { lo, hi }
    } else {
        Interval { lo: hi, hi: lo }
    }
}

fn finish_level(arity: usize, depth: usize, intervals: Vec<Interval>, error_bound: Q) -> LevelSet {
    let mut pts = Vec::with_capacity(2 * intervals.len());
    for iv in &intervals {
        pts.push(iv.lo.clone());
        pts.push(iv.hi.clone());
    }
    LevelSet { depth, arity, intervals, endpoints: FinitePointSet::clamped(pts), error_bound }
}

/// Depth-`n` level set in exact rational arithmetic.
///
/// Exact composition of non-affine maps grows numerators geometrically in
/// `n`; use [`level_set_fixed`] for deep non-affine references.
pub fn level_set(ifs: &IfsSpec, n: usize, budget: usize) -> Result<LevelSet> {
    check_budget(ifs.arity(), n, budget)?;
    let mut cur = vec![Interval::unit()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(cur.len() * ifs.arity());
        for m in &ifs.maps {
            for iv in &cur {
                next.push(image(m.eval(&iv.lo), m.eval(&iv.hi)));
            }
        }
        cur = next;
    }
    Ok(finish_level(ifs.arity(), n, cur, Q::zero()))
}

/// Maps with coefficients on the grid `2^{-s}`, evaluated in fixed point.
///
/// Horner steps round half-up back onto the grid, so one application errs
/// by at most `(2·deg + 1)·2^{-s-1}` against the true map when the source
/// coefficients were off-grid, and `deg·2^{-s-1}` when they were on it.
#[derive(Debug, Clone)]
pub struct FixedMaps {
    pub scale: u32,
    /// Mantissas, constant term first.
    pub coeffs: Vec<Vec<BigInt>>,
    /// Per-application error bound against the maps these came from.
    pub step_error: Q,
}

impl FixedMaps {
    pub fn from_ifs(ifs: &IfsSpec, scale: u32) -> Self {
        let mut exact = true;
        let coeffs: Vec<Vec<BigInt>> = ifs
            .maps
            .iter()
            .map(|m| {
                m.coeffs()
                    .iter()
                    .map(|c| {
                        let s = scale2(c, scale as i64);
                        if !s.is_integer() {
                            exact = false;
                        }
                        round_half_up(&s)
                    })
                    .collect()
            })
            .collect();
        let deg = ifs.max_degree() as i64;
        let units = if exact { deg } else { 2 * deg + 1 };
        Self { scale, coeffs, step_error: qi(units) * pow2(-(scale as i64) - 1) }
    }

    /// From mantissas already on the grid.
    pub fn from_mantissas(coeffs: Vec<Vec<BigInt>>, scale: u32) -> Self {
        let deg = coeffs.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0) as i64;
        Self { scale, coeffs, step_error: qi(deg) * pow2(-(scale as i64) - 1) }
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn apply(&self, i: usize, x: &BigInt) -> BigInt {
        let c = &self.coeffs[i];
        let s = self.scale as u64;
        let half = BigInt::one() << (s - 1);
        let mut acc = c[c.len() - 1].clone();
        for k in (0..c.len() - 1).rev() {
            acc = ((acc * x + &half) >> s) + &c[k];
        }
        acc
    }

    pub fn one(&self) -> BigInt {
        BigInt::one() << self.scale
    }

    pub fn to_q(&self, m: &BigInt) -> Q {
        dyadic(m.clone(), self.scale as i64)
    }
}

/// Depth-`n` level set under fixed-point maps. `rate` must bound the
/// contraction of the true maps; the accumulated error bound is
/// `step_error / (1 − rate)`.
pub fn level_set_fixed(fm: &FixedMaps, rate: &Q, n: usize, budget: usize) -> Result<LevelSet> {
    let arity = fm.arity();
    check_budget(arity, n, budget)?;
    let mut cur: Vec<(BigInt, BigInt)> = vec![(BigInt::zero(), fm.one())];
    for _ in 0..n {
        let mut next = Vec::with_capacity(cur.len() * arity);
        for i in 0..arity {
            for (lo, hi) in &cur {
                let (a, b) = (fm.apply(i, lo), fm.apply(i, hi));
                next.push(if a <= b { (a, b) } else { (b, a) });
            }
        }
        cur = next;
    }
    let intervals = cur.iter().map(|(a, b)| Interval { lo: fm.to_q(a), hi: fm.to_q(b) }).collect();
    let bound = &fm.step_error / (Q::one() - rate);
    Ok(finish_level(arity, n, intervals, bound))
}

/// Reference attractor surrogate for precision `ε`: depth
/// `depth_for(ρ, ε/4)`, exact for affine systems and fixed-point with
/// `ℓ + 40` fractional bits otherwise.
pub fn reference(ifs: &IfsSpec, eps: &Q, budget: usize) -> Result<LevelSet> {
    let n = depth_for(&ifs.rho, &(eps / qi(4)))?;
    if ifs.is_affine() {
        level_set(ifs, n, budget)
    } else {
        let l = crate::numeric::ceil_log2(&(Q::one() / eps)).max(0) as u32;
        let fm = FixedMaps::from_ifs(ifs, l + 40);
        level_set_fixed(&fm, &ifs.rho, n, budget)
    }
}

/// Minimal `n` with `ρ^n < ε′`.
pub fn depth_for(rho: &Q, eps: &Q) -> Result<usize> {
    if !(rho.is_positive() && rho < &Q::one()) {
        return invalid("ρ must lie in (0,1)");
    }
    if !eps.is_positive() {
        return invalid("ε′ must be positive");
    }
    let mut n = 0;
    let mut p = Q::one();
    while p >= *eps {
        p *= rho;
        n += 1;
    }
    Ok(n)
}

/// Grid size used to bound derivatives of non-affine maps.
pub const VERIFY_GRID: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    /// Certified (grid + slack) bound on `sup |φ_i'|` over all maps.
    pub rate_bound: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Upper bound on `sup_{[0,1]} |φ'|`: the maximum over a uniform grid plus
/// half a grid step times a global bound on `|φ''|`.
pub fn derivative_bound(m: &MapSpec) -> f64 {
    if let MapSpec::Affine { a, .. } = m {
        return to_f64(a).abs();
    }
    let c = m.coeffs_f64();
    let d1 = deriv_f64(&c);
    let d2 = deriv_f64(&d1);
    let second: f64 = d2.iter().map(|v| v.abs()).sum();
    let h = 1.0 / VERIFY_GRID as f64;
    let grid = (0..=VERIFY_GRID).map(|k| horner_f64(&d1, k as f64 * h).abs()).fold(0.0, f64::max);
    // relative slack for float evaluation error
    grid * (1.0 + 1e-12) + second * h / 2.0 + 1e-15
}

/// `true` if `φ'` keeps one strict sign on the grid (semi-decision for
/// monotonicity, hence for `φ([0,1]) = [φ(0), φ(1)]` up to order).
fn monotone_on_grid(m: &MapSpec) -> bool {
    if let MapSpec::Affine { a, .. } = m {
        return !a.is_zero();
    }
    let d1 = deriv_f64(&m.coeffs_f64());
    let h = 1.0 / VERIFY_GRID as f64;
    let v: Vec<f64> = (0..=VERIFY_GRID).map(|k| horner_f64(&d1, k as f64 * h)).collect();
    v.iter().all(|x| *x > 0.0) || v.iter().all(|x| *x < 0.0)
}

pub fn validate(ifs: &IfsSpec) -> ValidationReport {
    let mut violations = Vec::new();
    let mut rate: f64 = 0.0;
    let rho = to_f64(&ifs.rho);
    let mut images = Vec::new();
    for (i, m) in ifs.maps.iter().enumerate() {
        if let MapSpec::TruncatedSeries { coeffs, radius, bound } = m {
            if radius <= &Q::one() {
                violations.push(format!("map {i}: radius R must exceed 1"));
            }
            let mut rh = Q::one();
            for (h, c) in coeffs.iter().enumerate() {
                if c.abs() * &rh > *bound {
                    violations.push(format!("map {i}: |c_{h}| R^{h} exceeds r"));
                    break;
                }
                rh *= radius;
            }
        }
        if !monotone_on_grid(m) {
            violations.push(format!("map {i}: not injective (derivative changes sign or vanishes)"));
        }
        let im = image(m.eval(&Q::zero()), m.eval(&Q::one()));
        if im.lo.is_negative() || im.hi > Q::one() {
            violations.push(format!("map {i}: image not contained in [0,1]"));
        }
        let contracting = match m {
            MapSpec::Affine { a, .. } => a.abs() <= ifs.rho,
            _ => derivative_bound(m) <= rho,
        };
        let d = derivative_bound(m);
        rate = rate.max(d);
        if !contracting {
            violations.push(format!("map {i}: contraction bound {d:.6} exceeds ρ = {rho:.6}"));
        }
        images.push((i, im));
    }
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            let (ia, x) = &images[a];
            let (ib, y) = &images[b];
            if x.lo <= y.hi && y.lo <= x.hi {
                violations.push(format!("maps {ia} and {ib}: images overlap"));
            }
        }
    }
    ValidationReport { violations, rate_bound: rate }
}
