//! Box-counting dimension on dyadic half-open boxes `[m 2^{-j}, (m+1) 2^{-j})`.
//! The point 1 falls in box `2^j` of its own, like any other right edge.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::numeric::{floor, scale2, FinitePointSet, Interval};
use crate::stats::ols;
use crate::{invalid, Result, Q};

#[derive(Debug, Clone, PartialEq)]
pub struct DimEstimate {
    pub scales: Vec<u32>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub r2: f64,
}

fn box_of(x: &Q, j: u32) -> BigInt {
    floor(&scale2(x, j as i64))
}

/// Boxes of width `2^{-j}` meeting a finite set.
pub fn box_count(s: &FinitePointSet, j: u32) -> u64 {
    let mut n = 0;
    let mut last: Option<BigInt> = None;
    for x in s.points() {
        let b = box_of(x, j);
        if last.as_ref() != Some(&b) {
            n += 1;
            last = Some(b);
        }
    }
    n
}

/// Boxes of width `2^{-j}` meeting a union of sorted disjoint closed intervals.
pub fn box_count_intervals(j_: &[Interval], j: u32) -> u64 {
    let mut n: u64 = 0;
    let mut last: Option<BigInt> = None;
    for iv in j_ {
        let (a, b) = (box_of(&iv.lo, j), box_of(&iv.hi, j));
        let start = match &last {
            Some(l) if *l >= a => l + 1,
            _ => a,
        };
        if start <= b {
            n += (&b - &start + BigInt::from(1)).to_u64().unwrap_or(u64::MAX);
            last = Some(b);
        }
    }
    n
}

fn fit(scales: Vec<u32>, counts: Vec<u64>) -> Result<DimEstimate> {
    let x: Vec<f64> = scales.iter().map(|&j| j as f64).collect();
    let y: Vec<f64> = counts.iter().map(|&c| libm::log2(c as f64)).collect();
    let Some(f) = ols(&[&x], &y) else {
        return invalid("degenerate scale window");
    };
    let r2 = if f.r2.is_finite() { f.r2 } else { 1.0 };
    Ok(DimEstimate { scales, counts, slope: f.coef[1], r2 })
}

/// Slope of `log2 N_j` against `j` over `j_min..=j_max`.
///
/// `resolution` is the finest meaningful scale exponent of `s` (e.g.
/// `⌊depth·log2(1/ρ)⌋` for a level set); the window must end at least two
/// scales above it.
pub fn estimate_dimension(s: &FinitePointSet, j_min: u32, j_max: u32, resolution: u32) -> Result<DimEstimate> {
    if j_min >= j_max {
        return invalid("need j_min < j_max");
    }
    if j_max + 2 > resolution {
        return invalid("scale window reaches below the resolution floor");
    }
    let scales: Vec<u32> = (j_min..=j_max).collect();
    let counts = scales.iter().map(|&j| box_count(s, j)).collect();
    fit(scales, counts)
}

/// Same fit with box counts taken on a cover by intervals.
pub fn estimate_dimension_intervals(j_: &[Interval], j_min: u32, j_max: u32, resolution: u32) -> Result<DimEstimate> {
    if j_min >= j_max {
        return invalid("need j_min < j_max");
    }
    if j_max + 2 > resolution {
        return invalid("scale window reaches below the resolution floor");
    }
    let scales: Vec<u32> = (j_min..=j_max).collect();
    let counts = scales.iter().map(|&j| box_count_intervals(j_, j)).collect();
    fit(scales, counts)
}

/// `⌊n · log2(1/ρ)⌋` with `ρ` the largest contraction ratio.
pub fn resolution_of(depth: usize, rho_max: f64) -> u32 {
    libm::floor(depth as f64 * -libm::log2(rho_max)) as u32
}
