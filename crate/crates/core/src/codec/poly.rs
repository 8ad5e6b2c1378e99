//! Polynomial and truncated-power-series codecs.
//!
//! Both store the maps' power-basis coefficients quantized to a precision
//! `ε′` derived from `ε`, plus the depth `n̄`; the decoder prints the images
//! of `{0,1}` under all depth-`n̄` compositions of the quantized maps.
//!
//! Header, polynomial: `m u8 | b i8 | p u16 | n̄ u16 | G u8 | deg_i u8 × m`,
//! coefficients in `[-2^b, 2^b]`.
//! Header, series: `m u8 | N u16 | R = Rn/Rd u16×2 | r = rn/rd u16×2 | p u16 |
//! n̄ u16 | G u8`, coefficient `h` in `[-r R^{-h}, r R^{-h}]`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::bits::BitReader;
use super::{begin, read_i8, seal, write_i8, write_u, CodecId, CodecReport, Description, GUARD_BITS};
use crate::ifs::{self, derivative_bound, depth_for, validate, FixedMaps, IfsSpec, MapSpec};
use crate::numeric::{ceil_log2, max_q, pow2, precision_for, q, qi, quantize, FinitePointSet, QuantRange, QuantizedReal};
use crate::{invalid, Error, Result, Q};

/// Parameters chosen by an encoder, for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsParams {
    /// `K` (polynomial) or the unused marker `0` (series).
    pub k_const: Q,
    pub eps_prime_log2: f64,
    pub precision: i64,
    pub n_bar: usize,
    /// Number of coefficients per map (`N+1` or the series length `N`).
    pub terms: usize,
    pub rho_tilde: Q,
    pub halvings: u32,
}

/// Rational upper bound (on a `2^-20` grid) for a float rate.
fn rate_ceiling(d: f64) -> Q {
    let m = libm::ceil(d * (1u64 << 20) as f64) as i64;
    q(m, 1 << 20)
}

fn quantized_maps(mant: &[Vec<QuantizedReal>]) -> Vec<MapSpec> {
    mant.iter()
        .map(|cs| MapSpec::Polynomial { coeffs: cs.iter().map(QuantizedReal::value).collect() })
        .collect()
}

/// Validates quantized maps and returns their certified rate.
fn check_quantized(maps: Vec<MapSpec>) -> Option<Q> {
    let rate = maps.iter().map(derivative_bound).fold(0.0, f64::max);
    let rt = rate_ceiling(rate);
    if rt >= Q::one() {
        return None;
    }
    let spec = IfsSpec::new(maps, rt.clone()).ok()?;
    validate(&spec).passed().then_some(rt)
}

/// `K = 1 + (N+1)/(1−ρ)` with `N` the largest degree.
pub fn poly_k(ifs: &IfsSpec) -> Q {
    qi(1) + qi(ifs.max_degree() as i64 + 1) / (Q::one() - &ifs.rho)
}

pub fn encode_poly(ifs: &IfsSpec, ell: u32) -> Result<(Description, IfsParams)> {
    let report = validate(ifs);
    if !report.passed() {
        return Err(Error::Validation(report.violations.join("; ")));
    }
    if ifs.maps.iter().any(|m| matches!(m, MapSpec::TruncatedSeries { .. })) {
        return invalid("polynomial codec expects affine or polynomial maps");
    }
    let eps = pow2(-(ell as i64));
    let k = poly_k(ifs);
    let coeffs: Vec<Vec<Q>> = ifs.maps.iter().map(MapSpec::coeffs).collect();
    let cmax = coeffs.iter().flatten().map(|c| c.abs()).fold(Q::zero(), max_q);
    let b = if cmax.is_zero() { 0 } else { ceil_log2(&cmax) };
    let range = QuantRange::symmetric(pow2(b));
    for halvings in 0..=8u32 {
        let eps_p = &eps / &k / pow2(halvings as i64);
        let mant: Vec<Vec<QuantizedReal>> = coeffs
            .iter()
            .map(|cs| cs.iter().map(|c| quantize(c, &range, &eps_p)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let Some(rt) = check_quantized(quantized_maps(&mant)) else {
            continue;
        };
        let p = precision_for(&eps_p);
        let n_bar = depth_for(&max_q(ifs.rho.clone(), rt.clone()), &eps_p)?;
        let mut w = begin(CodecId::Poly, ell)?;
        write_u(&mut w, ifs.arity() as u64, 8)?;
        write_i8(&mut w, b)?;
        write_u(&mut w, p as u64, 16)?;
        write_u(&mut w, n_bar as u64, 16)?;
        write_u(&mut w, GUARD_BITS as u64, 8)?;
        for cs in &mant {
            write_u(&mut w, cs.len() as u64 - 1, 8)?;
        }
        for cs in &mant {
            for c in cs {
                w.write_big(&c.offset(&range), c.bit_cost);
            }
        }
        let params = IfsParams {
            k_const: k,
            eps_prime_log2: libm::log2(crate::numeric::to_f64(&eps_p)),
            precision: p,
            n_bar,
            terms: ifs.max_degree() + 1,
            rho_tilde: rt,
            halvings,
        };
        return Ok((seal(CodecId::Poly, ell, w), params));
    }
    Err(Error::Fragile)
}

/// Common `R` (smallest radius) and `r` (largest bound) over all maps.
fn series_constants(ifs: &IfsSpec) -> Result<(Q, Q)> {
    let mut rr: Option<Q> = None;
    let mut r = Q::zero();
    for m in &ifs.maps {
        let MapSpec::TruncatedSeries { radius, bound, .. } = m else {
            return invalid("series codec expects truncated-series maps");
        };
        rr = Some(match rr {
            Some(x) if x <= *radius => x,
            _ => radius.clone(),
        });
        r = max_q(r, bound.clone());
    }
    let rr = rr.expect("at least two maps");
    if rr <= Q::one() {
        return invalid("series codec needs R > 1");
    }
    Ok((rr, r))
}

/// `δ = (1 + 1/R)/2`, the midpoint of the admissible `(1/R, 1)`.
pub fn series_delta(radius: &Q) -> Q {
    (Q::one() + Q::one() / radius) / qi(2)
}

/// `log2 ε′` for `ε′ = r(δR−1)/(R(1−δ)) · ((1−δ)ε)^{log R / log(1/δ)}`.
pub fn series_eps_prime_log2(radius: &Q, r: &Q, delta: &Q, ell: u32) -> f64 {
    use crate::numeric::to_f64;
    let (rr, r, d) = (to_f64(radius), to_f64(r), to_f64(delta));
    let lead = libm::log2(r * (d * rr - 1.0) / (rr * (1.0 - d)));
    let expo = libm::log(rr) / libm::log(1.0 / d);
    lead + expo * (libm::log2(1.0 - d) - ell as f64)
}

/// Minimal `N` with `δ^N/(1−δ) < (1−ρ)ε/(4r)`.
pub fn series_terms(delta: &Q, rho: &Q, r: &Q, eps: &Q) -> usize {
    let target = (Q::one() - rho) * eps / (qi(4) * r);
    let mut n = 0;
    let mut dn = Q::one() / (Q::one() - delta);
    while dn >= target {
        dn *= delta;
        n += 1;
    }
    n
}

fn small_ratio(x: &Q) -> Result<(u64, u64)> {
    let n = x.numer().to_u64().filter(|v| *v < 1 << 16);
    let d = x.denom().to_u64().filter(|v| *v < 1 << 16);
    match (n, d) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => invalid("R and r must be ratios of 16-bit integers"),
    }
}

fn series_range(radius: &Q, r: &Q, h: usize) -> QuantRange {
    let mut w = r.clone();
    for _ in 0..h {
        w /= radius;
    }
    QuantRange::symmetric(w)
}

pub fn encode_analytic(ifs: &IfsSpec, ell: u32) -> Result<(Description, IfsParams)> {
    let (radius, r) = series_constants(ifs)?;
    let report = validate(ifs);
    if !report.passed() {
        return Err(Error::Validation(report.violations.join("; ")));
    }
    let eps = pow2(-(ell as i64));
    let delta = series_delta(&radius);
    let n_terms = series_terms(&delta, &ifs.rho, &r, &eps).max(1);
    // p with 2^{-p-1} < ε′ from a float log; one extra bit of margin keeps
    // this safe against rounding in the logarithms.
    let base_p = libm::ceil(-series_eps_prime_log2(&radius, &r, &delta, ell)) as i64 + 1;
    let ranges: Vec<QuantRange> = (0..n_terms).map(|h| series_range(&radius, &r, h)).collect();
    let (rn, rd) = small_ratio(&radius)?;
    let (bn, bd) = small_ratio(&r)?;
    for halvings in 0..=8u32 {
        let p = (base_p + halvings as i64).max(0);
        let eps_p = pow2(-p);
        let mant: Vec<Vec<QuantizedReal>> = ifs
            .maps
            .iter()
            .map(|m| {
                let cs = m.coeffs();
                (0..n_terms)
                    .map(|h| quantize(cs.get(h).unwrap_or(&Q::zero()), &ranges[h], &eps_p))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let Some(rt) = check_quantized(quantized_maps(&mant)) else {
            continue;
        };
        let n_bar = depth_for(&max_q(ifs.rho.clone(), rt.clone()), &(&eps / (qi(4) * &radius)))?;
        let mut w = begin(CodecId::Analytic, ell)?;
        write_u(&mut w, ifs.arity() as u64, 8)?;
        write_u(&mut w, n_terms as u64, 16)?;
        for v in [rn, rd, bn, bd] {
            write_u(&mut w, v, 16)?;
        }
        // quantize() used precision_for(2^-p) = p
        write_u(&mut w, p as u64, 16)?;
        write_u(&mut w, n_bar as u64, 16)?;
        write_u(&mut w, GUARD_BITS as u64, 8)?;
        for cs in &mant {
            for (h, c) in cs.iter().enumerate() {
                w.write_big(&c.offset(&ranges[h]), c.bit_cost);
            }
        }
        let params = IfsParams {
            k_const: Q::zero(),
            eps_prime_log2: -(p as f64),
            precision: p,
            n_bar,
            terms: n_terms,
            rho_tilde: rt,
            halvings,
        };
        return Ok((seal(CodecId::Analytic, ell, w), params));
    }
    Err(Error::Fragile)
}

/// A parsed polynomial or series description.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub precision: i64,
    pub n_bar: usize,
    pub guard: u32,
    /// Coefficient mantissas at `2^{-precision}`, constant term first.
    pub coeffs: Vec<Vec<BigInt>>,
}

impl Parsed {
    pub(crate) fn read(r: &mut BitReader<'_>, codec: CodecId) -> Result<Self> {
        let m = r.read(8)? as usize;
        if m < 2 {
            return Err(Error::Format("fewer than two maps".into()));
        }
        let (ranges_per_map, p, n_bar, guard): (Vec<Vec<QuantRange>>, i64, usize, u32);
        if codec == CodecId::Poly {
            let b = read_i8(r)?;
            p = r.read(16)? as i64;
            n_bar = r.read(16)? as usize;
            guard = r.read(8)? as u32;
            let range = QuantRange::symmetric(pow2(b));
            let mut v = Vec::with_capacity(m);
            for _ in 0..m {
                let deg = r.read(8)? as usize;
                v.push(alloc::vec![range.clone(); deg + 1]);
            }
            ranges_per_map = v;
        } else {
            let n_terms = r.read(16)? as usize;
            let mut f = [0u64; 4];
            for x in &mut f {
                *x = r.read(16)?;
            }
            if f[1] == 0 || f[3] == 0 {
                return Err(Error::Format("zero denominator".into()));
            }
            let radius = Q::new(f[0].into(), f[1].into());
            let bound = Q::new(f[2].into(), f[3].into());
            p = r.read(16)? as i64;
            n_bar = r.read(16)? as usize;
            guard = r.read(8)? as u32;
            let ranges: Vec<QuantRange> = (0..n_terms).map(|h| series_range(&radius, &bound, h)).collect();
            ranges_per_map = alloc::vec![ranges; m];
        }
        if guard == 0 {
            return Err(Error::Format("zero guard bits".into()));
        }
        let mut coeffs = Vec::with_capacity(m);
        for ranges in &ranges_per_map {
            let mut cs = Vec::with_capacity(ranges.len());
            for range in ranges {
                let bc = range.bit_cost(p);
                let off = r.read_big(bc)?;
                cs.push(QuantizedReal::from_offset(range, p, off).mantissa);
            }
            coeffs.push(cs);
        }
        Ok(Self { precision: p, n_bar, guard, coeffs })
    }

    pub fn fixed_maps(&self) -> FixedMaps {
        let g = self.guard as u64;
        let coeffs = self.coeffs.iter().map(|cs| cs.iter().map(|c| c << g).collect()).collect();
        FixedMaps::from_mantissas(coeffs, self.precision as u32 + self.guard)
    }

    pub(crate) fn decode(&self, budget: usize) -> Result<FinitePointSet> {
        let fm = self.fixed_maps();
        // the rate argument only feeds the (unused) error bound
        let ls = ifs::level_set_fixed(&fm, &q(1, 2), self.n_bar, budget)?;
        Ok(ls.endpoints)
    }
}

/// Encode, decode and measure against the reference for `ε = 2^{-ℓ}`.
pub fn roundtrip(ifs: &IfsSpec, ell: u32, budget: usize) -> Result<(Description, CodecReport)> {
    let analytic = ifs.maps.iter().any(|m| matches!(m, MapSpec::TruncatedSeries { .. }));
    let (d, params) = if analytic { encode_analytic(ifs, ell)? } else { encode_poly(ifs, ell)? };
    let eps = d.eps();
    let reference = ifs::reference(ifs, &eps, budget)?;
    let dh = super::measure(&d, &reference.sorted_intervals(), budget)?;
    let rep = CodecReport {
        total_bits: d.total_bits,
        dh_achieved: dh,
        reference_error: reference.error_bound.clone(),
        n_bar: params.n_bar,
        params: alloc::vec![
            ("K", format!("{}", params.k_const)),
            ("log2_eps_prime", format!("{:.4}", params.eps_prime_log2)),
            ("p", params.precision.to_string()),
            ("terms", params.terms.to_string()),
            ("rho_tilde", format!("{}", params.rho_tilde)),
            ("halvings", params.halvings.to_string()),
        ],
    };
    Ok((d, rep))
}
