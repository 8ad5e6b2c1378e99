//! Random central Cantor sets: at level `k` every interval keeps two end
//! pieces of relative length `λ_k/2` and loses its centre, so all level-`k`
//! intervals have length `L_k = 2^{-k} Π_{h≤k} λ_h`.
//!
//! Also the audits that the lower-bound argument relies on (typical rate
//! `γ`, the sets `Λ_n` and `Ψ_q`) and a sound separation probe.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::numeric::{max_q, pow2, qi, separation_test, to_f64, FinitePointSet, HoleConfig, Interval};
use crate::rng;
use crate::{invalid, Error, Result, Q};

#[derive(Debug, Clone, PartialEq)]
pub enum LambdaDist {
    /// Uniform on `(a, b) ⊂ (0,1)`.
    Uniform { a: Q, b: Q },
    /// Beta(α, β) restricted to `[a, b]` and renormalized.
    TruncBeta { alpha: f64, beta: f64, a: Q, b: Q },
    /// Point mass; usable for deterministic constructions, rejected
    /// wherever the density hypothesis matters.
    Fixed(Q),
}

fn beta_kernel(alpha: f64, beta: f64, x: f64) -> f64 {
    libm::pow(x, alpha - 1.0) * libm::pow(1.0 - x, beta - 1.0)
}

impl LambdaDist {
    pub fn validate(&self) -> Result<()> {
        let unit = |a: &Q, b: &Q| !a.is_negative() && a < b && b <= &Q::one();
        match self {
            LambdaDist::Uniform { a, b } => {
                if !unit(a, b) {
                    return invalid("uniform(a,b) needs 0 ≤ a < b ≤ 1");
                }
            }
            LambdaDist::TruncBeta { alpha, beta, a, b } => {
                if !unit(a, b) || !(*alpha > 0.0 && *beta > 0.0) {
                    return invalid("truncated beta needs α, β > 0 and 0 ≤ a < b ≤ 1");
                }
                if (a.is_zero() && *alpha != 1.0) || (b == &Q::one() && *beta != 1.0) {
                    return invalid("density not bounded away from 0 and ∞ on its support");
                }
            }
            LambdaDist::Fixed(v) => {
                if !(v.is_positive() && v < &Q::one()) {
                    return invalid("fixed λ must lie in (0,1)");
                }
            }
        }
        Ok(())
    }

    fn support(&self) -> (f64, f64) {
        match self {
            LambdaDist::Uniform { a, b } | LambdaDist::TruncBeta { a, b, .. } => (to_f64(a), to_f64(b)),
            LambdaDist::Fixed(v) => (to_f64(v), to_f64(v)),
        }
    }

    fn beta_max(alpha: f64, beta: f64, lo: f64, hi: f64) -> f64 {
        let mut m = beta_kernel(alpha, beta, lo).max(beta_kernel(alpha, beta, hi));
        if alpha > 1.0 && beta > 1.0 {
            let mode = (alpha - 1.0) / (alpha + beta - 2.0);
            if lo < mode && mode < hi {
                m = m.max(beta_kernel(alpha, beta, mode));
            }
        }
        m
    }

    /// `sup f` of the normalized density (Simpson rule for the beta mass).
    pub fn sup_density(&self) -> Result<f64> {
        match self {
            LambdaDist::Uniform { .. } => {
                let (a, b) = self.support();
                Ok(1.0 / (b - a))
            }
            LambdaDist::TruncBeta { alpha, beta, .. } => {
                let (a, b) = self.support();
                let n = 20_000;
                let h = (b - a) / n as f64;
                let mut s = 0.0;
                for i in 0..=n {
                    let x = (a + i as f64 * h).clamp(a + 1e-12, b - 1e-12);
                    let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    s += w * beta_kernel(*alpha, *beta, x);
                }
                let mass = s * h / 3.0;
                Ok(Self::beta_max(*alpha, *beta, a, b) / mass)
            }
            LambdaDist::Fixed(_) => invalid("point mass has no bounded density"),
        }
    }

    /// One draw from `rng`, as an exact rational.
    pub fn sample(&self, r: &mut rand_chacha::ChaCha20Rng) -> Q {
        match self {
            LambdaDist::Uniform { a, b } => a + (b - a) * rng::unit_dyadic(r),
            LambdaDist::TruncBeta { alpha, beta, a, b } => {
                let (lo, hi) = self.support();
                let fmax = Self::beta_max(*alpha, *beta, lo, hi);
                loop {
                    let u = rng::unit_dyadic(r);
                    let x = a + (b - a) * &u;
                    let v = rng::unit_f64(r);
                    if v * fmax <= beta_kernel(*alpha, *beta, to_f64(&x)) {
                        return x;
                    }
                }
            }
            LambdaDist::Fixed(v) => v.clone(),
        }
    }
}

/// `λ_1, λ_2, …` drawn independently; `λ_k` comes from ChaCha stream `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaStream {
    pub seed: u64,
    pub dist: LambdaDist,
}

impl LambdaStream {
    pub fn new(seed: u64, dist: LambdaDist) -> Result<Self> {
        dist.validate()?;
        Ok(Self { seed, dist })
    }

    /// `λ_k`, `k ≥ 1`.
    pub fn value(&self, k: usize) -> Q {
        let mut r = rng::stream(self.seed, k as u64);
        self.dist.sample(&mut r)
    }

    pub fn values(&self, n: usize) -> Vec<Q> {
        (1..=n).map(|k| self.value(k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaEstimate {
    pub gamma: f64,
    /// 95% interval for Monte Carlo estimates; `None` when closed form.
    pub ci: Option<(f64, f64)>,
}

/// `γ = ∫ log x f(x) dx`.
pub fn gamma_of(dist: &LambdaDist) -> Result<GammaEstimate> {
    dist.validate()?;
    match dist {
        LambdaDist::Uniform { .. } => {
            let (a, b) = dist.support();
            let xlx = |x: f64| if x == 0.0 { 0.0 } else { x * (libm::log(x) - 1.0) };
            Ok(GammaEstimate { gamma: (xlx(b) - xlx(a)) / (b - a), ci: None })
        }
        LambdaDist::TruncBeta { .. } => {
            let n = 200_000u32;
            let mut r = rng::stream(0x9a11_a5ee_d000_0001, u64::MAX);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let v = libm::log(to_f64(&dist.sample(&mut r)));
                s += v;
                s2 += v * v;
            }
            let mean = s / n as f64;
            let sd = libm::sqrt((s2 / n as f64 - mean * mean).max(0.0));
            let half = 1.96 * sd / libm::sqrt(n as f64);
            Ok(GammaEstimate { gamma: mean, ci: Some((mean - half, mean + half)) })
        }
        LambdaDist::Fixed(_) => invalid("point mass forbidden: density must be bounded above and below"),
    }
}

/// Default slack `η = |γ|/10`.
pub fn default_eta(gamma: f64) -> f64 {
    gamma.abs() / 10.0
}

/// `N(ε) = min{n : (2e^{η−γ})^n ε > (log 1/ε)^{-2}}`.
pub fn n_of_eps(eps: f64, gamma: f64, eta: f64) -> usize {
    let base = libm::log(2.0) + eta - gamma;
    let rhs = -2.0 * libm::log(libm::log(1.0 / eps)) - libm::log(eps);
    // n·base > rhs
    let mut n = 0usize;
    while (n as f64) * base <= rhs {
        n += 1;
    }
    n
}

/// Interval lengths `L_0 = 1, L_k = L_{k-1} λ_k / 2`.
pub fn level_lengths(lambdas: &[Q]) -> Vec<Q> {
    let mut v = Vec::with_capacity(lambdas.len() + 1);
    v.push(Q::one());
    for l in lambdas {
        let next = v.last().expect("non-empty") * l / qi(2);
        v.push(next);
    }
    v
}

/// All levels `0..=n` of a central construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralLevels {
    pub depth: usize,
    pub lambdas: Vec<Q>,
    /// `L_k` for `k = 0..=depth`.
    pub lengths: Vec<Q>,
    /// Left endpoints per level, increasing.
    pub lefts: Vec<Vec<Q>>,
}

impl CentralLevels {
    pub fn intervals(&self, k: usize) -> Vec<Interval> {
        let l = &self.lengths[k];
        self.lefts[k].iter().map(|x| Interval { lo: x.clone(), hi: x + l }).collect()
    }

    pub fn endpoints(&self, k: usize) -> FinitePointSet {
        let l = &self.lengths[k];
        let mut pts = Vec::with_capacity(2 * self.lefts[k].len());
        for x in &self.lefts[k] {
            pts.push(x.clone());
            pts.push(x + l);
        }
        FinitePointSet::new(pts).expect("central endpoints lie in [0,1]")
    }
}

pub fn build_central(lambdas: &[Q], n: usize, budget: usize) -> Result<CentralLevels> {
    if n < 1 {
        return invalid("depth must be at least 1");
    }
    if lambdas.len() < n {
        return invalid("not enough λ values for the requested depth");
    }
    if lambdas[..n].iter().any(|l| !(l.is_positive() && l < &Q::one())) {
        return invalid("λ values must lie in (0,1)");
    }
    crate::ifs::check_budget(2, n, budget)?;
    let lengths = level_lengths(&lambdas[..n]);
    let mut lefts = vec![vec![Q::zero()]];
    for k in 1..=n {
        let shift = &lengths[k - 1] - &lengths[k];
        let prev = &lefts[k - 1];
        let mut next = Vec::with_capacity(2 * prev.len());
        for x in prev {
            next.push(x.clone());
            next.push(x + &shift);
        }
        lefts.push(next);
    }
    Ok(CentralLevels { depth: n, lambdas: lambdas[..n].to_vec(), lengths, lefts })
}

/// Smallest depth whose intervals are shorter than `target`, i.e. the
/// reference level whose union is within `target` of the set.
pub fn depth_below(stream: &LambdaStream, target: &Q, max_depth: usize) -> Result<usize> {
    let mut l = Q::one();
    for k in 1..=max_depth {
        l = l * stream.value(k) / qi(2);
        if &l < target {
            return Ok(k);
        }
    }
    Err(Error::Budget { needed: 1u128 << max_depth.min(120), limit: max_depth })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditResult {
    pub gamma: f64,
    pub eta: f64,
    pub in_lambda_n: bool,
    /// First `k` with `Π λ_h ≤ e^{k(γ−η)}`.
    pub lambda_violation: Option<usize>,
    pub in_psi_q: bool,
    /// First `k` with `(1−λ_{k+1}) Π λ_h / 2^k ≤ 2^{2−q}`.
    pub psi_violation: Option<usize>,
    /// `N(2^{-q})`.
    pub n_q: usize,
}

/// Membership in `Λ_n` (log-space comparison in `f64`; `e^x` has no exact
/// rational value) and in `Ψ_q` (exact rationals).
pub fn audit(stream: &LambdaStream, gamma: f64, n: usize, eta: f64, qq: u32) -> Result<AuditResult> {
    if eta <= 0.0 {
        return invalid("η must be positive");
    }
    let n_q = n_of_eps(libm::exp2(-(qq as f64)), gamma, eta);
    let need = n.max(n_q + 1);
    let lam = stream.values(need);

    let mut lambda_violation = None;
    let start = (libm::floor(libm::sqrt(n as f64)) as usize).max(1);
    let mut logp = 0.0;
    for k in 1..=n {
        logp += libm::log(to_f64(&lam[k - 1]));
        if k >= start && logp <= k as f64 * (gamma - eta) {
            lambda_violation = Some(k);
            break;
        }
    }

    let mut psi_violation = None;
    let thr = pow2(2 - qq as i64);
    let mut prod = Q::one(); // Π_{h≤k} λ_h / 2^k
    for (k, l) in lam.iter().enumerate().take(n_q + 1) {
        if (Q::one() - l) * &prod <= thr {
            psi_violation = Some(k);
            break;
        }
        prod = prod * l / qi(2);
    }
    Ok(AuditResult {
        gamma,
        eta,
        in_lambda_n: lambda_violation.is_none(),
        lambda_violation,
        in_psi_q: psi_violation.is_none(),
        psi_violation,
        n_q,
    })
}

/// Whether `λ̃` lies in the tube `M_{ε,N}(λ)` (only the coordinate
/// constraints; `Ψ` membership is audited separately).
pub fn in_tube(lam: &[Q], lt: &[Q], eps: f64, n: usize, gamma: f64, eta: f64) -> bool {
    let e = libm::exp(eta - gamma);
    let rn = libm::floor(libm::sqrt(n as f64)) as usize;
    for k in 1..=n.min(lam.len()).min(lt.len()) {
        let d = to_f64(&(&lam[k - 1] - &lt[k - 1]).abs());
        let bound = if k == 1 {
            2.0 * eps
        } else if k < rn {
            libm::exp2(k as f64 + 1.0) * libm::pow(e, libm::sqrt(n as f64)) * eps
        } else {
            2.0 / e * libm::pow(2.0 * e, k as f64) * eps
        };
        if d >= bound {
            return false;
        }
    }
    true
}

/// Hole configuration of the leftmost level-`k` interval: outer
/// `[0, L_{k-1}]`, hole `[L_k, L_{k-1} − L_k]`.
pub fn leftmost_hole(lengths: &[Q], k: usize) -> Option<HoleConfig> {
    let outer = Interval { lo: Q::zero(), hi: lengths[k - 1].clone() };
    let hole = Interval { lo: lengths[k].clone(), hi: &lengths[k - 1] - &lengths[k] };
    HoleConfig::new(outer, hole).ok()
}

/// Outcome of a probe: the level whose holes certify `d_H > ε`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub level: usize,
}

/// Looks for a hole certificate of `d_H(C_λ, C_λ′) > ε` at the leftmost
/// intervals of levels `1..=N(ε)`, after ruling out the tube `M(λ)` where
/// the argument does not apply. Sound, not complete.
pub fn separation_probe(lam: &[Q], lt: &[Q], eps: &Q, gamma: f64, eta: f64) -> Option<Certificate> {
    let e = to_f64(eps);
    let n = n_of_eps(e, gamma, eta);
    if lam.len() < n || lt.len() < n {
        return None;
    }
    if in_tube(lam, lt, e, n, gamma, eta) {
        return None;
    }
    let la = level_lengths(&lam[..n]);
    let lb = level_lengths(&lt[..n]);
    for k in 1..=n {
        let (Some(f), Some(g)) = (leftmost_hole(&la, k), leftmost_hole(&lb, k)) else {
            continue;
        };
        if separation_test(&f, &g, eps).unwrap_or(false) {
            return Some(Certificate { level: k });
        }
    }
    None
}

/// Certified lower bound on `d_H(C_λ, C_λ′)` from level `m`: endpoints
/// lie in their set and the level-`m` intervals cover theirs, so directed
/// endpoint-to-union distances bound the true distance from below.
pub fn dh_lower_bound(a: &CentralLevels, b: &CentralLevels, m: usize) -> Q {
    let (ea, eb) = (a.endpoints(m), b.endpoints(m));
    let (ja, jb) = (a.intervals(m), b.intervals(m));
    max_q(
        crate::numeric::directed_to_intervals(ea.points(), &jb),
        crate::numeric::directed_to_intervals(eb.points(), &ja),
    )
}

/// Same bound in `f64` (used to screen pairs before exact confirmation).
pub fn dh_lower_bound_f64(lefts_a: &[f64], la: f64, lefts_b: &[f64], lb: f64) -> f64 {
    fn dir(pa: &[f64], la: f64, pb: &[f64], lb: f64) -> f64 {
        let mut best: f64 = 0.0;
        let mut j = 0;
        for x0 in pa {
            for x in [*x0, x0 + la] {
                while j + 1 < pb.len() && pb[j + 1] <= x {
                    j += 1;
                }
                let (lo, hi) = (pb[j], pb[j] + lb);
                let mut d = if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    0.0
                };
                if x > hi && j + 1 < pb.len() {
                    d = d.min(pb[j + 1] - x);
                }
                best = best.max(d);
            }
        }
        best
    }
    dir(lefts_a, la, lefts_b, lb).max(dir(lefts_b, lb, lefts_a, la))
}

/// `q(1,2)` helper for tests and callers building constant sequences.
pub fn constant(v: Q, n: usize) -> Vec<Q> {
    vec![v; n]
}
