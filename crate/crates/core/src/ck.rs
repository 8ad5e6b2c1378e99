//! Randomized central Cantor sets generated by a scaling function.
//!
//! A node is a word `w = ω_1^m` with `J_w = φ_{ω_m} ∘ … ∘ φ_{ω_1}([0,1])`,
//! so `ω_m` is the top-level choice and `ω_1` the deepest one. Its children
//! are `J_{iw}`, placed at the two ends of `J_w`, with
//! `|J_{iw}| / |J_w| = S̃(w) = ρ + ζ Σ_{q=1}^{m} θ^{q-1} λ_{ω_1^q}`.
//!
//! In level-set order (index `Σ ω_j 2^{j-1}`) the children of index `k`
//! are `2k` and `2k+1`, and `ω_1^{m-1}` is index `k mod 2^{m-1}` one level up.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::ifs::{check_budget, LevelSet, Word};
use crate::numeric::{qi, to_f64, FinitePointSet, Interval};
use crate::random_cantor::LambdaDist;
use crate::rng;
use crate::{invalid, Result, Q};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    pub rho: Q,
    pub theta: Q,
    pub zeta: Q,
    pub seed: u64,
    pub dist: LambdaDist,
}

impl ScalingParams {
    pub fn new(rho: Q, theta: Q, zeta: Q, seed: u64, dist: LambdaDist) -> Result<Self> {
        let one = Q::one();
        if !(rho.is_positive() && rho < theta && theta < one) {
            return invalid("need 0 < ρ < θ < 1");
        }
        if !(zeta.is_positive() && zeta < one) {
            return invalid("need 0 < ζ < 1");
        }
        dist.validate()?;
        if matches!(dist, LambdaDist::Fixed(_)) {
            return invalid("λ family needs a density");
        }
        let p = Self { rho, theta, zeta, seed, dist };
        if p.rho_max() * qi(2) >= one {
            return invalid("ρ + ζ/(1−θ) must stay below 1/2");
        }
        Ok(p)
    }

    /// `ρ + ζ/(1−θ)`, the largest possible ratio.
    pub fn rho_max(&self) -> Q {
        &self.rho + &self.zeta / (Q::one() - &self.theta)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// `k = 1 + log θ / log ρ`.
pub fn smoothness_k(rho: f64, theta: f64) -> Result<f64> {
    if !(0.0 < rho && rho < theta && theta < 1.0) {
        return invalid("need 0 < ρ < θ < 1");
    }
    Ok(1.0 + libm::log(theta) / libm::log(rho))
}

/// One realization: `λ_s` is a pure function of `(seed, s)`, with optional
/// overrides for hand-made perturbations.
#[derive(Debug, Clone, PartialEq)]
pub struct CkCantor {
    pub params: ScalingParams,
    pub overrides: BTreeMap<Vec<u8>, Q>,
}

impl CkCantor {
    pub fn new(params: ScalingParams) -> Self {
        Self { params, overrides: BTreeMap::new() }
    }

    /// Replace `λ_w` (must stay in `(0,1)`).
    pub fn with_override(mut self, w: &[u8], v: Q) -> Result<Self> {
        if !(v.is_positive() && v < Q::one()) {
            return invalid("λ must lie in (0,1)");
        }
        self.overrides.insert(w.to_vec(), v);
        Ok(self)
    }

    pub fn lambda(&self, w: &[u8]) -> Q {
        if let Some(v) = self.overrides.get(w) {
            return v.clone();
        }
        let mut r = rng::stream(self.params.seed, rng::word_stream_id(w));
        self.params.dist.sample(&mut r)
    }

    pub fn smoothness(&self) -> f64 {
        smoothness_k(to_f64(&self.params.rho), to_f64(&self.params.theta)).expect("validated")
    }

    /// Dimension of the ζ = 0 set, `−log 2 / log ρ`.
    pub fn base_dimension(&self) -> f64 {
        -libm::log(2.0) / libm::log(to_f64(&self.params.rho))
    }
}

/// `S̃(ω_1^m)`.
pub fn scaling_value(c: &CkCantor, w: &Word) -> Q {
    let p = &c.params;
    let mut s = Q::zero();
    let mut t = Q::one();
    for q in 1..=w.len() {
        s += &t * c.lambda(&w.0[..q]);
        t *= &p.theta;
    }
    &p.rho + &p.zeta * s
}

fn word_bits(k: usize, m: usize) -> Vec<u8> {
    (0..m).map(|j| ((k >> j) & 1) as u8).collect()
}

/// All levels `0..=n`: intervals in index order and each node's `S̃`.
#[derive(Debug, Clone)]
pub struct CkLevels {
    pub depth: usize,
    pub intervals: Vec<Vec<Interval>>,
    pub ratios: Vec<Vec<Q>>,
}

impl CkLevels {
    pub fn level_set(&self, d: usize) -> LevelSet {
        let iv = self.intervals[d].clone();
        let mut pts = Vec::with_capacity(2 * iv.len());
        for j in &iv {
            pts.push(j.lo.clone());
            pts.push(j.hi.clone());
        }
        LevelSet { depth: d, arity: 2, intervals: iv, endpoints: FinitePointSet::clamped(pts), error_bound: Q::zero() }
    }

    /// Deepest level whose intervals are all shorter than `target`.
    pub fn depth_below(&self, target: &Q) -> Option<usize> {
        (0..=self.depth).find(|&d| self.intervals[d].iter().all(|j| &j.len() < target))
    }
}

pub fn build_ck_levels(c: &CkCantor, n: usize, budget: usize) -> Result<CkLevels> {
    check_budget(2, n, budget)?;
    let p = &c.params;
    let mut intervals = vec![vec![Interval::unit()]];
    // T(ω_1^d) = Σ_{q≤d} θ^{q-1} λ_{ω_1^q}
    let mut sums: Vec<Vec<Q>> = vec![vec![Q::zero()]];
    let mut ratios: Vec<Vec<Q>> = vec![vec![p.rho.clone()]];
    let mut theta_pow = Q::one();
    for d in 1..=n {
        let parents = &intervals[d - 1];
        let mut iv = Vec::with_capacity(2 * parents.len());
        for (k, j) in parents.iter().enumerate() {
            let len = j.len() * &ratios[d - 1][k];
            iv.push(Interval { lo: j.lo.clone(), hi: &j.lo + &len });
            iv.push(Interval { lo: &j.hi - &len, hi: j.hi.clone() });
        }
        let mask = (1usize << (d - 1)) - 1;
        let mut s = Vec::with_capacity(iv.len());
        let mut r = Vec::with_capacity(iv.len());
        for k in 0..iv.len() {
            let t = &sums[d - 1][k & mask] + &theta_pow * c.lambda(&word_bits(k, d));
            r.push(&p.rho + &p.zeta * &t);
            s.push(t);
        }
        theta_pow *= &p.theta;
        intervals.push(iv);
        sums.push(s);
        ratios.push(r);
    }
    Ok(CkLevels { depth: n, intervals, ratios })
}

pub fn build_ck(c: &CkCantor, n: usize, budget: usize) -> Result<LevelSet> {
    Ok(build_ck_levels(c, n, budget)?.level_set(n))
}

/// Common-prefix length and the bracket `[ρ^n, (ρ + ζ/(1−θ))^n]` on `d_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct DsMetric {
    pub prefix: usize,
    pub lower: Q,
    pub upper: Q,
}

pub fn ds_bracket(c: &CkCantor, w: &Word, w2: &Word) -> Result<DsMetric> {
    if w == w2 {
        return invalid("identical words have no bracket");
    }
    let n = w.0.iter().zip(&w2.0).take_while(|(a, b)| a == b).count();
    let lower = num_traits::pow::pow(c.params.rho.clone(), n);
    let upper = num_traits::pow::pow(c.params.rho_max(), n);
    Ok(DsMetric { prefix: n, lower, upper })
}

/// `C = (4 + 2ρ²) sup f`.
pub fn separation_constant(p: &ScalingParams) -> Result<f64> {
    let r = to_f64(&p.rho);
    Ok((4.0 + 2.0 * r * r) * p.dist.sup_density()?)
}

/// `p̄ = ⌊log(Cε/ζ) / log(ρθ)⌋`.
pub fn p_bar(p: &ScalingParams, eps: &Q) -> Result<i64> {
    let c = separation_constant(p)?;
    let v = libm::log(c * to_f64(eps) / to_f64(&p.zeta)) / libm::log(to_f64(&p.rho) * to_f64(&p.theta));
    let pb = libm::floor(v) as i64;
    if pb < 0 {
        return invalid("ε too large: p̄ < 0");
    }
    Ok(pb)
}

/// Looks for a word `σ`, `1 ≤ |σ| ≤ p̄`, with
/// `|λ_σ − λ′_σ| > (ρθ)^{-|σ|} (4+2ρ²) ε / ζ`. The empty word is skipped:
/// `λ_♯` never enters `S̃` and cannot separate anything.
pub fn separation_event(c: &CkCantor, c2: &CkCantor, eps: &Q) -> Result<Option<Word>> {
    let p = &c.params;
    let (p2, pb) = (&c2.params, p_bar(p, eps)?);
    if (&p.rho, &p.theta, &p.zeta) != (&p2.rho, &p2.theta, &p2.zeta) {
        return invalid("realizations must share ρ, θ, ζ");
    }
    let base = (qi(4) + qi(2) * &p.rho * &p.rho) * eps / &p.zeta;
    let rt = &p.rho * &p.theta;
    let mut thr = base;
    for m in 1..=pb.min(20) as usize {
        thr /= &rt;
        if thr >= Q::one() {
            // |Δλ| < 1 can never exceed it at this or deeper levels
            break;
        }
        for k in 0..1usize << m {
            let w = word_bits(k, m);
            if (c.lambda(&w) - c2.lambda(&w)).abs() > thr {
                return Ok(Some(Word(w)));
            }
        }
    }
    Ok(None)
}

/// Checks `|J_{iw}| = S̃(w)|J_w|` exactly at `nodes` pseudo-random nodes of
/// `levels` (node choice from stream `u64::MAX − 1`); returns the number of
/// violations.
pub fn ratio_violations(c: &CkCantor, levels: &CkLevels, nodes: usize) -> usize {
    let mut r = rng::stream(c.params.seed, u64::MAX - 1);
    let mut bad = 0;
    for _ in 0..nodes {
        let d = (rng::unit_f64(&mut r) * levels.depth as f64) as usize;
        let k = (rng::unit_f64(&mut r) * (1usize << d) as f64) as usize;
        let s = scaling_value(c, &Word(word_bits(k, d)));
        let parent = levels.intervals[d][k].len();
        for i in 0..2 {
            if levels.intervals[d + 1][2 * k + i].len() != &s * &parent {
                bad += 1;
            }
        }
        if s < c.params.rho || s > c.params.rho_max() {
            bad += 1;
        }
    }
    bad
}

/// Certified lower bound on `d_H` of two sets given by level-`m`
/// endpoints (points of the sets) and intervals (covers).
pub fn dh_lower_bound(a: &LevelSet, b: &LevelSet) -> Q {
    let da = crate::numeric::directed_to_intervals(a.endpoints.points(), &b.intervals);
    let db = crate::numeric::directed_to_intervals(b.endpoints.points(), &a.intervals);
    crate::numeric::max_q(da, db)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::numeric::{hausdorff_vs_intervals, pow2, q};

    const B: usize = 1 << 22;

    pub(crate) fn params(zeta: Q, seed: u64) -> ScalingParams {
        ScalingParams::new(q(1, 4), q(1, 2), zeta, seed, LambdaDist::Uniform { a: qi(0), b: qi(1) }).unwrap()
    }

    fn halves(zeta: Q) -> CkCantor {
        // every λ pinned to 1/2 through a degenerate uniform window
        let p = ScalingParams::new(q(1, 4), q(1, 2), zeta, 0, LambdaDist::Uniform { a: q(1, 2), b: q(1, 2) + pow2(-60) });
        CkCantor::new(p.unwrap())
    }

    #[test]
    fn scaling_examples() {
        let c = halves(q(1, 10));
        let s = scaling_value(&c, &Word(vec![0, 1]));
        assert!((to_f64(&s) - 0.325).abs() < 1e-15);
        assert_eq!(scaling_value(&c, &Word::empty()), q(1, 4));
        let c = CkCantor::new(params(q(1, 20), 9));
        for k in 0..64 {
            let s = scaling_value(&c, &Word(word_bits(k, 6)));
            assert!(s >= q(1, 4) && s <= c.params.rho_max());
        }
    }

    #[test]
    fn build_examples() {
        // ζ = 0 is outside the parameter domain; tiny ζ approaches ratio ρ
        assert!(ScalingParams::new(q(1, 4), q(1, 2), qi(0), 0, LambdaDist::Uniform { a: qi(0), b: qi(1) }).is_err());
        let c = CkCantor::new(params(q(1, 20), 1));
        let l1 = build_ck(&c, 1, B).unwrap();
        assert_eq!(l1.intervals[0], Interval { lo: qi(0), hi: q(1, 4) });
        assert_eq!(l1.intervals[1], Interval { lo: q(3, 4), hi: qi(1) });
        assert!(ScalingParams::new(q(1, 4), q(1, 2), q(1, 8), 0, LambdaDist::Uniform { a: qi(0), b: qi(1) }).is_err());
    }

    #[test]
    fn ratio_identity_holds_exactly() {
        let c = CkCantor::new(params(q(1, 20), 4));
        let levels = build_ck_levels(&c, 14, B).unwrap();
        assert_eq!(ratio_violations(&c, &levels, 1000), 0);
        let ls = levels.level_set(14);
        assert!(ls.intervals.windows(2).all(|w| w[0].hi < w[1].lo));
    }

    #[test]
    fn smoothness_examples() {
        assert!((smoothness_k(0.25, 0.5).unwrap() - 1.5).abs() < 1e-15);
        assert!(smoothness_k(0.25, 0.25).is_err());
        assert!(smoothness_k(0.25, 1.0 - 1e-9).unwrap() < 1.0 + 1e-7);
    }

    #[test]
    fn bracket_examples() {
        let c = CkCantor::new(params(q(1, 20), 0));
        let b = ds_bracket(&c, &Word(vec![0, 0]), &Word(vec![0, 1])).unwrap();
        assert_eq!((b.prefix, b.lower.clone(), b.upper.clone()), (1, q(1, 4), c.params.rho_max()));
        let b0 = ds_bracket(&c, &Word(vec![0]), &Word(vec![1])).unwrap();
        assert_eq!((b0.lower, b0.upper), (qi(1), qi(1)));
        assert!(ds_bracket(&c, &Word(vec![1]), &Word(vec![1])).is_err());
        let deep = ds_bracket(&c, &Word(vec![0, 0, 0, 1]), &Word(vec![0, 0, 0, 0])).unwrap();
        assert!(deep.upper < b.upper);
    }

    #[test]
    fn separation_examples() {
        let eps = pow2(-12);
        let c = CkCantor::new(params(q(1, 20), 3));
        assert_eq!(separation_event(&c, &c, &eps).unwrap(), None);
        // push λ_(0) by twice the level-1 threshold
        let thr = (qi(4) + qi(2) * q(1, 16)) * &eps / q(1, 20) / q(1, 8);
        let l0 = c.lambda(&[0]);
        let moved = if l0 < q(1, 2) { &l0 + &thr * qi(2) } else { &l0 - &thr * qi(2) };
        let c2 = c.clone().with_override(&[0], moved).unwrap();
        assert_eq!(separation_event(&c, &c2, &eps).unwrap(), Some(Word(vec![0])));
        let a = build_ck_levels(&c, 12, B).unwrap();
        let b = build_ck_levels(&c2, 12, B).unwrap();
        let m = a.depth_below(&(&eps / qi(4))).unwrap().max(b.depth_below(&(&eps / qi(4))).unwrap());
        assert!(dh_lower_bound(&a.level_set(m), &b.level_set(m)) > eps);
        // sub-threshold everywhere
        let c3 = c.clone().with_override(&[1], c.lambda(&[1]) + &thr / qi(4)).unwrap();
        assert_eq!(separation_event(&c, &c3, &eps).unwrap(), None);
        assert!(p_bar(&c.params, &q(1, 2)).is_err());
    }

    #[test]
    fn lower_bound_is_sound() {
        let eps = pow2(-10);
        for seed in 0..4 {
            let a = build_ck_levels(&CkCantor::new(params(q(1, 20), seed)), 11, B).unwrap();
            let b = build_ck_levels(&CkCantor::new(params(q(1, 20), seed + 50)), 11, B).unwrap();
            let lb = dh_lower_bound(&a.level_set(8), &b.level_set(8));
            let deep = hausdorff_vs_intervals(&a.level_set(11).endpoints, &b.level_set(11).intervals).unwrap();
            assert!(lb <= deep + &eps);
        }
    }
}
