//! Greedy ε-separated families of random realizations: an empirical lower
//! bound proxy for the description length. A pair counts as separated only
//! when a certified lower bound on `d_H` exceeds `ε`; certificates from the
//! hole and scaling separation tests are tallied and checked against that bound.

use alloc::vec::Vec;

use num_traits::One;

use crate::ck::{build_ck_levels, separation_event, CkCantor, CkLevels, ScalingParams};
use crate::numeric::{cover_lower_bound, pow2, to_f64, Interval, ScaledIntervals};
use crate::random_cantor::{
    build_central, default_eta, dh_lower_bound_f64, gamma_of, n_of_eps, separation_probe, LambdaDist, LambdaStream,
};
use crate::{invalid, Result, Q};

/// Levels below the separation scale used for measured lower bounds: the
/// slack `d_H − LB` is at most twice the interval length there.
pub const MEASURE_MARGIN_BITS: u32 = 8;

/// A family of random sets indexed by trial number.
pub trait PackFamily {
    type Member;
    fn member(&self, trial: u64, eps: &Q) -> Result<Self::Member>;
    /// A (sound, incomplete) certificate of `d_H > ε`.
    fn certify(&self, a: &Self::Member, b: &Self::Member, eps: &Q) -> bool;
    /// Fast floating-point estimate of the certified lower bound.
    fn screen(&self, a: &Self::Member, b: &Self::Member) -> f64;
    /// Exact certified lower bound on `d_H`.
    fn lower_bound(&self, a: &Self::Member, b: &Self::Member) -> Q;
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PackingReport {
    pub trials: u64,
    pub size: usize,
    pub pairs_checked: u64,
    pub certificates: u64,
    pub confirmed: u64,
    /// Certificates whose pair the measured bound did not confirm.
    pub unconfirmed: u64,
}

impl PackingReport {
    pub fn log2_size(&self) -> f64 {
        libm::log2(self.size.max(1) as f64)
    }
}

/// Greedy extraction in trial order: a realization joins the family when it
/// is certified-separated from every member already in it.
pub fn packing_estimate<F: PackFamily>(fam: &F, eps: &Q, trials: u64) -> Result<PackingReport> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let e = to_f64(eps);
    let mut rep = PackingReport { trials, ..Default::default() };
    let mut kept: Vec<F::Member> = Vec::new();
    for t in 0..trials {
        let m = fam.member(t, eps)?;
        let mut ok = true;
        for a in &kept {
            rep.pairs_checked += 1;
            let cert = fam.certify(a, &m, eps);
            if !cert && fam.screen(a, &m) < e * (1.0 - 1e-9) {
                ok = false;
                break;
            }
            let sep = fam.lower_bound(a, &m) > *eps;
            if cert {
                rep.certificates += 1;
                if sep {
                    rep.confirmed += 1;
                } else {
                    rep.unconfirmed += 1;
                }
            }
            if !sep {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(m);
        }
    }
    rep.size = kept.len();
    Ok(rep)
}

/// Random central sets with i.i.d. `λ_k`; trial `t` uses seed `base + t`.
#[derive(Debug, Clone)]
pub struct CentralFamily {
    pub base_seed: u64,
    pub dist: LambdaDist,
    pub gamma: f64,
    pub eta: f64,
}

impl CentralFamily {
    pub fn new(base_seed: u64, dist: LambdaDist) -> Result<Self> {
        let gamma = gamma_of(&dist)?.gamma;
        Ok(Self { base_seed, dist, gamma, eta: default_eta(gamma) })
    }
}

pub struct CentralMember {
    lambdas: Vec<Q>,
    cover: ScaledIntervals,
    lefts_f: Vec<f64>,
    len_f: f64,
}

impl PackFamily for CentralFamily {
    type Member = CentralMember;

    fn member(&self, trial: u64, eps: &Q) -> Result<CentralMember> {
        let s = LambdaStream::new(self.base_seed.wrapping_add(trial), self.dist.clone())?;
        let target = eps * pow2(-(MEASURE_MARGIN_BITS as i64));
        let m = crate::random_cantor::depth_below(&s, &target, 60)?;
        let n = n_of_eps(to_f64(eps), self.gamma, self.eta).max(m);
        let lambdas = s.values(n);
        let lv = build_central(&lambdas, m, usize::MAX)?;
        let cover = ScaledIntervals::new(&lv.intervals(m));
        let lefts_f = lv.lefts[m].iter().map(to_f64).collect();
        Ok(CentralMember { lambdas, cover, lefts_f, len_f: to_f64(&lv.lengths[m]) })
    }

    fn certify(&self, a: &CentralMember, b: &CentralMember, eps: &Q) -> bool {
        separation_probe(&a.lambdas, &b.lambdas, eps, self.gamma, self.eta).is_some()
    }

    fn screen(&self, a: &CentralMember, b: &CentralMember) -> f64 {
        dh_lower_bound_f64(&a.lefts_f, a.len_f, &b.lefts_f, b.len_f)
    }

    fn lower_bound(&self, a: &CentralMember, b: &CentralMember) -> Q {
        cover_lower_bound(&a.cover, &b.cover)
    }
}

/// C^k realizations sharing `(ρ, θ, ζ, dist)`; trial `t` uses seed `base + t`.
#[derive(Debug, Clone)]
pub struct CkFamily {
    pub params: ScalingParams,
}

pub struct CkMember {
    cantor: CkCantor,
    cover: ScaledIntervals,
    ends_f: Vec<f64>,
    iv_f: Vec<(f64, f64)>,
}

fn dir_f64(pts: &[f64], iv: &[(f64, f64)]) -> f64 {
    let mut best: f64 = 0.0;
    let mut j = 0;
    for &x in pts {
        while j + 1 < iv.len() && iv[j + 1].0 <= x {
            j += 1;
        }
        let (lo, hi) = iv[j];
        let mut d = if x < lo { lo - x } else if x > hi { x - hi } else { 0.0 };
        if x > hi && j + 1 < iv.len() {
            d = d.min(iv[j + 1].0 - x);
        }
        best = best.max(d);
    }
    best
}

impl PackFamily for CkFamily {
    type Member = CkMember;

    fn member(&self, trial: u64, eps: &Q) -> Result<CkMember> {
        let cantor = CkCantor::new(self.params.with_seed(self.params.seed.wrapping_add(trial)));
        let target = eps * pow2(-(MEASURE_MARGIN_BITS as i64));
        // ρ_max^m < target
        let (r, mut x, mut m) = (self.params.rho_max(), Q::one(), 0usize);
        while x >= target {
            x *= &r;
            m += 1;
        }
        let lv: CkLevels = build_ck_levels(&cantor, m, usize::MAX)?;
        let intervals = &lv.intervals[m];
        let ends_f = intervals.iter().flat_map(|j| [to_f64(&j.lo), to_f64(&j.hi)]).collect();
        let iv_f = intervals.iter().map(|j| (to_f64(&j.lo), to_f64(&j.hi))).collect();
        Ok(CkMember { cantor, cover: ScaledIntervals::new(intervals), ends_f, iv_f })
    }

    fn certify(&self, a: &CkMember, b: &CkMember, eps: &Q) -> bool {
        matches!(separation_event(&a.cantor, &b.cantor, eps), Ok(Some(_)))
    }

    fn screen(&self, a: &CkMember, b: &CkMember) -> f64 {
        dir_f64(&a.ends_f, &b.iv_f).max(dir_f64(&b.ends_f, &a.iv_f))
    }

    fn lower_bound(&self, a: &CkMember, b: &CkMember) -> Q {
        cover_lower_bound(&a.cover, &b.cover)
    }
}

/// A fixed list of interval unions, cycled by trial number.
pub struct FixedFamily(pub Vec<Vec<Interval>>);

impl PackFamily for FixedFamily {
    type Member = Vec<Interval>;

    fn member(&self, trial: u64, _eps: &Q) -> Result<Vec<Interval>> {
        Ok(self.0[trial as usize % self.0.len()].clone())
    }
    fn certify(&self, _: &Vec<Interval>, _: &Vec<Interval>, _: &Q) -> bool {
        false
    }
    fn screen(&self, a: &Vec<Interval>, b: &Vec<Interval>) -> f64 {
        to_f64(&self.lower_bound(a, b))
    }
    fn lower_bound(&self, a: &Vec<Interval>, b: &Vec<Interval>) -> Q {
        cover_lower_bound(&ScaledIntervals::new(a), &ScaledIntervals::new(b))
    }
}

/// `ℓ ↦ log2` packing for `ε = 2^{-ℓ}`.
pub fn packing_curve<F: PackFamily>(fam: &F, ells: &[u32], trials: u64) -> Result<Vec<(u32, PackingReport)>> {
    ells.iter().map(|&l| Ok((l, packing_estimate(fam, &pow2(-(l as i64)), trials)?))).collect()
}
