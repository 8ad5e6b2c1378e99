//! JSON input documents. Rationals are written as `"p/q"` (or `"n"`)
//! strings so that no coefficient ever passes through a float.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use edc_core::ck::{CkCantor, ScalingParams};
use edc_core::ifs::{IfsSpec, MapSpec};
use edc_core::random_cantor::{LambdaDist, LambdaStream};
use edc_core::Q;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// An exact rational in `"p/q"` text form.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Rat(pub Q);

impl TryFrom<String> for Rat {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        parse_q(&s).map(Rat)
    }
}

impl From<Rat> for String {
    fn from(r: Rat) -> String {
        r.0.to_string()
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn parse_q(s: &str) -> Result<Q, String> {
    let t = s.trim();
    let q = if t.contains('/') { Q::from_str(t) } else { Q::from_str(&format!("{t}/1")) };
    q.map_err(|_| format!("not a rational: {s:?}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MapDoc {
    Affine { a: Rat, b: Rat },
    Polynomial { coeffs: Vec<Rat> },
    Series { coeffs: Vec<Rat>, radius: Rat, bound: Rat },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DistDoc {
    Uniform { a: Rat, b: Rat },
    Beta { alpha: f64, beta: f64, a: Rat, b: Rat },
    Fixed { value: Rat },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputDoc {
    Ifs { rho: Rat, maps: Vec<MapDoc> },
    RandCentral { seed: u64, dist: DistDoc },
    Ck { rho: Rat, theta: Rat, zeta: Rat, seed: u64, dist: DistDoc },
}

impl MapDoc {
    pub fn to_spec(&self) -> MapSpec {
        let v = |c: &[Rat]| c.iter().map(|r| r.0.clone()).collect();
        match self {
            MapDoc::Affine { a, b } => MapSpec::Affine { a: a.0.clone(), b: b.0.clone() },
            MapDoc::Polynomial { coeffs } => MapSpec::Polynomial { coeffs: v(coeffs) },
            MapDoc::Series { coeffs, radius, bound } => {
                MapSpec::TruncatedSeries { coeffs: v(coeffs), radius: radius.0.clone(), bound: bound.0.clone() }
            }
        }
    }

    pub fn from_spec(m: &MapSpec) -> Self {
        let v = |c: &[Q]| c.iter().map(|x| Rat(x.clone())).collect();
        match m {
            MapSpec::Affine { a, b } => MapDoc::Affine { a: Rat(a.clone()), b: Rat(b.clone()) },
            MapSpec::Polynomial { coeffs } => MapDoc::Polynomial { coeffs: v(coeffs) },
            MapSpec::TruncatedSeries { coeffs, radius, bound } => {
                MapDoc::Series { coeffs: v(coeffs), radius: Rat(radius.clone()), bound: Rat(bound.clone()) }
            }
        }
    }
}

impl DistDoc {
    pub fn to_dist(&self) -> LambdaDist {
        match self {
            DistDoc::Uniform { a, b } => LambdaDist::Uniform { a: a.0.clone(), b: b.0.clone() },
            DistDoc::Beta { alpha, beta, a, b } => {
                LambdaDist::TruncBeta { alpha: *alpha, beta: *beta, a: a.0.clone(), b: b.0.clone() }
            }
            DistDoc::Fixed { value } => LambdaDist::Fixed(value.0.clone()),
        }
    }

    /// `uniform:a,b`, `beta:α,β,a,b` or `fixed:v`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("bad distribution {s:?}"))?;
        let parts: Vec<&str> = rest.split(',').collect();
        let f = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
        match (kind, parts.as_slice()) {
            ("uniform", [a, b]) => Ok(DistDoc::Uniform { a: Rat(parse_q(a)?), b: Rat(parse_q(b)?) }),
            ("beta", [al, be, a, b]) => {
                Ok(DistDoc::Beta { alpha: f(al)?, beta: f(be)?, a: Rat(parse_q(a)?), b: Rat(parse_q(b)?) })
            }
            ("fixed", [v]) => Ok(DistDoc::Fixed { value: Rat(parse_q(v)?) }),
            _ => Err(format!("bad distribution {s:?}")),
        }
    }
}

impl InputDoc {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn ifs(&self) -> Result<IfsSpec, CliError> {
        match self {
            InputDoc::Ifs { rho, maps } => Ok(IfsSpec::new(maps.iter().map(MapDoc::to_spec).collect(), rho.0.clone())?),
            _ => Err(CliError::Usage("input is not an IFS".into())),
        }
    }

    pub fn stream(&self) -> Result<LambdaStream, CliError> {
        match self {
            InputDoc::RandCentral { seed, dist } => Ok(LambdaStream::new(*seed, dist.to_dist())?),
            _ => Err(CliError::Usage("input is not a random central set".into())),
        }
    }

    pub fn cantor(&self) -> Result<CkCantor, CliError> {
        match self {
            InputDoc::Ck { rho, theta, zeta, seed, dist } => Ok(CkCantor::new(ScalingParams::new(
                rho.0.clone(),
                theta.0.clone(),
                zeta.0.clone(),
                *seed,
                dist.to_dist(),
            )?)),
            _ => Err(CliError::Usage("input is not a C^k scaling family".into())),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            InputDoc::Ifs { .. } => 0,
            InputDoc::RandCentral { seed, .. } | InputDoc::Ck { seed, .. } => *seed,
        }
    }

    pub fn with_seed(&self, s: u64) -> Self {
        let mut d = self.clone();
        match &mut d {
            InputDoc::Ifs { .. } => {}
            InputDoc::RandCentral { seed, .. } | InputDoc::Ck { seed, .. } => *seed = s,
        }
        d
    }

    pub fn from_ifs(ifs: &IfsSpec) -> Self {
        InputDoc::Ifs { rho: Rat(ifs.rho.clone()), maps: ifs.maps.iter().map(MapDoc::from_spec).collect() }
    }
}
