//! ε-sweeps: encode, decode and verify at every `ℓ`, collecting bit counts.

use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use edc_core::ck::build_ck_levels;
use edc_core::codec::{self, CodecReport};
use edc_core::ifs::MapSpec;
use edc_core::Q;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::input::InputDoc;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CodecKind {
    Poly,
    Analytic,
    Rand,
    Ck,
}

impl CodecKind {
    pub fn name(self) -> &'static str {
        match self {
            CodecKind::Poly => "poly",
            CodecKind::Analytic => "analytic",
            CodecKind::Rand => "rand",
            CodecKind::Ck => "ck",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputRef {
    Path(PathBuf),
    Inline(Box<InputDoc>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub codec: CodecKind,
    pub input: InputRef,
    pub ell_min: u32,
    pub ell_max: u32,
    /// Realization seeds (random families); ignored for IFS inputs.
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Slack `δ` on the C^k target exponent `D/k + δ` (reporting only).
    #[serde(default)]
    pub delta: f64,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub budget: Option<usize>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut cfg: SweepConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let InputRef::Path(p) = &cfg.input {
            cfg.input = InputRef::Path(base.join(p));
        }
        for out in [&mut cfg.csv, &mut cfg.svg].into_iter().flatten() {
            *out = base.join(&*out);
        }
        Ok(cfg)
    }

    pub fn input_doc(&self) -> Result<InputDoc, CliError> {
        match &self.input {
            InputRef::Path(p) => InputDoc::load(p),
            InputRef::Inline(d) => Ok((**d).clone()),
        }
    }

    pub fn ells(&self) -> Result<RangeInclusive<u32>, CliError> {
        if self.ell_min > self.ell_max || self.ell_min == 0 {
            return Err(CliError::Usage(format!("empty ℓ range {}..={}", self.ell_min, self.ell_max)));
        }
        Ok(self.ell_min..=self.ell_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub ell: u32,
    pub bits: u64,
    pub dh: Q,
    pub codec: &'static str,
    pub seed: u64,
    pub report: CodecReport,
    pub description: codec::Description,
}

type Verified = (codec::Description, CodecReport);

fn verified(ell: u32, r: Result<Verified, edc_core::Error>) -> Result<Verified, CliError> {
    let (d, rep) = r.map_err(|source| CliError::AtEll { ell, source })?;
    if !rep.within(&d.eps()) {
        let source = edc_core::Error::Contract(format!("d_H = {} is not below 2^-{ell}", rep.dh_achieved));
        return Err(CliError::AtEll { ell, source });
    }
    Ok((d, rep))
}

fn record(codec: CodecKind, seed: u64, ell: u32, (description, report): Verified) -> SweepRecord {
    SweepRecord { ell, bits: report.total_bits, dh: report.dh_achieved.clone(), codec: codec.name(), seed, report, description }
}

/// One realization (or the IFS itself) across the `ℓ` range; points run in
/// parallel, results come back ordered by `ℓ`.
pub fn sweep_one(codec: CodecKind, doc: &InputDoc, ells: RangeInclusive<u32>, budget: usize) -> Result<Vec<SweepRecord>, CliError> {
    let ells: Vec<u32> = ells.collect();
    let Some(&top) = ells.last() else {
        return Err(CliError::Usage("empty ℓ range".into()));
    };
    let seed = doc.seed();
    let reports: Vec<Result<Verified, CliError>> = match codec {
        CodecKind::Poly | CodecKind::Analytic => {
            let ifs = doc.ifs()?;
            let series = ifs.maps.iter().any(|m| matches!(m, MapSpec::TruncatedSeries { .. }));
            if series != (codec == CodecKind::Analytic) {
                return Err(CliError::Usage(format!("codec {} does not match the map family", codec.name())));
            }
            ells.par_iter().map(|&l| verified(l, codec::poly::roundtrip(&ifs, l, budget))).collect()
        }
        CodecKind::Rand => {
            let s = doc.stream()?;
            ells.par_iter().map(|&l| verified(l, codec::rand::roundtrip_rand(&s, l, budget))).collect()
        }
        CodecKind::Ck => {
            let c = doc.cantor()?;
            let depth = codec::ck::levels_needed(&c, top);
            let levels = build_ck_levels(&c, depth, budget).map_err(|source| CliError::AtEll { ell: top, source })?;
            ells.par_iter().map(|&l| verified(l, codec::ck::roundtrip_ck_with(&c, &levels, l, budget))).collect()
        }
    };
    ells.iter().zip(reports).map(|(&l, r)| Ok(record(codec, seed, l, r?))).collect()
}

/// The whole configuration: every seed (or the single IFS), ordered by
/// seed then `ℓ`.
pub fn sweep(cfg: &SweepConfig, budget: usize) -> Result<Vec<SweepRecord>, CliError> {
    let doc = cfg.input_doc()?;
    let ells = cfg.ells()?;
    let seeds: Vec<u64> = match (&doc, cfg.seeds.is_empty()) {
        (InputDoc::Ifs { .. }, _) | (_, true) => vec![doc.seed()],
        _ => cfg.seeds.clone(),
    };
    let mut out = Vec::new();
    for s in seeds {
        out.extend(sweep_one(cfg.codec, &doc.with_seed(s), ells.clone(), budget)?);
    }
    Ok(out)
}
