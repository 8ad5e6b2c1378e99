//! Packing experiments: `ℓ ↦ log2` of a greedily certified ε-separated
//! family, and the growth exponent of that curve.

use std::fmt::Write as _;

use edc_core::numeric::pow2;
use edc_core::packing::{packing_estimate, CentralFamily, CkFamily, PackingReport};
use edc_core::stats::ols;
use rayon::prelude::*;

use crate::input::InputDoc;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct PackRow {
    pub ell: u32,
    pub report: PackingReport,
}

/// Runs the estimator for every `ℓ`; the input's seed is the base seed of
/// the trial realizations.
pub fn pack_curve(doc: &InputDoc, ells: &[u32], trials: u64) -> Result<Vec<PackRow>, CliError> {
    let run = |l: u32| -> Result<PackRow, CliError> {
        let eps = pow2(-(l as i64));
        let report = match doc {
            InputDoc::RandCentral { seed, dist } => {
                packing_estimate(&CentralFamily::new(*seed, dist.to_dist())?, &eps, trials)
            }
            InputDoc::Ck { .. } => packing_estimate(&CkFamily { params: doc.cantor()?.params }, &eps, trials),
            InputDoc::Ifs { .. } => return Err(CliError::Usage("packing needs a random family".into())),
        }
        .map_err(|source| CliError::AtEll { ell: l, source })?;
        Ok(PackRow { ell: l, report })
    };
    ells.par_iter().map(|&l| run(l)).collect()
}

pub fn pack_csv(rows: &[PackRow]) -> Vec<u8> {
    let mut s = String::from("ell,log2_packing,size,trials,pairs,certificates,confirmed,unconfirmed\n");
    for r in rows {
        let p = &r.report;
        let _ = writeln!(
            s,
            "{},{:.6},{},{},{},{},{},{}",
            r.ell,
            p.log2_size(),
            p.size,
            p.trials,
            p.pairs_checked,
            p.certificates,
            p.confirmed,
            p.unconfirmed
        );
    }
    s.into_bytes()
}

/// Slope of `ln(log2 P)` against `ln ℓ`; above 1 means `log2 P` grows
/// faster than linearly in `ℓ`. Rows with `P ≤ 1` carry no information and
/// are skipped.
pub fn growth_exponent(rows: &[PackRow]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.report.size > 1)
        .map(|r| ((r.ell as f64).ln(), r.report.log2_size().ln()))
        .unzip();
    if x.len() < 2 {
        return None;
    }
    ols(&[&x], &y).map(|f| f.coef[1])
}
