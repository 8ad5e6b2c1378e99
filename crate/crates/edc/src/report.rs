//! CSV and SVG output. Every writer formats deterministically so that equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use edc_core::numeric::{FinitePointSet, Interval};
use edc_core::{BigInt, Q};
use serde::{Deserialize, Serialize};

use crate::fit::FitResult;
use crate::input::parse_q;
use crate::sweep::SweepRecord;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvRow {
    pub ell: u32,
    pub bits: u64,
    pub dh_num: String,
    pub dh_den: String,
    pub codec: String,
    pub seed: u64,
}

impl CsvRow {
    pub fn of(r: &SweepRecord) -> Self {
        Self {
            ell: r.ell,
            bits: r.bits,
            dh_num: r.dh.numer().to_string(),
            dh_den: r.dh.denom().to_string(),
            codec: r.codec.to_string(),
            seed: r.seed,
        }
    }

    pub fn dh(&self) -> Result<Q, CliError> {
        let p = |s: &str| s.parse::<BigInt>().map_err(|_| CliError::Usage(format!("bad integer {s:?}")));
        let d = p(&self.dh_den)?;
        if d == BigInt::from(0) {
            return Err(CliError::Usage("zero denominator".into()));
        }
        Ok(Q::new(p(&self.dh_num)?, d))
    }
}

pub fn records_csv(records: &[SweepRecord]) -> Result<Vec<u8>, CliError> {
    if records.is_empty() {
        return Err(CliError::Usage("nothing to report".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow::of(r))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

pub fn read_records(path: &Path) -> Result<Vec<CsvRow>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

/// One exact coordinate per line under the header `x`.
pub fn points_csv(s: &FinitePointSet) -> Vec<u8> {
    let mut out = String::from("x\n");
    for x in s.points() {
        let _ = writeln!(out, "{x}");
    }
    out.into_bytes()
}

pub fn read_points(path: &Path) -> Result<FinitePointSet, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut pts = Vec::new();
    for row in r.records() {
        let row = row?;
        let cell = row.get(0).ok_or_else(|| CliError::Usage("empty row".into()))?;
        pts.push(parse_q(cell).map_err(CliError::Usage)?);
    }
    Ok(FinitePointSet::new(pts)?)
}

/// `level,index,left,right` rows, exact rationals.
pub fn levels_csv<'a>(levels: impl IntoIterator<Item = (usize, &'a [Interval])>) -> Vec<u8> {
    let mut out = String::from("level,index,left,right\n");
    for (d, ivs) in levels {
        for (k, j) in ivs.iter().enumerate() {
            let _ = writeln!(out, "{d},{k},{},{}", j.lo, j.hi);
        }
    }
    out.into_bytes()
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

/// `log2 bits` against `ℓ` with one polyline per fitted model.
pub fn svg(points: &[(u32, u64)], fits: &[FitResult]) -> Result<String, CliError> {
    if points.is_empty() {
        return Err(CliError::Usage("nothing to plot".into()));
    }
    let (lmin, lmax) = points.iter().fold((u32::MAX, 0), |(a, b), &(l, _)| (a.min(l), b.max(l)));
    let (lmin, lmax) = (lmin as f64, (lmax as f64).max(lmin as f64 + 1.0));
    let ys: Vec<f64> = points.iter().map(|&(_, b)| (b.max(1) as f64).log2()).collect();
    let (ymin, ymax) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let (ymin, ymax) = (ymin.floor(), (ymax.ceil()).max(ymin.floor() + 1.0));
    let sx = |l: f64| PAD + (l - lmin) / (lmax - lmin) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - ymin) / (ymax - ymin) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">ℓ ({lmin}–{lmax})</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(s, r#"<text x="12" y="{}" font-size="12" transform="rotate(-90 12 {})" text-anchor="middle">log2 bits ({ymin}–{ymax})</text>"#, H / 2.0, H / 2.0);
    for (&(l, _), y) in points.iter().zip(&ys) {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="black"/>"#, sx(l as f64), sy(*y));
    }
    let colours = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];
    for (i, f) in fits.iter().enumerate() {
        let mut pts = String::new();
        let steps = ((lmax - lmin) * 4.0) as usize;
        for t in 0..=steps {
            let l = lmin + t as f64 / 4.0;
            let y = f.model.predict(&f.coef, l).max(1.0).log2().clamp(ymin, ymax);
            let _ = write!(pts, "{:.3},{:.3} ", sx(l), sy(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline data-model="{}" points="{}" fill="none" stroke="{}"/>"#,
            f.model.name(),
            pts.trim_end(),
            colours[i % colours.len()]
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
