//! The `edc` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use edc_core::ck::{build_ck_levels, CkCantor, ScalingParams};
use edc_core::codec::{self, Description};
use edc_core::dimension::estimate_dimension;
use edc_core::numeric::{hausdorff_finite, to_f64};
use edc_core::random_cantor::{build_central, LambdaStream};
use edc_core::Q;

use crate::fit::{fit, Model};
use crate::input::{parse_q, DistDoc, InputDoc};
use crate::pack::{growth_exponent, pack_csv, pack_curve};
use crate::report::{levels_csv, points_csv, read_points, read_records, records_csv, svg, write_file};
use crate::sweep::{sweep, sweep_one, CodecKind, SweepConfig};
use crate::{budget_from_env, CliError};

#[derive(Debug, Parser)]
#[command(name = "edc", version, about = "Hausdorff-distortion codecs and experiments for Cantor sets")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

fn rational(s: &str) -> Result<Q, String> {
    parse_q(s)
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Encode a set at ε = 2^-L and verify the round trip.
    Encode {
        #[arg(long, value_enum)]
        codec: CodecKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "eps-exp")]
        eps_exp: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a description into its point set.
    Decode {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact Hausdorff distance of two point files.
    Dist { a: PathBuf, b: PathBuf },
    /// Box-counting dimension of a point file.
    Dim {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        jmin: u32,
        #[arg(long, default_value_t = 7)]
        jmax: u32,
        /// Finest meaningful scale; defaults to ⌊log2(1/smallest gap)⌋.
        #[arg(long)]
        resolution: Option<u32>,
    },
    /// Levels of a random central set.
    Rand {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = DistDoc::parse)]
        dist: DistDoc,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Levels of a C^k scaling-function set.
    Ck {
        #[arg(long, value_parser = rational)]
        rho: Q,
        #[arg(long, value_parser = rational)]
        theta: Q,
        #[arg(long, value_parser = rational)]
        zeta: Q,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_parser = DistDoc::parse, default_value = "uniform:0,1")]
        dist: DistDoc,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an ε-sweep from a JSON configuration.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Greedy packing curve of a random family.
    Pack {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "ell-min", default_value_t = 6)]
        ell_min: u32,
        #[arg(long = "ell-max", default_value_t = 12)]
        ell_max: u32,
        #[arg(long, default_value_t = 512)]
        trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a growth model to sweep records.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        model: Vec<Model>,
        #[arg(long)]
        codec: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn emit(out: &mut dyn Write, path: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, bytes),
        None => Ok(out.write_all(bytes)?),
    }
}

fn smallest_gap_resolution(s: &edc_core::numeric::FinitePointSet) -> u32 {
    let gap = s.points().windows(2).map(|w| &w[1] - &w[0]).min();
    match gap {
        Some(g) => (-to_f64(&g).log2()).floor().max(0.0) as u32,
        None => u32::MAX / 2,
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let budget = budget_from_env()?;
    match cli.cmd {
        Cmd::Encode { codec, input, eps_exp, out: path } => {
            let doc = InputDoc::load(&input)?;
            let rec = sweep_one(codec, &doc, eps_exp..=eps_exp, budget)?.remove(0);
            write_file(&path, &rec.description.bytes)?;
            writeln!(out, "codec={} ell={} bits={} dh={} n_bar={}", rec.codec, rec.ell, rec.bits, rec.dh, rec.report.n_bar)?;
            for (k, v) in &rec.report.params {
                writeln!(out, "  {k}={v}")?;
            }
        }
        Cmd::Decode { file, out: path } => {
            let d = Description::from_bytes(std::fs::read(&file)?)?;
            let pts = codec::decode(&d, budget)?;
            emit(out, &path, &points_csv(&pts))?;
        }
        Cmd::Dist { a, b } => {
            let d = hausdorff_finite(&read_points(&a)?, &read_points(&b)?)?;
            writeln!(out, "{d} ≈ {:e}", to_f64(&d))?;
        }
        Cmd::Dim { input, jmin, jmax, resolution } => {
            let s = read_points(&input)?;
            let res = resolution.unwrap_or_else(|| smallest_gap_resolution(&s));
            let e = estimate_dimension(&s, jmin, jmax, res)?;
            writeln!(out, "j,count")?;
            for (j, n) in e.scales.iter().zip(&e.counts) {
                writeln!(out, "{j},{n}")?;
            }
            writeln!(out, "slope,{:.6}", e.slope)?;
            writeln!(out, "r2,{:.6}", e.r2)?;
        }
        Cmd::Rand { seed, dist, depth, out: path } => {
            let s = LambdaStream::new(seed, dist.to_dist())?;
            let lv = build_central(&s.values(depth), depth, budget)?;
            let levels: Vec<_> = (0..=depth).map(|k| lv.intervals(k)).collect();
            emit(out, &path, &levels_csv(levels.iter().enumerate().map(|(k, v)| (k, v.as_slice()))))?;
        }
        Cmd::Ck { rho, theta, zeta, seed, depth, dist, out: path } => {
            let c = CkCantor::new(ScalingParams::new(rho, theta, zeta, seed, dist.to_dist())?);
            let lv = build_ck_levels(&c, depth, budget)?;
            emit(out, &path, &levels_csv(lv.intervals.iter().enumerate().map(|(k, v)| (k, v.as_slice()))))?;
        }
        Cmd::Sweep { config, csv, svg: svg_path } => {
            let mut cfg = SweepConfig::load(&config)?;
            cfg.csv = csv.or(cfg.csv);
            cfg.svg = svg_path.or(cfg.svg);
            let recs = sweep(&cfg, cfg.budget.unwrap_or(budget))?;
            let bytes = records_csv(&recs)?;
            emit(out, &cfg.csv, &bytes)?;
            if let Some(p) = &cfg.svg {
                let pts: Vec<(u32, u64)> = recs.iter().map(|r| (r.ell, r.bits)).collect();
                let model = match cfg.codec {
                    CodecKind::Poly => Model::Linear,
                    CodecKind::Analytic | CodecKind::Rand => Model::Quadratic,
                    CodecKind::Ck => Model::Power,
                };
                write_file(p, svg(&pts, &[fit(&pts, model)?])?.as_bytes())?;
            }
        }
        Cmd::Pack { input, ell_min, ell_max, trials, out: path } => {
            if ell_min > ell_max {
                return Err(CliError::Usage("empty ℓ range".into()));
            }
            let ells: Vec<u32> = (ell_min..=ell_max).collect();
            let rows = pack_curve(&InputDoc::load(&input)?, &ells, trials)?;
            emit(out, &path, &pack_csv(&rows))?;
            if path.is_some() {
                if let Some(e) = growth_exponent(&rows) {
                    writeln!(out, "growth exponent {e:.4}")?;
                }
            }
        }
        Cmd::Fit { input, model, codec, seed, svg: svg_path } => {
            let rows = read_records(&input)?;
            let pts: Vec<(u32, u64)> = rows
                .iter()
                .filter(|r| codec.as_ref().is_none_or(|c| &r.codec == c) && seed.is_none_or(|s| r.seed == s))
                .map(|r| (r.ell, r.bits))
                .collect();
            let models = if model.is_empty() { vec![Model::Linear, Model::Quadratic, Model::Power] } else { model };
            let fits = models.iter().map(|&m| fit(&pts, m)).collect::<Result<Vec<_>, _>>()?;
            writeln!(out, "{}", serde_json::to_string_pretty(&fits)?)?;
            if let Some(p) = svg_path {
                write_file(&p, svg(&pts, &fits)?.as_bytes())?;
            }
        }
    }
    Ok(())
}
