//! Growth-model fits over sweep records, each in its natural coordinates:
//! bits vs `ℓ`, bits vs `ℓ²`, and `log2 bits` vs `ℓ`.

use serde::{Deserialize, Serialize};

use edc_core::stats::ols;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// `bits = c0 + c1 ℓ`.
    Linear,
    /// `bits = c0 + c2 ℓ²`.
    Quadratic,
    /// `log2 bits = c0 + c1 ℓ`, i.e. `bits ∝ ε^{-c1}`.
    Power,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Linear => "linear",
            Model::Quadratic => "quadratic",
            Model::Power => "power",
        }
    }

    fn x(self, ell: f64) -> f64 {
        match self {
            Model::Quadratic => ell * ell,
            _ => ell,
        }
    }

    fn y(self, bits: f64) -> f64 {
        match self {
            Model::Power => bits.log2(),
            _ => bits,
        }
    }

    /// Predicted bit count at `ℓ`.
    pub fn predict(self, coef: &[f64], ell: f64) -> f64 {
        let v = coef[0] + coef[1] * self.x(ell);
        match self {
            Model::Power => v.exp2(),
            _ => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: Model,
    /// Intercept, then the coefficient of the model's regressor.
    pub coef: Vec<f64>,
    pub r2: f64,
    /// `(ℓ, observed, fitted, residual)` in model coordinates.
    pub residuals: Vec<(u32, f64, f64, f64)>,
}

impl FitResult {
    pub fn slope(&self) -> f64 {
        self.coef[1]
    }
}

pub fn fit(points: &[(u32, u64)], model: Model) -> Result<FitResult, CliError> {
    if points.len() < 4 {
        return Err(CliError::Usage(format!("a fit needs at least 4 records, got {}", points.len())));
    }
    let x: Vec<f64> = points.iter().map(|&(l, _)| model.x(l as f64)).collect();
    let y: Vec<f64> = points.iter().map(|&(_, b)| model.y(b as f64)).collect();
    let f = ols(&[&x], &y).ok_or_else(|| CliError::Usage("degenerate design matrix".into()))?;
    let residuals =
        points.iter().zip(&y).zip(&f.residuals).map(|((&(l, _), &yv), &r)| (l, yv, yv - r, r)).collect();
    Ok(FitResult { model, coef: f.coef, r2: f.r2, residuals })
}

/// Second differences of bits over consecutive `ℓ` (must be contiguous).
pub fn second_differences(points: &[(u32, u64)]) -> Vec<i64> {
    points.windows(3).map(|w| w[2].1 as i64 - 2 * w[1].1 as i64 + w[0].1 as i64).collect()
}
