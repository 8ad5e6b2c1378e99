//! Ordinary least squares for the slope/growth fits.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Ols {
    /// Coefficients, constant term first.
    pub coef: Vec<f64>,
    pub r2: f64,
    pub residuals: Vec<f64>,
}

/// Least squares of `y` on the given regressor columns plus an intercept.
/// Returns `None` when the normal equations are singular.
pub fn ols(cols: &[&[f64]], y: &[f64]) -> Option<Ols> {
    let n = y.len();
    let k = cols.len() + 1;
    if n < k || cols.iter().any(|c| c.len() != n) {
        return None;
    }
    let x = |i: usize, j: usize| if j == 0 { 1.0 } else { cols[j - 1][i] };
    // centre-free normal equations solved by Gaussian elimination with
    // partial pivoting; k ≤ 3 here so conditioning is not a concern.
    let mut a = alloc::vec![0.0f64; k * (k + 1)];
    for (i, yi) in y.iter().enumerate() {
        for r in 0..k {
            for c in 0..k {
                a[r * (k + 1) + c] += x(i, r) * x(i, c);
            }
            a[r * (k + 1) + k] += x(i, r) * yi;
        }
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..k {
        let piv = (col..k).max_by(|&p, &q| {
            a[p * (k + 1) + col].abs().total_cmp(&a[q * (k + 1) + col].abs())
        })?;
        if a[piv * (k + 1) + col].abs() <= 1e-12 * scale {
            return None;
        }
        for c in 0..=k {
            a.swap(col * (k + 1) + c, piv * (k + 1) + c);
        }
        for r in 0..k {
            if r != col {
                let f = a[r * (k + 1) + col] / a[col * (k + 1) + col];
                for c in col..=k {
                    a[r * (k + 1) + c] -= f * a[col * (k + 1) + c];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..k).map(|r| a[r * (k + 1) + k] / a[r * (k + 1) + r]).collect();
    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..k).map(|j| coef[j] * x(i, j)).sum::<f64>())
        .collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Some(Ols { coef, r2, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_lines() {
        let x: Vec<f64> = (8..=20).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 7.0 * v + 3.0).collect();
        let f = ols(&[&x], &y).unwrap();
        assert!((f.coef[1] - 7.0).abs() < 1e-9 && (f.coef[0] - 3.0).abs() < 1e-9);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
        let y2: Vec<f64> = x.iter().map(|v| 2.0 * v * v - v + 5.0).collect();
        let g = ols(&[&x, &x2], &y2).unwrap();
        assert!((g.coef[2] - 2.0).abs() < 1e-9);
        assert!((g.coef[1] + 1.0).abs() < 1e-7);
    }

    #[test]
    fn singular_design() {
        let x = [1.0, 1.0, 1.0, 1.0];
        assert!(ols(&[&x], &[1.0, 2.0, 3.0, 4.0]).is_none());
    }
}
