//! Ordinary least squares by QR factorization, with the diagnostics the
//! simulation harness reports: coefficients, standard errors, t-statistics
//! and both centered and uncentered R-squared.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct OlsFit {
    /// Regressor names in column order (the intercept, when requested, is
    /// prepended as "const").
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub r_squared_centered: f64,
    pub r_squared_uncentered: f64,
    pub n_observations: usize,
    pub includes_intercept: bool,
}

const RANK_TOL: f64 = 1e-10;

/// Fits `y ~ X` (optionally with a prepended intercept column) via
/// Householder QR. Standard errors come from `sigma^2 (X'X)^{-1}` with
/// `sigma^2 = RSS / (n - k)`.
pub fn ols(design: &DMatrix<f64>, y: &DVector<f64>, intercept: bool, names: &[&str]) -> Result<OlsFit> {
    let n = design.nrows();
    if y.len() != n {
        return Err(Error::InvalidInput(format!(
            "design has {n} rows but response has {}",
            y.len()
        )));
    }
    if names.len() != design.ncols() {
        return Err(Error::InvalidInput(format!(
            "{} names for {} columns",
            names.len(),
            design.ncols()
        )));
    }
    let x = if intercept {
        let mut with_const = DMatrix::from_element(n, design.ncols() + 1, 1.0);
        with_const.view_mut((0, 1), (n, design.ncols())).copy_from(design);
        with_const
    } else {
        design.clone()
    };
    let k = x.ncols();
    if n <= k {
        return Err(Error::InvalidInput(format!(
            "need more observations than regressors, got n = {n}, k = {k}"
        )));
    }
    let full_names: Vec<String> = if intercept {
        std::iter::once("const".to_string())
            .chain(names.iter().map(|s| s.to_string()))
            .collect()
    } else {
        names.iter().map(|s| s.to_string()).collect()
    };

    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    for j in 0..k {
        if r[(j, j)].abs() <= RANK_TOL * max_diag {
            return Err(Error::RankDeficient(format!(
                "column '{}' is collinear with the preceding columns",
                full_names[j]
            )));
        }
    }
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient("upper-triangular solve failed".into()))?;

    let fitted = &x * &coef;
    let residuals = y - &fitted;
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let sigma2 = rss / (n - k) as f64;

    // (X'X)^{-1} = R^{-1} R^{-T}
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::RankDeficient("R is not invertible".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let std_errors: Vec<f64> = (0..k).map(|j| (sigma2 * xtx_inv[(j, j)]).sqrt()).collect();
    let t_stats: Vec<f64> = coef
        .iter()
        .zip(&std_errors)
        .map(|(c, se)| if *se > 0.0 { c / se } else { f64::INFINITY })
        .collect();

    let total_uncentered: f64 = y.iter().map(|v| v * v).sum();
    let y_bar = y.mean();
    let total_centered: f64 = y.iter().map(|v| (v - y_bar) * (v - y_bar)).sum();
    // a response with no variation has nothing to explain
    let r2_of = |total: f64| if total > 0.0 { 1.0 - rss / total } else { 0.0 };

    Ok(OlsFit {
        names: full_names,
        coefficients: coef.iter().cloned().collect(),
        std_errors,
        t_stats,
        r_squared_centered: r2_of(total_centered),
        r_squared_uncentered: r2_of(total_uncentered),
        n_observations: n,
        includes_intercept: intercept,
    })
}

impl OlsFit {
    /// Aligned text table with coef / std err / t columns.
    pub fn table(&self, title: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("{title}\n"));
        out.push_str(&format!(
            "{:<14} {:>14} {:>12} {:>12}\n",
            "", "coef", "std err", "t"
        ));
        for (((name, c), se), t) in self
            .names
            .iter()
            .zip(&self.coefficients)
            .zip(&self.std_errors)
            .zip(&self.t_stats)
        {
            out.push_str(&format!("{name:<14} {c:>14.4} {se:>12.4} {t:>12.3}\n"));
        }
        out.push_str(&format!(
            "n = {}, R-squared (uncentered): {:.4}, R-squared (centered): {:.4}\n",
            self.n_observations, self.r_squared_uncentered, self.r_squared_centered
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_proportionality_without_intercept() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let y = DVector::from_column_slice(&[2.0, 4.0, 6.0, 8.0]);
        let fit = ols(&x, &y, false, &["x"]).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r_squared_uncentered, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_response_with_intercept() {
        let x = DMatrix::from_column_slice(5, 1, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = DVector::from_element(5, 3.0);
        let fit = ols(&x, &y, true, &["x"]).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficients[1], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.r_squared_centered, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn three_point_hand_solve() {
        // slope = sum(xy) / sum(x^2) = 31/14
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let y = DVector::from_column_slice(&[2.0, 4.0, 7.0]);
        let fit = ols(&x, &y, false, &["x"]).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], 31.0 / 14.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coefficients[0], 2.2143, epsilon = 1e-4);
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let n = 200;
        let x = DMatrix::from_fn(n, 2, |i, j| ((i * (j + 3) + 7) % 23) as f64 / 23.0);
        let y = DVector::from_fn(n, |i, _| {
            1.5 * x[(i, 0)] - 0.7 * x[(i, 1)] + ((i * 13 + 5) % 11) as f64 / 11.0
        });
        let fit = ols(&x, &y, true, &["a", "b"]).unwrap();
        let mut xc = DMatrix::from_element(n, 3, 1.0);
        xc.view_mut((0, 1), (n, 2)).copy_from(&x);
        let coef = DVector::from_column_slice(&fit.coefficients);
        let resid = &y - &xc * coef;
        let y_norm = y.norm();
        for j in 0..3 {
            let dot: f64 = (0..n).map(|i| xc[(i, j)] * resid[i]).sum();
            assert!(dot.abs() < 1e-8 * y_norm, "column {j} dot {dot}");
        }
    }

    #[test]
    fn column_rescaling_rescales_coefficient() {
        let n = 50;
        let x = DMatrix::from_fn(n, 2, |i, j| ((i + 1) * (j + 2) % 17) as f64 + 1.0);
        let y = DVector::from_fn(n, |i, _| 2.0 * x[(i, 0)] + 0.5 * x[(i, 1)] + (i % 5) as f64);
        let fit = ols(&x, &y, false, &["a", "b"]).unwrap();
        let mut scaled = x.clone();
        let s = 10.0;
        for i in 0..n {
            scaled[(i, 1)] *= s;
        }
        let fit_scaled = ols(&scaled, &y, false, &["a", "b"]).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0], fit_scaled.coefficients[0], epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficients[1], fit_scaled.coefficients[1] * s, epsilon = 1e-10);
    }

    #[test]
    fn intercept_never_lowers_centered_r_squared() {
        let n = 80;
        let x = DMatrix::from_fn(n, 1, |i, _| (i as f64).sin() + 2.0);
        let y = DVector::from_fn(n, |i, _| 3.0 * x[(i, 0)] + ((i % 7) as f64 - 3.0));
        let without = ols(&x, &y, false, &["x"]).unwrap();
        let with = ols(&x, &y, true, &["x"]).unwrap();
        assert!(with.r_squared_centered >= without.r_squared_centered - 1e-12);
    }

    #[test]
    fn collinear_columns_are_named() {
        let n = 30;
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { i as f64 } else { 2.0 * i as f64 });
        let y = DVector::from_fn(n, |i, _| i as f64);
        match ols(&x, &y, false, &["first", "double"]) {
            Err(Error::RankDeficient(msg)) => assert!(msg.contains("double"), "{msg}"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn standard_errors_match_textbook_simple_regression() {
        // y = 1 + 2x + e on x = 0..5 with hand-computed residual variance
        let x = DMatrix::from_column_slice(6, 1, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = DVector::from_column_slice(&[1.1, 2.9, 5.2, 6.8, 9.1, 10.9]);
        let fit = ols(&x, &y, true, &["x"]).unwrap();
        // verified against the closed-form OLS formulas for simple regression
        let x_bar = 2.5;
        let sxx: f64 = (0..6).map(|i| (i as f64 - x_bar).powi(2)).sum();
        let slope = fit.coefficients[1];
        let intercept = fit.coefficients[0];
        let rss: f64 = (0..6)
            .map(|i| (y[i] - intercept - slope * i as f64).powi(2))
            .sum();
        let sigma2 = rss / 4.0;
        assert_abs_diff_eq!(fit.std_errors[1], (sigma2 / sxx).sqrt(), epsilon = 1e-10);
    }
}
