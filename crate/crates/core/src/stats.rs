//! Canonical correlation analysis and OLS regression.
//!
//! Both solvers go through orthogonal decompositions (QR, SVD) rather than
//! explicit covariance inversion. CCA standardizes both variable sets, orders
//! axes by decreasing canonical correlation, and screens dimensions with
//! Wilks's Lambda (Bartlett chi-square approximation). OLS reports the usual
//! diagnostic surface: standard errors, significance stars, R-squared, F,
//! log-likelihood, deviance, AIC, BIC.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

/// Named numeric data: one row per observation unit, no missing entries.
#[derive(Debug, Clone)]
pub struct IndicatorMatrix {
    pub units: Vec<String>,
    pub names: Vec<String>,
    pub data: DMatrix<f64>,
}

impl IndicatorMatrix {
    pub fn new(units: Vec<String>, names: Vec<String>, data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != units.len() || data.ncols() != names.len() {
            return Err(Error::Stats(format!(
                "shape mismatch: {} units, {} names, {}x{} data",
                units.len(),
                names.len(),
                data.nrows(),
                data.ncols()
            )));
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::Stats("column names are not unique".into()));
        }
        for (r, unit) in units.iter().enumerate() {
            for c in 0..names.len() {
                if !data[(r, c)].is_finite() {
                    return Err(Error::Stats(format!(
                        "missing or non-finite value for unit '{unit}', column '{}'",
                        names[c]
                    )));
                }
            }
        }
        Ok(IndicatorMatrix { units, names, data })
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn column_by_name(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Stats(format!("no column named '{name}'")))?;
        Ok(self.data.column(idx).iter().cloned().collect())
    }

    /// Reorder rows to match `units`; every requested unit must be present.
    pub fn align_to_units(&self, units: &[String]) -> Result<IndicatorMatrix> {
        let mut data = DMatrix::zeros(units.len(), self.n_cols());
        for (r, unit) in units.iter().enumerate() {
            let src = self
                .units
                .iter()
                .position(|u| u == unit)
                .ok_or_else(|| Error::Stats(format!("unit '{unit}' missing from matrix")))?;
            data.set_row(r, &self.data.row(src));
        }
        IndicatorMatrix::new(units.to_vec(), self.names.clone(), data)
    }
}

/// Center and scale each column to unit sample variance.
/// Errors on constant columns, naming them.
fn standardize(m: &IndicatorMatrix) -> Result<DMatrix<f64>> {
    let n = m.n_rows();
    if n < 2 {
        return Err(Error::Stats("need at least 2 rows".into()));
    }
    let mut out = m.data.clone();
    for c in 0..m.n_cols() {
        let mean = out.column(c).sum() / n as f64;
        let var = out
            .column(c)
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (n - 1) as f64;
        if var <= 0.0 {
            return Err(Error::Stats(format!(
                "column '{}' is constant; cannot standardize",
                m.names[c]
            )));
        }
        let sd = var.sqrt();
        for r in 0..n {
            out[(r, c)] = (out[(r, c)] - mean) / sd;
        }
    }
    Ok(out)
}

/// Thin QR with a rank check; on a near-zero diagonal of R the offending
/// column is reported as collinear.
fn checked_qr(m: &DMatrix<f64>, names: &[String]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let qr = m.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let max_diag = (0..r.nrows().min(r.ncols()))
        .map(|i| r[(i, i)].abs())
        .fold(0.0f64, f64::max);
    let tol = max_diag * f64::EPSILON * m.nrows().max(m.ncols()) as f64 * 10.0;
    for i in 0..names.len() {
        if r[(i, i)].abs() <= tol {
            return Err(Error::Stats(format!(
                "column '{}' is collinear with preceding columns",
                names[i]
            )));
        }
    }
    Ok((q, r))
}

/// Per-dimension Wilks's Lambda screen.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WilksDimension {
    /// 1-based canonical dimension.
    pub dimension: usize,
    pub lambda: f64,
    /// Bartlett chi-square statistic.
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Wilks's Lambda per dimension with the Bartlett chi-square approximation:
/// `Lambda_k = prod_{i>=k} (1 - r_i^2)`, statistic
/// `-(n - 1 - (px + py + 1)/2) ln Lambda_k`, df `(px-k+1)(py-k+1)`.
pub fn wilks_test(
    correlations: &[f64],
    n: usize,
    px: usize,
    py: usize,
) -> Result<Vec<WilksDimension>> {
    let m = correlations.len();
    let mut out = Vec::with_capacity(m);
    let bartlett = n as f64 - 1.0 - (px as f64 + py as f64 + 1.0) / 2.0;
    for k in 1..=m {
        let lambda: f64 = correlations[k - 1..]
            .iter()
            .map(|r| 1.0 - r * r)
            .product();
        let df = (px - k + 1) * (py - k + 1);
        let (statistic, p_value) = if lambda <= 0.0 {
            (f64::INFINITY, 0.0)
        } else {
            let stat = -bartlett * lambda.ln();
            let p = if stat <= 0.0 {
                1.0
            } else {
                let chi = ChiSquared::new(df as f64)
                    .map_err(|e| Error::Stats(format!("chi-square df {df}: {e}")))?;
                1.0 - chi.cdf(stat)
            };
            (stat, p)
        };
        out.push(WilksDimension {
            dimension: k,
            lambda,
            statistic,
            df,
            p_value,
        });
    }
    Ok(out)
}

/// Canonical correlation analysis output.
#[derive(Debug, Clone)]
pub struct CcaResult {
    pub x_names: Vec<String>,
    pub y_names: Vec<String>,
    pub units: Vec<String>,
    /// Coefficients on the standardized x variables, one column per axis.
    pub x_loadings: DMatrix<f64>,
    pub y_loadings: DMatrix<f64>,
    /// Canonical variate values per unit, unit sample variance per axis.
    pub x_scores: DMatrix<f64>,
    pub y_scores: DMatrix<f64>,
    /// Canonical correlations, nonincreasing, in [0, 1].
    pub correlations: Vec<f64>,
    pub wilks: Vec<WilksDimension>,
}

/// CCA on standardized variables via the QR + SVD route.
///
/// Loadings are sign-normalized so each axis's largest-magnitude x-loading is
/// positive. Requires identical row keys in identical order on both sides.
pub fn cca(x: &IndicatorMatrix, y: &IndicatorMatrix) -> Result<CcaResult> {
    if x.units != y.units {
        return Err(Error::Stats("row keys of x and y do not match".into()));
    }
    let n = x.n_rows();
    let (px, py) = (x.n_cols(), y.n_cols());
    if n <= px.max(py) {
        return Err(Error::Stats(format!(
            "need more rows ({n}) than the larger variable count ({})",
            px.max(py)
        )));
    }
    let xs = standardize(x)?;
    let ys = standardize(y)?;
    let (qx, rx) = checked_qr(&xs, &x.names)?;
    let (qy, ry) = checked_qr(&ys, &y.names)?;

    let cross = qx.transpose() * &qy; // px x py
    let svd = cross.svd(true, true);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let m_axes = px.min(py);

    let correlations: Vec<f64> = (0..m_axes).map(|i| svd.singular_values[i].min(1.0)).collect();

    // Weights A = Rx^{-1} U * sqrt(n-1) give canonical variates Xs * A with
    // unit sample variance.
    let scale = ((n - 1) as f64).sqrt();
    let u_m = u.columns(0, m_axes).into_owned();
    let v_m = vt.rows(0, m_axes).transpose().into_owned();
    let mut x_loadings = rx
        .solve_upper_triangular(&u_m)
        .ok_or_else(|| Error::Stats("x side is rank-deficient".into()))?
        * scale;
    let mut y_loadings = ry
        .solve_upper_triangular(&v_m)
        .ok_or_else(|| Error::Stats("y side is rank-deficient".into()))?
        * scale;

    let mut x_scores = &xs * &x_loadings;
    let mut y_scores = &ys * &y_loadings;

    // Sign convention: largest-magnitude x-loading positive per axis.
    for a in 0..m_axes {
        let (mut best, mut best_abs) = (0, 0.0);
        for i in 0..px {
            let v = x_loadings[(i, a)].abs();
            if v > best_abs {
                best_abs = v;
                best = i;
            }
        }
        if x_loadings[(best, a)] < 0.0 {
            for i in 0..px {
                x_loadings[(i, a)] = -x_loadings[(i, a)];
            }
            for i in 0..py {
                y_loadings[(i, a)] = -y_loadings[(i, a)];
            }
            for r in 0..n {
                x_scores[(r, a)] = -x_scores[(r, a)];
                y_scores[(r, a)] = -y_scores[(r, a)];
            }
        }
    }

    let wilks = wilks_test(&correlations, n, px, py)?;
    Ok(CcaResult {
        x_names: x.names.clone(),
        y_names: y.names.clone(),
        units: x.units.clone(),
        x_loadings,
        y_loadings,
        x_scores,
        y_scores,
        correlations,
        wilks,
    })
}

/// One fitted coefficient with its test statistics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
    /// "***" <= 0.001, "**" <= 0.01, "*" <= 0.05, "" otherwise.
    pub stars: String,
}

/// OLS fit with the full diagnostic surface.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OlsResult {
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub sigma: f64,
    pub f_statistic: Option<f64>,
    pub f_p_value: Option<f64>,
    pub log_likelihood: f64,
    pub deviance: f64,
    pub aic: f64,
    pub bic: f64,
    pub n: usize,
    pub df_residual: usize,
}

pub fn significance_stars(p: f64) -> &'static str {
    if p <= 0.001 {
        "***"
    } else if p <= 0.01 {
        "**"
    } else if p <= 0.05 {
        "*"
    } else {
        ""
    }
}

/// Least squares of `y` on the columns of `x` (plus an intercept when asked),
/// solved through the QR decomposition. Log-likelihood follows the normal
/// error model with the ML variance `RSS/n`; the AIC/BIC parameter count
/// includes the error variance.
pub fn ols(y: &[f64], x: &IndicatorMatrix, intercept: bool) -> Result<OlsResult> {
    let n = y.len();
    if n != x.n_rows() {
        return Err(Error::Stats(format!(
            "y has {n} rows but x has {}",
            x.n_rows()
        )));
    }
    let p = x.n_cols() + intercept as usize;
    if n <= p {
        return Err(Error::Stats(format!(
            "need more observations ({n}) than parameters ({p})"
        )));
    }
    let mut names = Vec::with_capacity(p);
    let mut design = DMatrix::zeros(n, p);
    let mut col = 0;
    if intercept {
        names.push("(Intercept)".to_string());
        for r in 0..n {
            design[(r, 0)] = 1.0;
        }
        col = 1;
    }
    for (c, name) in x.names.iter().enumerate() {
        names.push(name.clone());
        for r in 0..n {
            design[(r, col + c)] = x.data[(r, c)];
        }
    }

    let (q, r) = checked_qr(&design, &names)?;
    let yv = DVector::from_column_slice(y);
    let qty = q.transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Stats("design matrix is singular".into()))?;

    let fitted = &design * &beta;
    let residuals = &yv - &fitted;
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let tss: f64 = if intercept {
        let mean = yv.sum() / n as f64;
        yv.iter().map(|v| (v - mean) * (v - mean)).sum()
    } else {
        yv.iter().map(|v| v * v).sum()
    };
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let df_resid = n - p;
    let df_model = p - intercept as usize;
    let adj_r_squared = if tss > 0.0 {
        1.0 - (1.0 - r_squared) * (n - intercept as usize) as f64 / df_resid as f64
    } else {
        0.0
    };
    let sigma2 = rss / df_resid as f64;
    let sigma = sigma2.sqrt();

    // (X'X)^{-1} = R^{-1} R^{-T}
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Stats("design matrix is singular".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64)
        .map_err(|e| Error::Stats(format!("t distribution: {e}")))?;
    let mut coefficients = Vec::with_capacity(p);
    for i in 0..p {
        let se = (sigma2 * xtx_inv[(i, i)]).sqrt();
        let (t_value, p_value) = if se > 0.0 {
            let t = beta[i] / se;
            (t, 2.0 * (1.0 - t_dist.cdf(t.abs())))
        } else {
            (f64::INFINITY, 0.0)
        };
        coefficients.push(Coefficient {
            name: names[i].clone(),
            estimate: beta[i],
            std_error: se,
            t_value,
            p_value,
            stars: significance_stars(p_value).to_string(),
        });
    }

    let (f_statistic, f_p_value) = if df_model > 0 && rss > 0.0 && tss > rss {
        let f = ((tss - rss) / df_model as f64) / sigma2;
        let fdist = FisherSnedecor::new(df_model as f64, df_resid as f64)
            .map_err(|e| Error::Stats(format!("F distribution: {e}")))?;
        (Some(f), Some(1.0 - fdist.cdf(f)))
    } else if df_model > 0 && rss == 0.0 {
        (Some(f64::INFINITY), Some(0.0))
    } else {
        (None, None)
    };

    let log_likelihood = if rss > 0.0 {
        -0.5 * n as f64 * ((2.0 * std::f64::consts::PI).ln() + (rss / n as f64).ln() + 1.0)
    } else {
        f64::INFINITY
    };
    // Penalized parameter count includes the error variance.
    let k = (p + 1) as f64;
    let aic = -2.0 * log_likelihood + 2.0 * k;
    let bic = -2.0 * log_likelihood + k * (n as f64).ln();

    Ok(OlsResult {
        coefficients,
        r_squared,
        adj_r_squared,
        sigma,
        f_statistic,
        f_p_value,
        log_likelihood,
        deviance: rss,
        aic,
        bic,
        n,
        df_residual: df_resid,
    })
}
