//! Lead-lag estimation for asynchronously observed series.
//!
//! The covariance of two irregular series is estimated without any
//! synchronization or interpolation: increment products are summed over every
//! pair of overlapping observation intervals (Hayashi-Yoshida). The lead-lag
//! shift is found by evaluating that covariance for time-shifted copies of
//! the second series over a symmetric offset grid and maximizing the absolute
//! contrast. A positive estimate means the first series leads the second.

use crate::error::{Error, Result};
use crate::series::AsyncSeries;

/// Symmetric offset grid `{-delta, ..., -step, 0, step, ..., +delta}`.
#[derive(Debug, Clone)]
pub struct LagGrid {
    pub delta: f64,
    pub step: f64,
    offsets: Vec<f64>,
}

impl LagGrid {
    pub fn new(delta: f64, step: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::LeadLag(format!("delta must be positive, got {delta}")));
        }
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::LeadLag(format!("step must be positive, got {step}")));
        }
        if step > delta {
            return Err(Error::LeadLag(format!(
                "step ({step}) must not exceed delta ({delta})"
            )));
        }
        // Integer construction keeps the grid exactly symmetric.
        let n = (delta / step + 1e-9).floor() as i64;
        let offsets = (-n..=n).map(|k| k as f64 * step).collect();
        Ok(LagGrid {
            delta,
            step,
            offsets,
        })
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }
}

/// Outcome of a grid search over the contrast function.
#[derive(Debug, Clone)]
pub struct LeadLagResult {
    /// Estimated lag in days; positive means the first series leads.
    pub theta_hat: f64,
    /// `(offset, contrast)` for every evaluated grid offset, in grid order.
    pub contrast_profile: Vec<(f64, f64)>,
    /// HY correlation of the two series at the estimated lag.
    pub hy_correlation: f64,
    /// Set when the finite-sample correlation falls outside [-1, 1].
    pub correlation_out_of_range: bool,
    /// All grid offsets attaining the maximal absolute contrast.
    pub ties: Vec<f64>,
    /// Grid offsets skipped because the shifted series no longer overlap.
    pub excluded_offsets: Vec<f64>,
}

fn check_overlap(x: &AsyncSeries, y: &AsyncSeries) -> Result<()> {
    // Observation intervals are half-open on the left, so touching endpoints
    // do not overlap.
    if x.last_time() <= y.first_time() || y.last_time() <= x.first_time() {
        return Err(Error::LeadLag("no interval overlap".into()));
    }
    Ok(())
}

/// Hayashi-Yoshida covariance: sum of increment products over all pairs of
/// overlapping observation intervals, computed by a linear two-pointer sweep.
pub fn hy_covariance(x: &AsyncSeries, y: &AsyncSeries) -> Result<f64> {
    check_overlap(x, y)?;
    let t = x.times();
    let s = y.times();
    let dx = x.increments();
    let dy = y.increments();
    let (nx, ny) = (dx.len(), dy.len());

    let mut acc = 0.0;
    let mut i = 0;
    let mut j = 0;
    while i < nx && j < ny {
        // intervals (t[i], t[i+1]] and (s[j], s[j+1]]
        if t[i] < s[j + 1] && s[j] < t[i + 1] {
            acc += dx[i] * dy[j];
        }
        if t[i + 1] < s[j + 1] {
            i += 1;
        } else if s[j + 1] < t[i + 1] {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    Ok(acc)
}

/// Quadratic double-loop reference for [`hy_covariance`]. Kept for testing
/// the sweep against; do not use on large inputs.
pub fn hy_covariance_reference(x: &AsyncSeries, y: &AsyncSeries) -> Result<f64> {
    check_overlap(x, y)?;
    let t = x.times();
    let s = y.times();
    let dx = x.increments();
    let dy = y.increments();
    let mut acc = 0.0;
    for i in 0..dx.len() {
        for j in 0..dy.len() {
            if t[i] < s[j + 1] && s[j] < t[i + 1] {
                acc += dx[i] * dy[j];
            }
        }
    }
    Ok(acc)
}

/// Full-sample realized variance: sum of squared own increments.
pub fn realized_variance(x: &AsyncSeries) -> f64 {
    x.increments().iter().map(|d| d * d).sum()
}

/// HY correlation: covariance normalized by full-sample realized variances.
/// Finite-sample values may leave [-1, 1]; the flag reports when they do.
pub fn hy_correlation(x: &AsyncSeries, y: &AsyncSeries) -> Result<(f64, bool)> {
    let cov = hy_covariance(x, y)?;
    let rvx = realized_variance(x);
    let rvy = realized_variance(y);
    if rvx == 0.0 || rvy == 0.0 {
        return Err(Error::LeadLag(format!(
            "zero realized variance (x: {rvx}, y: {rvy})"
        )));
    }
    let rho = cov / (rvx * rvy).sqrt();
    Ok((rho, rho.abs() > 1.0))
}

/// Grid search for the lag maximizing the absolute HY contrast
/// `U(theta) = hy_covariance(x, shift(y, theta))`.
///
/// Ties are broken toward the smallest absolute offset, then toward the
/// negative one. Offsets at which the shifted series no longer overlap are
/// excluded and reported.
pub fn estimate_lead_lag(
    x: &AsyncSeries,
    y: &AsyncSeries,
    grid: &LagGrid,
) -> Result<LeadLagResult> {
    let mut profile = Vec::with_capacity(grid.offsets().len());
    let mut excluded = Vec::new();
    for &theta in grid.offsets() {
        let shifted = y.shift(theta);
        if check_overlap(x, &shifted).is_err() {
            excluded.push(theta);
            continue;
        }
        profile.push((theta, hy_covariance(x, &shifted)?));
    }
    if profile.is_empty() {
        return Err(Error::LeadLag(
            "series do not overlap at any grid offset".into(),
        ));
    }
    let max_abs = profile
        .iter()
        .map(|(_, u)| u.abs())
        .fold(0.0f64, f64::max);
    if max_abs == 0.0 {
        return Err(Error::LeadLag("no covariation detected".into()));
    }
    let mut ties: Vec<f64> = profile
        .iter()
        .filter(|(_, u)| u.abs() == max_abs)
        .map(|(theta, _)| *theta)
        .collect();
    // smallest |theta| first, negative before positive
    ties.sort_by(|a, b| {
        a.abs()
            .partial_cmp(&b.abs())
            .unwrap()
            .then(a.partial_cmp(b).unwrap())
    });
    let theta_hat = ties[0];

    let (rho, out_of_range) = hy_correlation(x, &y.shift(theta_hat))?;
    Ok(LeadLagResult {
        theta_hat,
        contrast_profile: profile,
        hy_correlation: rho,
        correlation_out_of_range: out_of_range,
        ties,
        excluded_offsets: excluded,
    })
}
