//! Irregularly observed real-valued series.

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// An asynchronously observed series: strictly increasing observation times
/// in fractional days, finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct AsyncSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    pub name: String,
}

impl AsyncSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if times.len() != values.len() {
            return Err(Error::LeadLag(format!(
                "series '{name}': {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::LeadLag(format!(
                "series '{name}' needs at least 2 observations"
            )));
        }
        for w in times.windows(2) {
            if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::LeadLag(format!(
                    "series '{name}': times not strictly increasing at t={} -> t={}",
                    w[0], w[1]
                )));
            }
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::LeadLag(format!(
                "series '{name}' contains non-finite entries"
            )));
        }
        Ok(AsyncSeries {
            times,
            values,
            name,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Translate observation times by `-theta`: the shifted series carries at
    /// time `t` the original value at `t + theta`.
    pub fn shift(&self, theta: f64) -> AsyncSeries {
        AsyncSeries {
            times: self.times.iter().map(|t| t - theta).collect(),
            values: self.values.clone(),
            name: self.name.clone(),
        }
    }

    /// Rescale values by a constant.
    pub fn scale(&self, factor: f64) -> AsyncSeries {
        AsyncSeries {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            name: self.name.clone(),
        }
    }

    /// Consecutive-observation increments, one per interval.
    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Build from dated observations; times become fractional days since the
    /// earliest observation.
    pub fn from_dated(obs: &[(NaiveDate, f64)], name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if obs.is_empty() {
            return Err(Error::LeadLag(format!("series '{name}' is empty")));
        }
        let epoch = obs.iter().map(|(d, _)| *d).min().unwrap();
        let times = obs
            .iter()
            .map(|(d, _)| (*d - epoch).num_days() as f64)
            .collect();
        let values = obs.iter().map(|(_, v)| *v).collect();
        AsyncSeries::new(times, values, name)
    }
}
