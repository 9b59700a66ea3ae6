//! Synthetic corpora and lagged series with known ground truth.
//!
//! Generation is fully deterministic given a seed (see [`crate::rng`] for the
//! pinned generator). Every generator returns the realized truth — the
//! mixture actually drawn, the lag actually applied — so tests compare
//! against what the data contain, not against nominal parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Xoshiro256StarStar;
use crate::series::AsyncSeries;
use crate::textproc::Document;

/// One category with its nominal mixture weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategorySpec {
    pub name: String,
    pub mixture: f64,
}

/// Synthetic corpus layout.
///
/// Each category owns a block of `stems_per_category` topical stems. A
/// document of category c contains each own-block stem with probability
/// `p_exclusive`, each other-block stem with probability
/// `overlap * p_exclusive`, and each of the `shared_stems` vocabulary-wide
/// stems with probability `overlap * p_shared`; a document that would come
/// out empty gets one uniformly chosen own-block stem instead. With
/// `overlap = 0` category supports are disjoint; with `p_exclusive = 1` and
/// `overlap = 0` each category collapses to a single signature vector; as
/// `overlap` grows the categories' vector distributions blur into each other
/// and per-document classification turns ambiguous.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub categories: Vec<CategorySpec>,
    pub stems_per_category: usize,
    pub shared_stems: usize,
    pub p_exclusive: f64,
    pub p_shared: f64,
    /// Shared-stem strength in [0, 1]; 0 means disjoint supports.
    pub overlap: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Optional embedded seed; the CLI `--seed` flag overrides it.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl CorpusSpec {
    fn validate(&self) -> Result<()> {
        if self.categories.is_empty() {
            return Err(Error::Synth("no categories".into()));
        }
        let total: f64 = self.categories.iter().map(|c| c.mixture).sum();
        if (total - 1.0).abs() > 1e-9 || self.categories.iter().any(|c| c.mixture < 0.0) {
            return Err(Error::Synth(format!(
                "mixture must lie on the simplex (sums to {total})"
            )));
        }
        for &p in &[self.p_exclusive, self.p_shared, self.overlap] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Synth(format!("probability {p} outside [0,1]")));
            }
        }
        if self.stems_per_category == 0 {
            return Err(Error::Synth("stems_per_category must be >= 1".into()));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::Synth("train and test sizes must be positive".into()));
        }
        Ok(())
    }
}

/// A generated corpus with its realized test mixture.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub train: Vec<Document>,
    pub test: Vec<Document>,
    pub category_names: Vec<String>,
    /// Realized test-set mixture (counts / n_test), not the nominal one.
    pub realized_mixture: Vec<f64>,
}

fn emit_document(
    rng: &mut Xoshiro256StarStar,
    spec: &CorpusSpec,
    category: usize,
) -> String {
    let m = spec.categories.len();
    let mut stems: Vec<String> = Vec::new();
    for c in 0..m {
        let p = if c == category {
            spec.p_exclusive
        } else {
            spec.overlap * spec.p_exclusive
        };
        for k in 0..spec.stems_per_category {
            if rng.bernoulli(p) {
                stems.push(format!("c{c}s{k:02}"));
            }
        }
    }
    let p_sh = spec.overlap * spec.p_shared;
    for k in 0..spec.shared_stems {
        if rng.bernoulli(p_sh) {
            stems.push(format!("sh{k:02}"));
        }
    }
    if stems.is_empty() {
        let k = rng.below(spec.stems_per_category);
        stems.push(format!("c{category}s{k:02}"));
    }
    stems.join(" ")
}

/// Generate labeled train and unlabeled test documents.
///
/// The first `M` training documents take categories 0..M round-robin so
/// every category is covered; all remaining draws follow the mixture.
pub fn gen_corpus(spec: &CorpusSpec, seed: u64) -> Result<GeneratedCorpus> {
    spec.validate()?;
    let m = spec.categories.len();
    let weights: Vec<f64> = spec.categories.iter().map(|c| c.mixture).collect();

    let mut rng = Xoshiro256StarStar::substream(seed, 0);
    let mut train = Vec::with_capacity(spec.n_train);
    for i in 0..spec.n_train {
        let cat = if i < m { i } else { rng.categorical(&weights) };
        let text = emit_document(&mut rng, spec, cat);
        train.push(
            Document::new(format!("tr{i:06}"), text)
                .with_label(spec.categories[cat].name.clone()),
        );
    }

    let mut rng = Xoshiro256StarStar::substream(seed, 1);
    let mut test = Vec::with_capacity(spec.n_test);
    let mut counts = vec![0usize; m];
    for i in 0..spec.n_test {
        let cat = rng.categorical(&weights);
        counts[cat] += 1;
        let text = emit_document(&mut rng, spec, cat);
        test.push(Document::new(format!("te{i:06}"), text));
    }
    let realized_mixture = counts
        .iter()
        .map(|&c| c as f64 / spec.n_test as f64)
        .collect();

    Ok(GeneratedCorpus {
        train,
        test,
        category_names: spec.categories.iter().map(|c| c.name.clone()).collect(),
        realized_mixture,
    })
}

/// Latent process driving a lagged pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LatentProcess {
    /// Cumulative sum of standard normal daily increments, linearly
    /// interpolated between days.
    RandomWalk,
    /// `amplitude * sin(2 pi t / period_days)`.
    Seasonal { period_days: f64, amplitude: f64 },
}

/// Where a weekly observation is stamped within its week.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum WeekStamp {
    /// Last day of the week (the default for ingested weekly data).
    End,
    Midpoint,
}

/// Observation scheme for one side of the pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SamplingScheme {
    Daily,
    Weekly { stamp: WeekStamp },
    /// Daily grid with each day kept independently with `keep_prob`.
    PoissonThinned { keep_prob: f64 },
}

/// Lagged-pair layout: `y(t) = latent(t - lag_days) + noise`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub process: LatentProcess,
    pub lag_days: f64,
    pub x_sampling: SamplingScheme,
    pub y_sampling: SamplingScheme,
    pub noise_sd: f64,
    pub length_days: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SeriesSpec {
    fn validate(&self) -> Result<()> {
        if self.length_days < 2 {
            return Err(Error::Synth("length_days must be >= 2".into()));
        }
        if !self.lag_days.is_finite() {
            return Err(Error::Synth("lag must be finite".into()));
        }
        if self.noise_sd < 0.0 {
            return Err(Error::Synth("noise_sd must be nonnegative".into()));
        }
        if let SamplingScheme::PoissonThinned { keep_prob } = self.x_sampling {
            if !(0.0..=1.0).contains(&keep_prob) {
                return Err(Error::Synth("keep_prob outside [0,1]".into()));
            }
        }
        if let SamplingScheme::PoissonThinned { keep_prob } = self.y_sampling {
            if !(0.0..=1.0).contains(&keep_prob) {
                return Err(Error::Synth("keep_prob outside [0,1]".into()));
            }
        }
        Ok(())
    }
}

/// Latent path evaluated at arbitrary real times.
struct LatentPath {
    /// Grid values on integer days starting at `origin`.
    grid: Vec<f64>,
    origin: i64,
    analytic: Option<(f64, f64)>, // (period, amplitude)
}

impl LatentPath {
    fn build(spec: &SeriesSpec, rng: &mut Xoshiro256StarStar) -> LatentPath {
        match spec.process {
            LatentProcess::Seasonal {
                period_days,
                amplitude,
            } => LatentPath {
                grid: Vec::new(),
                origin: 0,
                analytic: Some((period_days, amplitude)),
            },
            LatentProcess::RandomWalk => {
                let margin = spec.lag_days.abs().ceil() as i64 + 2;
                let origin = -margin;
                let len = spec.length_days as i64 + 2 * margin + 2;
                let mut value = 0.0;
                let grid = (0..len)
                    .map(|_| {
                        value += rng.gaussian();
                        value
                    })
                    .collect();
                LatentPath {
                    grid,
                    origin,
                    analytic: None,
                }
            }
        }
    }

    fn at(&self, t: f64) -> f64 {
        if let Some((period, amplitude)) = self.analytic {
            return amplitude * (2.0 * std::f64::consts::PI * t / period).sin();
        }
        let pos = t - self.origin as f64;
        let lo = pos.floor() as usize;
        let frac = pos - pos.floor();
        if frac == 0.0 {
            self.grid[lo]
        } else {
            self.grid[lo] * (1.0 - frac) + self.grid[lo + 1] * frac
        }
    }
}

fn sampling_times(
    scheme: &SamplingScheme,
    length_days: usize,
    rng: &mut Xoshiro256StarStar,
) -> Vec<f64> {
    match scheme {
        SamplingScheme::Daily => (0..length_days).map(|d| d as f64).collect(),
        SamplingScheme::Weekly { stamp } => {
            let offset = match stamp {
                WeekStamp::End => 6.0,
                WeekStamp::Midpoint => 3.0,
            };
            (0..)
                .map(|k| k as f64 * 7.0 + offset)
                .take_while(|t| *t < length_days as f64)
                .collect()
        }
        SamplingScheme::PoissonThinned { keep_prob } => (0..length_days)
            .filter(|_| rng.bernoulli(*keep_prob))
            .map(|d| d as f64)
            .collect(),
    }
}

/// Generate a lagged pair; `y` carries the latent process delayed by the
/// true lag, each side sampled on its own scheme with independent noise.
pub fn gen_lagged_pair(spec: &SeriesSpec, seed: u64) -> Result<(AsyncSeries, AsyncSeries, f64)> {
    spec.validate()?;
    let mut latent_rng = Xoshiro256StarStar::substream(seed, 0);
    let path = LatentPath::build(spec, &mut latent_rng);

    let mut x_rng = Xoshiro256StarStar::substream(seed, 1);
    let x_times = sampling_times(&spec.x_sampling, spec.length_days, &mut x_rng);
    let x_values: Vec<f64> = x_times
        .iter()
        .map(|&t| path.at(t) + spec.noise_sd * x_rng.gaussian())
        .collect();

    let mut y_rng = Xoshiro256StarStar::substream(seed, 2);
    let y_times = sampling_times(&spec.y_sampling, spec.length_days, &mut y_rng);
    let y_values: Vec<f64> = y_times
        .iter()
        .map(|&t| path.at(t - spec.lag_days) + spec.noise_sd * y_rng.gaussian())
        .collect();

    let x = AsyncSeries::new(x_times, x_values, "x")?;
    let y = AsyncSeries::new(y_times, y_values, "y")?;
    Ok((x, y, spec.lag_days))
}
