//! Estimation toolkit for social-media well-being indicators.
//!
//! The crate covers the full batch pipeline:
//!
//! * [`textproc`] — tokenization and binary stem-incidence encoding;
//! * [`isa`] — aggregate opinion distributions, both the
//!   classify-then-aggregate baseline and the direct inverse estimator;
//! * [`wellbeing`] — component scores, the composite well-being index, and
//!   per-period integration;
//! * [`leadlag`] — Hayashi-Yoshida covariance and lead-lag estimation for
//!   asynchronously observed series;
//! * [`stats`] — canonical correlation analysis with Wilks's Lambda
//!   screening, and OLS regression diagnostics;
//! * [`synth`] — seeded generators with known ground truth, used as test
//!   oracles and benchmark fixtures.

pub mod error;
pub mod io;
pub mod isa;
pub mod leadlag;
pub mod rng;
pub mod series;
pub mod stats;
pub mod synth;
pub mod textproc;
pub mod wellbeing;

pub use error::{Error, Result};
