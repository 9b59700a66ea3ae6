//! Distributional properties that sit above the unit level: bootstrap
//! interval shrinkage, the Epps effect under asynchronous sampling, and the
//! null behaviour of canonical correlations. All generators run on fixed
//! seeds, so these checks are deterministic despite their statistical flavour.

use swbkit::isa;
use swbkit::leadlag::hy_correlation;
use swbkit::rng::Xoshiro256StarStar;
use swbkit::series::AsyncSeries;
use swbkit::stats;
use swbkit::synth::{
    gen_corpus, gen_lagged_pair, CategorySpec, CorpusSpec, LatentProcess, SamplingScheme,
    SeriesSpec,
};
use swbkit::textproc;

use nalgebra::DMatrix;

fn opinion_spec(n_train: usize, n_test: usize) -> CorpusSpec {
    CorpusSpec {
        categories: vec![
            CategorySpec { name: "off".into(), mixture: 0.5 },
            CategorySpec { name: "neg".into(), mixture: 0.3 },
            CategorySpec { name: "pos".into(), mixture: 0.2 },
        ],
        stems_per_category: 2,
        shared_stems: 0,
        p_exclusive: 0.8,
        p_shared: 0.5,
        overlap: 0.5,
        n_train,
        n_test,
        seed: None,
    }
}

fn mean_ci_width(spec: &CorpusSpec, corpus_seed: u64, boot_seed: u64) -> f64 {
    let g = gen_corpus(spec, corpus_seed).unwrap();
    let all: Vec<_> = g.train.iter().chain(&g.test).cloned().collect();
    let lex = textproc::build_lexicon(&all, &textproc::TokenizerConfig::unigrams(1)).unwrap();
    let train = textproc::encode(&g.train, &lex).unwrap();
    let test = textproc::encode(&g.test, &lex).unwrap();
    let cats = isa::CategorySet::from_tags(&["off", "neg", "pos"]).unwrap();
    let ci = isa::bootstrap_ci(&train, &test, &cats, 500, boot_seed, isa::InverseOptions::default())
        .unwrap();
    ci.iter().map(|c| c.hi - c.lo).sum::<f64>() / ci.len() as f64
}

/// Quadrupling the training sample roughly halves the bootstrap interval.
#[test]
fn bootstrap_width_shrinks_with_root_n() {
    for (corpus_seed, boot_seed) in [(31u64, 1u64), (77, 2)] {
        let small = mean_ci_width(&opinion_spec(500, 4000), corpus_seed, boot_seed);
        let large = mean_ci_width(&opinion_spec(2000, 4000), corpus_seed, boot_seed);
        let ratio = large / small;
        assert!(
            (0.35..=0.65).contains(&ratio),
            "width ratio {ratio} (small {small}, large {large}) outside the root-n band"
        );
    }
}

/// Align a series onto the integer-day grid by carrying the last observation
/// forward, the classical previous-tick scheme.
fn previous_tick(series: &AsyncSeries, length_days: usize) -> Vec<Option<f64>> {
    let mut out = vec![None; length_days];
    let mut idx = 0;
    let mut last = None;
    for (d, slot) in out.iter_mut().enumerate() {
        while idx < series.times().len() && series.times()[idx] <= d as f64 {
            last = Some(series.values()[idx]);
            idx += 1;
        }
        *slot = last;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}

fn previous_tick_corr(x: &AsyncSeries, y: &AsyncSeries, length_days: usize) -> f64 {
    let gx = previous_tick(x, length_days);
    let gy = previous_tick(y, length_days);
    let mut dx = Vec::new();
    let mut dy = Vec::new();
    for d in 1..length_days {
        if let (Some(a0), Some(a1), Some(b0), Some(b1)) = (gx[d - 1], gx[d], gy[d - 1], gy[d]) {
            dx.push(a1 - a0);
            dy.push(b1 - b0);
        }
    }
    pearson(&dx, &dy)
}

/// Under random asynchronous thinning, previous-tick correlations collapse
/// toward zero (the Epps effect) while the overlap-interval estimator
/// degrades strictly less, seed for seed.
#[test]
fn epps_effect_direction() {
    let length = 300usize;
    let base = SeriesSpec {
        process: LatentProcess::RandomWalk,
        lag_days: 0.0,
        x_sampling: SamplingScheme::Daily,
        y_sampling: SamplingScheme::Daily,
        noise_sd: 0.2,
        length_days: length,
        seed: None,
    };
    let thinned = SeriesSpec {
        x_sampling: SamplingScheme::PoissonThinned { keep_prob: 0.4 },
        y_sampling: SamplingScheme::PoissonThinned { keep_prob: 0.4 },
        ..base.clone()
    };
    for seed in 0..50u64 {
        let (fx, fy, _) = gen_lagged_pair(&base, seed).unwrap();
        let (tx, ty, _) = gen_lagged_pair(&thinned, seed).unwrap();
        let (hy_full, _) = hy_correlation(&fx, &fy).unwrap();
        let (hy_thin, _) = hy_correlation(&tx, &ty).unwrap();
        let pt_full = previous_tick_corr(&fx, &fy, length);
        let pt_thin = previous_tick_corr(&tx, &ty, length);
        let hy_drop = hy_full - hy_thin;
        let pt_drop = pt_full - pt_thin;
        assert!(
            hy_drop < pt_drop,
            "seed {seed}: overlap estimator degraded more ({hy_drop}) than previous-tick ({pt_drop})"
        );
    }
}

/// Independent noise should produce only small canonical correlations.
#[test]
fn cca_null_correlations_stay_small() {
    for seed in 0..10u64 {
        let mut rng = Xoshiro256StarStar::new(seed);
        let n = 200;
        let xd = DMatrix::from_fn(n, 2, |_, _| rng.gaussian());
        let yd = DMatrix::from_fn(n, 2, |_, _| rng.gaussian());
        let units: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
        let x = stats::IndicatorMatrix::new(
            units.clone(),
            vec!["x0".into(), "x1".into()],
            xd,
        )
        .unwrap();
        let y = stats::IndicatorMatrix::new(units, vec!["y0".into(), "y1".into()], yd).unwrap();
        let res = stats::cca(&x, &y).unwrap();
        for r in &res.correlations {
            assert!(*r < 0.25, "seed {seed}: null canonical correlation {r}");
        }
    }
}
