//! Aggregate opinion estimation.
//!
//! Two estimators over the same encoded-corpus machinery:
//!
//! * a classify-then-aggregate baseline: each test document gets the category
//!   maximizing the conditional stem-vector likelihood times a prior, and the
//!   assignments are aggregated into category frequencies;
//! * the direct inverse estimator: solve the least-squares system
//!   `P(S|D) * P(D) ~ P(S)` for the aggregate distribution `P(D)` without
//!   classifying individual documents, then project onto the simplex.
//!
//! Rows of the conditional matrix are the training corpus's unique stem
//! vectors. Test-only vectors have no row; their probability mass is dropped
//! from `P(S)` (which is renormalized) and reported as `uncovered_mass`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::Xoshiro256StarStar;
use crate::textproc::EncodedCorpus;

/// Ordered category tags, one designated off-topic.
#[derive(Debug, Clone)]
pub struct CategorySet {
    categories: Vec<String>,
    off_topic: usize,
}

impl CategorySet {
    /// `off_topic` is the index of the noise category (conventionally 0).
    /// A single-category set is allowed for degenerate corpora.
    pub fn new(categories: Vec<String>, off_topic: usize) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::Isa("category set is empty".into()));
        }
        if off_topic >= categories.len() {
            return Err(Error::Isa(format!(
                "off-topic index {off_topic} out of range for {} categories",
                categories.len()
            )));
        }
        let mut seen = categories.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != categories.len() {
            return Err(Error::Isa("category tags are not distinct".into()));
        }
        Ok(CategorySet {
            categories,
            off_topic,
        })
    }

    pub fn from_tags<S: AsRef<str>>(tags: &[S]) -> Result<Self> {
        CategorySet::new(tags.iter().map(|t| t.as_ref().to_string()).collect(), 0)
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn tags(&self) -> &[String] {
        &self.categories
    }

    pub fn off_topic(&self) -> usize {
        self.off_topic
    }

    pub fn index_of(&self, tag: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == tag)
    }
}

/// K x M matrix; column c is the empirical distribution of unique stem
/// vectors among training documents labeled c.
#[derive(Debug, Clone)]
pub struct ConditionalStemMatrix {
    pub values: DMatrix<f64>,
    /// Bit patterns of the row vectors, in row order.
    pub row_bits: Vec<Vec<u8>>,
    pub categories: CategorySet,
}

/// Diagnostics attached to every estimate.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct Diagnostics {
    /// L2 norm of `P(S|D) p - P(S)` at the unconstrained solution.
    pub residual: f64,
    /// Ratio of largest to smallest singular value of the conditional matrix.
    pub condition: f64,
    /// L1 mass moved by the simplex projection.
    pub clipped_mass: f64,
    /// Test probability mass on vectors absent from training.
    pub uncovered_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    Inverse,
}

/// A point on the category simplex with provenance and diagnostics.
#[derive(Debug, Clone)]
pub struct OpinionDistribution {
    pub probs: Vec<f64>,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl OpinionDistribution {
    /// Simplex contract: nonnegative, summing to one.
    pub fn check(&self) -> Result<()> {
        if self.probs.iter().any(|&p| !(0.0..=1.0 + 1e-9).contains(&p)) {
            return Err(Error::Isa("probability outside [0,1]".into()));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Isa(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Column-normalized histogram of training unique vectors per category.
///
/// Every category must have at least one labeled training document.
pub fn estimate_conditional(
    train: &EncodedCorpus,
    cats: &CategorySet,
) -> Result<ConditionalStemMatrix> {
    let k = train.n_unique();
    let m = cats.len();
    let mut counts = DMatrix::<f64>::zeros(k, m);
    for doc in &train.docs {
        if let Some(label) = &doc.label {
            let c = cats
                .index_of(label)
                .ok_or_else(|| Error::Isa(format!("label '{label}' not in category set")))?;
            counts[(doc.vector, c)] += 1.0;
        }
    }
    for (c, tag) in cats.tags().iter().enumerate() {
        let total: f64 = counts.column(c).sum();
        if total == 0.0 {
            return Err(Error::Isa(format!("no training documents for {tag}")));
        }
        for r in 0..k {
            counts[(r, c)] /= total;
        }
    }
    Ok(ConditionalStemMatrix {
        values: counts,
        row_bits: train.unique_vectors.iter().map(|v| v.bits.clone()).collect(),
        categories: cats.clone(),
    })
}

/// Test-side `P(S)` aligned to the training rows.
///
/// Returns the renormalized distribution over the training unique-vector
/// space plus the probability mass of test-only vectors.
pub fn align_test_distribution(
    cond: &ConditionalStemMatrix,
    test: &EncodedCorpus,
) -> Result<(Vec<f64>, f64)> {
    let row_of: HashMap<&[u8], usize> = cond
        .row_bits
        .iter()
        .enumerate()
        .map(|(i, b)| (b.as_slice(), i))
        .collect();
    let n = test.n_docs() as f64;
    if n == 0.0 {
        return Err(Error::Isa("empty test corpus".into()));
    }
    let mut p_s = vec![0.0; cond.row_bits.len()];
    let mut uncovered = 0.0;
    for v in &test.unique_vectors {
        let mass = v.multiplicity as f64 / n;
        match row_of.get(v.bits.as_slice()) {
            Some(&r) => p_s[r] += mass,
            None => uncovered += mass,
        }
    }
    let covered = 1.0 - uncovered;
    if covered <= 0.0 {
        return Err(Error::Isa(
            "no test vector appears in the training corpus".into(),
        ));
    }
    for p in &mut p_s {
        *p /= covered;
    }
    Ok((p_s, uncovered))
}

/// Options for the inverse estimator.
#[derive(Debug, Clone, Copy, Default)]
pub struct InverseOptions {
    /// Ridge term added to the normal equations when the conditional matrix
    /// is rank-deficient. `None` (the default) makes rank deficiency a hard
    /// error; the estimator is otherwise unchanged.
    pub ridge: Option<f64>,
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let candidate = (css - 1.0) / (j + 1) as f64;
        if uj > candidate {
            tau = candidate;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Direct inverse estimator: least-squares solution of
/// `P(S|D) p ~ P(S)` via SVD, projected onto the simplex.
pub fn estimate_inverse(
    cond: &ConditionalStemMatrix,
    test_vector_dist: &[f64],
    opts: InverseOptions,
) -> Result<OpinionDistribution> {
    let (k, m) = cond.values.shape();
    if test_vector_dist.len() != k {
        return Err(Error::Isa(format!(
            "test distribution has {} entries, conditional matrix has {k} rows",
            test_vector_dist.len()
        )));
    }
    if k < m {
        return Err(Error::Isa(format!(
            "fewer unique vectors ({k}) than categories ({m})"
        )));
    }
    let sum: f64 = test_vector_dist.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::Isa(format!(
            "test vector distribution sums to {sum}, not 1"
        )));
    }

    let a = &cond.values;
    let b = DVector::from_column_slice(test_vector_dist);

    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max_sv = sv.iter().cloned().fold(0.0f64, f64::max);
    let min_sv = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = max_sv * f64::EPSILON * k.max(m) as f64;
    let rank = sv.iter().filter(|&&s| s > tol).count();

    let unconstrained: DVector<f64> = if rank < m {
        match opts.ridge {
            None => {
                return Err(Error::Isa(format!(
                    "conditional matrix rank-deficient (rank {rank} < {m} categories)"
                )))
            }
            Some(lambda) => {
                // (A'A + lambda I) p = A' b
                let mut ata = a.transpose() * a;
                for i in 0..m {
                    ata[(i, i)] += lambda;
                }
                let atb = a.transpose() * &b;
                ata.cholesky()
                    .ok_or_else(|| Error::Isa("ridge system not positive definite".into()))?
                    .solve(&atb)
            }
        }
    } else {
        let u = svd.u.as_ref().expect("svd with u");
        let vt = svd.v_t.as_ref().expect("svd with v_t");
        let mut p = DVector::zeros(m);
        for i in 0..rank {
            let coef = u.column(i).dot(&b) / sv[i];
            p += vt.row(i).transpose() * coef;
        }
        p
    };

    let residual = (a * &unconstrained - &b).norm();
    let raw: Vec<f64> = unconstrained.iter().cloned().collect();
    let projected = project_to_simplex(&raw);
    let clipped_mass: f64 = projected
        .iter()
        .zip(&raw)
        .map(|(p, r)| (p - r).abs())
        .sum();

    let dist = OpinionDistribution {
        probs: projected,
        method: Method::Inverse,
        diagnostics: Diagnostics {
            residual,
            condition: if min_sv > 0.0 { max_sv / min_sv } else { f64::INFINITY },
            clipped_mass,
            uncovered_mass: 0.0,
        },
    };
    dist.check()?;
    Ok(dist)
}

/// Per-document Bayes classification plus its aggregate.
///
/// Each covered test document gets `argmax_c P(s|c) * prior(c)`; ties go to
/// the lowest category index. Documents whose vector is absent from training
/// are left unassigned and excluded from the (renormalized) aggregate.
pub fn classify_baseline(
    cond: &ConditionalStemMatrix,
    priors: Option<&[f64]>,
    test: &EncodedCorpus,
) -> Result<(Vec<Option<usize>>, OpinionDistribution)> {
    let m = cond.categories.len();
    let uniform = vec![1.0 / m as f64; m];
    let priors = match priors {
        Some(p) => {
            if p.len() != m {
                return Err(Error::Isa("prior length does not match categories".into()));
            }
            p.to_vec()
        }
        None => uniform,
    };

    let row_of: HashMap<&[u8], usize> = cond
        .row_bits
        .iter()
        .enumerate()
        .map(|(i, b)| (b.as_slice(), i))
        .collect();

    // Classify each unique vector once, then fan out to documents.
    let mut class_of_vec: Vec<Option<usize>> = Vec::with_capacity(test.n_unique());
    for v in &test.unique_vectors {
        let assigned = row_of.get(v.bits.as_slice()).and_then(|&r| {
            let mut best: Option<(usize, f64)> = None;
            for (c, &prior) in priors.iter().enumerate().take(m) {
                let score = cond.values[(r, c)] * prior;
                match best {
                    Some((_, s)) if score <= s => {}
                    _ => best = Some((c, score)),
                }
            }
            match best {
                Some((_, s)) if s > 0.0 => best.map(|(c, _)| c),
                _ => None,
            }
        });
        class_of_vec.push(assigned);
    }

    let mut counts = vec![0.0f64; m];
    let mut covered = 0.0f64;
    let n = test.n_docs() as f64;
    for (v, assigned) in test.unique_vectors.iter().zip(&class_of_vec) {
        if let Some(c) = assigned {
            counts[*c] += v.multiplicity as f64;
            covered += v.multiplicity as f64;
        }
    }
    if covered == 0.0 {
        return Err(Error::Isa(
            "no test document could be classified (no vector covered by training)".into(),
        ));
    }
    let probs: Vec<f64> = counts.iter().map(|c| c / covered).collect();
    let assignments = test
        .docs
        .iter()
        .map(|d| class_of_vec[d.vector])
        .collect();
    let dist = OpinionDistribution {
        probs,
        method: Method::Baseline,
        diagnostics: Diagnostics {
            uncovered_mass: 1.0 - covered / n,
            ..Default::default()
        },
    };
    dist.check()?;
    Ok((assignments, dist))
}

/// Percentile bootstrap over training documents.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BootstrapInterval {
    pub lo: f64,
    pub hi: f64,
    pub sd: f64,
}

const BOOTSTRAP_RETRY_CAP: usize = 100;

/// Resample the training documents with replacement `b` times, re-run the
/// inverse estimator against the fixed test distribution, and return
/// 2.5%/97.5% percentile intervals and standard deviations per category.
/// Deterministic given `seed`; replicate `i` draws from substream `i`.
pub fn bootstrap_ci(
    train: &EncodedCorpus,
    test: &EncodedCorpus,
    cats: &CategorySet,
    b: usize,
    seed: u64,
    opts: InverseOptions,
) -> Result<Vec<BootstrapInterval>> {
    if b < 100 {
        return Err(Error::Isa(format!("bootstrap needs B >= 100, got {b}")));
    }
    let labeled: Vec<&crate::textproc::EncodedDoc> =
        train.docs.iter().filter(|d| d.label.is_some()).collect();
    if labeled.is_empty() {
        return Err(Error::Isa("no labeled training documents".into()));
    }
    let cat_index: HashMap<&str, usize> = cats
        .tags()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let base_cond = estimate_conditional(train, cats)?;
    let (p_s, _uncovered) = align_test_distribution(&base_cond, test)?;

    let k = train.n_unique();
    let m = cats.len();
    let mut replicates: Vec<Vec<f64>> = Vec::with_capacity(b);
    for rep in 0..b {
        let mut rng = Xoshiro256StarStar::substream(seed, rep as u64);
        let mut counts = DMatrix::<f64>::zeros(k, m);
        let mut ok = false;
        for _attempt in 0..BOOTSTRAP_RETRY_CAP {
            counts.fill(0.0);
            let mut seen = vec![false; m];
            for _ in 0..labeled.len() {
                let doc = labeled[rng.below(labeled.len())];
                let c = cat_index[doc.label.as_deref().unwrap()];
                counts[(doc.vector, c)] += 1.0;
                seen[c] = true;
            }
            if seen.iter().all(|&s| s) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Isa(format!(
                "bootstrap replicate {rep} lost a category {BOOTSTRAP_RETRY_CAP} times in a row"
            )));
        }
        for c in 0..m {
            let total: f64 = counts.column(c).sum();
            for r in 0..k {
                counts[(r, c)] /= total;
            }
        }
        let cond = ConditionalStemMatrix {
            values: counts.clone(),
            row_bits: base_cond.row_bits.clone(),
            categories: cats.clone(),
        };
        let est = estimate_inverse(&cond, &p_s, opts)?;
        replicates.push(est.probs);
    }

    let mut out = Vec::with_capacity(m);
    for c in 0..m {
        let mut vals: Vec<f64> = replicates.iter().map(|r| r[c]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lo = percentile(&vals, 0.025);
        let hi = percentile(&vals, 0.975);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (vals.len() - 1) as f64)
            .sqrt();
        out.push(BootstrapInterval { lo, hi, sd });
    }
    Ok(out)
}

/// Linear-interpolation percentile over an already sorted slice.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::{build_lexicon, encode, Document, TokenizerConfig};

    fn corpus(texts_labels: &[(&str, Option<&str>)], prefix: &str) -> Vec<Document> {
        texts_labels
            .iter()
            .enumerate()
            .map(|(i, (t, l))| {
                let mut d = Document::new(format!("{prefix}{i}"), *t);
                if let Some(l) = l {
                    d = d.with_label(*l);
                }
                d
            })
            .collect()
    }

    fn encode_all(docs: &[Document]) -> EncodedCorpus {
        let lex = build_lexicon(docs, &TokenizerConfig::unigrams(1)).unwrap();
        encode(docs, &lex).unwrap()
    }

    #[test]
    fn conditional_disjoint_support_is_identity() {
        let docs = corpus(&[("a", Some("A")), ("b", Some("B"))], "t");
        let enc = encode_all(&docs);
        let cats = CategorySet::from_tags(&["A", "B"]).unwrap();
        let cond = estimate_conditional(&enc, &cats).unwrap();
        // rows sorted by bit pattern: (0,1)="b" then (1,0)="a"
        assert_eq!(cond.values.shape(), (2, 2));
        for c in 0..2 {
            let s: f64 = cond.values.column(c).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        // each column is a point mass
        assert_eq!(cond.values.iter().filter(|&&v| v == 1.0).count(), 2);
    }

    #[test]
    fn conditional_counts_within_category() {
        let docs = corpus(
            &[("a", Some("A")), ("a", Some("A")), ("b", Some("A")), ("b", Some("B"))],
            "t",
        );
        let enc = encode_all(&docs);
        let cats = CategorySet::from_tags(&["A", "B"]).unwrap();
        let cond = estimate_conditional(&enc, &cats).unwrap();
        let col_a: Vec<f64> = cond.values.column(0).iter().cloned().collect();
        let mut sorted = col_a.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((sorted[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((sorted[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_missing_category_errors() {
        let docs = corpus(&[("a", Some("A"))], "t");
        let enc = encode_all(&docs);
        let cats = CategorySet::from_tags(&["A", "C"]).unwrap();
        let err = estimate_conditional(&enc, &cats).unwrap_err();
        assert!(err.to_string().contains("no training documents for C"));
    }

    fn matrix_cond(values: DMatrix<f64>) -> ConditionalStemMatrix {
        let k = values.nrows();
        ConditionalStemMatrix {
            values,
            row_bits: (0..k).map(|i| vec![i as u8]).collect(),
            categories: CategorySet::from_tags(&["A", "B"]).unwrap(),
        }
    }

    #[test]
    fn inverse_identity_design() {
        let cond = matrix_cond(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]));
        let est = estimate_inverse(&cond, &[0.7, 0.3], InverseOptions::default()).unwrap();
        assert!((est.probs[0] - 0.7).abs() < 1e-12);
        assert!((est.probs[1] - 0.3).abs() < 1e-12);
        assert!(est.diagnostics.residual < 1e-12);

        let est = estimate_inverse(&cond, &[0.5, 0.5], InverseOptions::default()).unwrap();
        assert!((est.probs[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inverse_matches_hand_solved_normal_equations() {
        // A = [[0.8,0.2],[0.2,0.8]], b = (0.5,0.5). Normal equations:
        // A'A = [[0.68,0.32],[0.32,0.68]], A'b = (0.5,0.5) => p = (0.5,0.5).
        let cond = matrix_cond(DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.2, 0.8]));
        let est = estimate_inverse(&cond, &[0.5, 0.5], InverseOptions::default()).unwrap();
        assert!((est.probs[0] - 0.5).abs() < 1e-10);
        assert!((est.probs[1] - 0.5).abs() < 1e-10);
        assert!(est.diagnostics.clipped_mass < 1e-10);
    }

    #[test]
    fn inverse_rank_deficient_errors_without_ridge() {
        let cond = matrix_cond(DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]));
        let err = estimate_inverse(&cond, &[0.5, 0.5], InverseOptions::default()).unwrap_err();
        assert!(err.to_string().contains("rank-deficient"));
        let est = estimate_inverse(
            &cond,
            &[0.5, 0.5],
            InverseOptions { ridge: Some(1e-8) },
        )
        .unwrap();
        est.check().unwrap();
    }

    #[test]
    fn inverse_k_less_than_m_errors() {
        let values = DMatrix::from_row_slice(1, 2, &[0.5, 0.5]);
        let cond = ConditionalStemMatrix {
            values,
            row_bits: vec![vec![0]],
            categories: CategorySet::from_tags(&["A", "B"]).unwrap(),
        };
        assert!(estimate_inverse(&cond, &[1.0], InverseOptions::default()).is_err());
    }

    #[test]
    fn simplex_projection_basics() {
        let p = project_to_simplex(&[0.7, 0.3]);
        assert!((p[0] - 0.7).abs() < 1e-15);
        let p = project_to_simplex(&[1.2, -0.2]);
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p[1].abs() < 1e-12);
        let p = project_to_simplex(&[0.5, 0.1, -0.3]);
        let s: f64 = p.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn baseline_unique_maximizer_and_tie_break() {
        let docs = corpus(&[("a", Some("A")), ("b", Some("B"))], "t");
        let enc = encode_all(&docs);
        let cats = CategorySet::from_tags(&["A", "B"]).unwrap();
        let cond = estimate_conditional(&enc, &cats).unwrap();

        let lex = enc.lexicon.clone();
        let test = encode(&corpus(&[("a", None)], "s"), &lex).unwrap();
        let (assigned, _) = classify_baseline(&cond, None, &test).unwrap();
        assert_eq!(assigned, vec![Some(0)]);

        // Tie: both categories emit the same vector with equal probability.
        let docs = corpus(&[("a", Some("A")), ("a", Some("B"))], "t");
        let enc = encode_all(&docs);
        let cond = estimate_conditional(&enc, &cats).unwrap();
        let test = encode(&corpus(&[("a", None)], "s"), &enc.lexicon).unwrap();
        let (assigned, _) = classify_baseline(&cond, None, &test).unwrap();
        assert_eq!(assigned, vec![Some(0)], "tie must go to the lowest index");
    }

    #[test]
    fn baseline_aggregate_on_disjoint_mixture() {
        // 70% A-typical, 30% B-typical vectors with disjoint support.
        let docs = corpus(&[("a", Some("A")), ("b", Some("B"))], "t");
        let enc = encode_all(&docs);
        let cats = CategorySet::from_tags(&["A", "B"]).unwrap();
        let cond = estimate_conditional(&enc, &cats).unwrap();
        let mut test_docs = Vec::new();
        for i in 0..70 {
            test_docs.push(Document::new(format!("sa{i}"), "a"));
        }
        for i in 0..30 {
            test_docs.push(Document::new(format!("sb{i}"), "b"));
        }
        let test = encode(&test_docs, &enc.lexicon).unwrap();
        let (_, agg) = classify_baseline(&cond, None, &test).unwrap();
        assert!((agg.probs[0] - 0.7).abs() < 1e-12);
        assert!((agg.probs[1] - 0.3).abs() < 1e-12);

        // On disjoint point-mass support the inverse estimator agrees exactly.
        let (p_s, unc) = align_test_distribution(&cond, &test).unwrap();
        assert_eq!(unc, 0.0);
        let inv = estimate_inverse(&cond, &p_s, InverseOptions::default()).unwrap();
        assert!((inv.probs[0] - 0.7).abs() < 1e-12);
        assert!((inv.probs[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn uncovered_mass_reported_and_renormalized() {
        let docs = corpus(&[("a", Some("A")), ("b", Some("B"))], "t");
        let cats = CategorySet::from_tags(&["A", "B"]).unwrap();
        // lexicon must cover 'c' so the test vector is distinct but unseen
        let lex = build_lexicon(
            &corpus(&[("a", None), ("b", None), ("c", None), ("c", None)], "x"),
            &TokenizerConfig::unigrams(1),
        )
        .unwrap();
        let train = encode(&docs, &lex).unwrap();
        let test = encode(
            &corpus(&[("a", None), ("a", None), ("c", None), ("b", None)], "s"),
            &lex,
        )
        .unwrap();
        let cond = estimate_conditional(&train, &cats).unwrap();
        let (p_s, uncovered) = align_test_distribution(&cond, &test).unwrap();
        assert!((uncovered - 0.25).abs() < 1e-12);
        let s: f64 = p_s.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_degenerate_single_category() {
        let docs = corpus(&[("a", Some("A")), ("b", Some("A")), ("a b", Some("A"))], "t");
        let enc = encode_all(&docs);
        let cats = CategorySet::new(vec!["A".into()], 0).unwrap();
        let test = encode(&corpus(&[("a", None), ("b", None)], "s"), &enc.lexicon).unwrap();
        let ci = bootstrap_ci(&enc, &test, &cats, 100, 7, InverseOptions::default()).unwrap();
        assert_eq!(ci.len(), 1);
        assert!((ci[0].lo - 1.0).abs() < 1e-9);
        assert!((ci[0].hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bootstrap_deterministic_given_seed() {
        let docs = corpus(
            &[
                ("a", Some("A")),
                ("a b", Some("A")),
                ("b", Some("B")),
                ("b c", Some("B")),
                ("c", Some("B")),
            ],
            "t",
        );
        let enc = encode_all(&docs);
        let cats = CategorySet::from_tags(&["A", "B"]).unwrap();
        let test = encode(&corpus(&[("a", None), ("b", None), ("c", None)], "s"), &enc.lexicon)
            .unwrap();
        let c1 = bootstrap_ci(&enc, &test, &cats, 120, 11, InverseOptions::default()).unwrap();
        let c2 = bootstrap_ci(&enc, &test, &cats, 120, 11, InverseOptions::default()).unwrap();
        for (a, b) in c1.iter().zip(&c2) {
            assert_eq!(a.lo, b.lo);
            assert_eq!(a.hi, b.hi);
            assert_eq!(a.sd, b.sd);
        }
    }

    #[test]
    fn bootstrap_rejects_small_b() {
        let docs = corpus(&[("a", Some("A"))], "t");
        let enc = encode_all(&docs);
        let cats = CategorySet::new(vec!["A".into()], 0).unwrap();
        let test = encode(&corpus(&[("a", None)], "s"), &enc.lexicon).unwrap();
        assert!(bootstrap_ci(&enc, &test, &cats, 50, 1, InverseOptions::default()).is_err());
    }
}
