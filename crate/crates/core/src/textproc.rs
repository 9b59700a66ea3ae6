//! Tokenization and binary stem-incidence encoding.
//!
//! Documents are tokenized (NFC normalization, case folding, split on
//! non-alphanumeric runs), optionally stemmed, expanded into n-grams, and
//! encoded as binary incidence vectors over a fixed, lexicographically
//! ordered lexicon. Identical vectors are merged with multiplicities; the
//! deduplicated unique-vector space is what the aggregate estimators in
//! [`crate::isa`] operate on.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// A single input text with optional label and bookkeeping metadata.
#[derive(Debug, Clone)]
pub struct Document {
    pub id: String,
    pub text: String,
    /// Hand-coded category, or `None` for unlabeled ("NA") documents.
    pub label: Option<String>,
    /// Observation date, when the corpus carries one.
    pub timestamp: Option<chrono::NaiveDate>,
    /// Geographic or grouping key.
    pub unit: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            label: None,
            timestamp: None,
            unit: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// Pluggable stemming pass. The default configuration applies none.
pub trait Stemmer: Send + Sync {
    fn stem(&self, token: &str) -> String;
    /// Name recorded in the persisted lexicon header.
    fn name(&self) -> &str;
}

/// Tokenization settings. Stemming is off unless a [`Stemmer`] is supplied.
#[derive(Clone)]
pub struct TokenizerConfig {
    /// Case folding (default on).
    pub lowercase: bool,
    /// N-gram orders to emit, each >= 1 (default unigrams + bigrams).
    pub ngram_orders: Vec<usize>,
    /// Minimum number of documents a gram must appear in (default 2).
    pub min_doc_freq: usize,
    pub stemmer: Option<Arc<dyn Stemmer>>,
}

impl std::fmt::Debug for TokenizerConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TokenizerConfig")
            .field("lowercase", &self.lowercase)
            .field("ngram_orders", &self.ngram_orders)
            .field("min_doc_freq", &self.min_doc_freq)
            .field("stemmer", &self.stemmer.as_ref().map(|s| s.name().to_string()))
            .finish()
    }
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            ngram_orders: vec![1, 2],
            min_doc_freq: 2,
            stemmer: None,
        }
    }
}

impl TokenizerConfig {
    pub fn unigrams(min_doc_freq: usize) -> Self {
        TokenizerConfig {
            ngram_orders: vec![1],
            min_doc_freq,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ngram_orders.is_empty() {
            return Err(Error::TextProc("no n-gram orders configured".into()));
        }
        if self.ngram_orders.contains(&0) {
            return Err(Error::TextProc("n-gram orders must be >= 1".into()));
        }
        Ok(())
    }

    /// One-line header for lexicon persistence.
    pub fn header(&self) -> String {
        let orders: Vec<String> = self.ngram_orders.iter().map(|n| n.to_string()).collect();
        format!(
            "#config lowercase={} ngrams={} min_df={} stem={}",
            self.lowercase,
            orders.join(","),
            self.min_doc_freq,
            self.stemmer.as_ref().map_or("off", |s| s.name()),
        )
    }
}

/// Fixed, deterministically ordered stem vocabulary.
#[derive(Debug, Clone)]
pub struct StemLexicon {
    stems: Vec<String>,
    index: HashMap<String, usize>,
    pub config: TokenizerConfig,
}

impl StemLexicon {
    fn from_stems(mut stems: Vec<String>, config: TokenizerConfig) -> Result<Self> {
        stems.sort();
        stems.dedup();
        if stems.is_empty() {
            return Err(Error::TextProc(
                "lexicon is empty (no stem met the frequency threshold)".into(),
            ));
        }
        let index = stems
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(StemLexicon {
            stems,
            index,
            config,
        })
    }

    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }

    pub fn stems(&self) -> &[String] {
        &self.stems
    }

    /// Plain-text persistence: header line with the config, one stem per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.config.header());
        for s in &self.stems {
            let _ = writeln!(out, "{s}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::TextProc("empty lexicon file".into()))?;
        if !header.starts_with("#config ") {
            return Err(Error::TextProc("lexicon file missing #config header".into()));
        }
        let mut config = TokenizerConfig::default();
        for kv in header.trim_start_matches("#config ").split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::TextProc(format!("bad lexicon header entry '{kv}'")))?;
            match k {
                "lowercase" => {
                    config.lowercase = v
                        .parse()
                        .map_err(|_| Error::TextProc(format!("bad lowercase value '{v}'")))?
                }
                "ngrams" => {
                    config.ngram_orders = v
                        .split(',')
                        .map(|n| {
                            n.parse()
                                .map_err(|_| Error::TextProc(format!("bad n-gram order '{n}'")))
                        })
                        .collect::<Result<_>>()?
                }
                "min_df" => {
                    config.min_doc_freq = v
                        .parse()
                        .map_err(|_| Error::TextProc(format!("bad min_df value '{v}'")))?
                }
                "stem" => {
                    if v != "off" {
                        return Err(Error::TextProc(format!(
                            "lexicon was built with stemmer '{v}'; reload it with the same stemmer"
                        )));
                    }
                }
                other => return Err(Error::TextProc(format!("unknown lexicon header key '{other}'"))),
            }
        }
        let stems: Vec<String> = lines.map(|l| l.to_string()).filter(|l| !l.is_empty()).collect();
        StemLexicon::from_stems(stems, config)
    }
}

/// Binary incidence vector shared by one or more documents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StemVector {
    pub bits: Vec<u8>,
    pub multiplicity: usize,
}

/// A corpus encoded over a lexicon, deduplicated into unique vectors.
#[derive(Debug, Clone)]
pub struct EncodedCorpus {
    pub lexicon: StemLexicon,
    /// Unique vectors, sorted lexicographically by bit pattern.
    pub unique_vectors: Vec<StemVector>,
    /// Documents in input order, each pointing at its unique vector.
    pub docs: Vec<EncodedDoc>,
    /// Number of documents that matched no lexicon stem (all-zero vector).
    pub zero_vector_docs: usize,
}

#[derive(Debug, Clone)]
pub struct EncodedDoc {
    pub id: String,
    pub vector: usize,
    pub label: Option<String>,
}

impl EncodedCorpus {
    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn n_unique(&self) -> usize {
        self.unique_vectors.len()
    }

    /// Empirical distribution of unique vectors over the whole corpus.
    pub fn vector_distribution(&self) -> Vec<f64> {
        let n = self.n_docs() as f64;
        self.unique_vectors
            .iter()
            .map(|v| v.multiplicity as f64 / n)
            .collect()
    }
}

/// Split into normalized tokens: NFC, optional case folding, non-alphanumeric
/// separators, optional stemming.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let normalized: String = text.nfc().collect();
    let folded = if config.lowercase {
        normalized.to_lowercase()
    } else {
        normalized
    };
    folded
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| match &config.stemmer {
            Some(s) => s.stem(t),
            None => t.to_string(),
        })
        .collect()
}

/// All n-grams of the configured orders, joined by single spaces.
fn grams(tokens: &[String], orders: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    for &n in orders {
        if tokens.len() < n {
            continue;
        }
        for window in tokens.windows(n) {
            out.push(window.join(" "));
        }
    }
    out
}

/// Build the stem vocabulary from a corpus: every gram appearing in at least
/// `min_doc_freq` documents, sorted lexicographically.
pub fn build_lexicon(docs: &[Document], config: &TokenizerConfig) -> Result<StemLexicon> {
    config.validate()?;
    if docs.is_empty() {
        return Err(Error::TextProc("empty corpus".into()));
    }
    let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
    let mut any_tokens = false;
    for doc in docs {
        let tokens = tokenize(&doc.text, config);
        if tokens.is_empty() {
            continue;
        }
        any_tokens = true;
        let mut seen: Vec<String> = grams(&tokens, &config.ngram_orders);
        seen.sort();
        seen.dedup();
        for g in seen {
            *doc_freq.entry(g).or_insert(0) += 1;
        }
    }
    if !any_tokens {
        return Err(Error::TextProc("all documents tokenize to nothing".into()));
    }
    let stems: Vec<String> = doc_freq
        .into_iter()
        .filter(|(_, df)| *df >= config.min_doc_freq)
        .map(|(g, _)| g)
        .collect();
    StemLexicon::from_stems(stems, config.clone())
}

/// Encode documents as binary incidence vectors over `lexicon`, merging
/// identical vectors. Unique vectors are ordered by bit pattern so the result
/// does not depend on document order.
pub fn encode(docs: &[Document], lexicon: &StemLexicon) -> Result<EncodedCorpus> {
    if lexicon.is_empty() {
        return Err(Error::TextProc("empty lexicon".into()));
    }
    let mut duplicate_check: HashMap<&str, ()> = HashMap::with_capacity(docs.len());
    for d in docs {
        if duplicate_check.insert(&d.id, ()).is_some() {
            return Err(Error::TextProc(format!("duplicate document id '{}'", d.id)));
        }
    }

    let config = &lexicon.config;
    let mut per_doc: Vec<(Vec<u8>, &Document)> = Vec::with_capacity(docs.len());
    let mut zero_vector_docs = 0usize;
    for doc in docs {
        let tokens = tokenize(&doc.text, config);
        let mut bits = vec![0u8; lexicon.len()];
        for g in grams(&tokens, &config.ngram_orders) {
            if let Some(&i) = lexicon.index.get(&g) {
                bits[i] = 1;
            }
        }
        if bits.iter().all(|&b| b == 0) {
            zero_vector_docs += 1;
        }
        per_doc.push((bits, doc));
    }

    // Deterministic unique-vector order: lexicographic over the bit pattern.
    let mut distinct: Vec<Vec<u8>> = per_doc.iter().map(|(b, _)| b.clone()).collect();
    distinct.sort();
    distinct.dedup();
    let vec_index: HashMap<&[u8], usize> = distinct
        .iter()
        .enumerate()
        .map(|(i, b)| (b.as_slice(), i))
        .collect();

    let mut unique_vectors: Vec<StemVector> = distinct
        .iter()
        .map(|b| StemVector {
            bits: b.clone(),
            multiplicity: 0,
        })
        .collect();
    let mut encoded_docs = Vec::with_capacity(docs.len());
    for (bits, doc) in &per_doc {
        let idx = vec_index[bits.as_slice()];
        unique_vectors[idx].multiplicity += 1;
        encoded_docs.push(EncodedDoc {
            id: doc.id.clone(),
            vector: idx,
            label: doc.label.clone(),
        });
    }

    Ok(EncodedCorpus {
        lexicon: lexicon.clone(),
        unique_vectors,
        docs: encoded_docs,
        zero_vector_docs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(texts: &[&str]) -> Vec<Document> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::new(format!("d{i}"), *t))
            .collect()
    }

    #[test]
    fn lexicon_unigrams_min_df_1() {
        let lex = build_lexicon(&docs(&["a b", "b c"]), &TokenizerConfig::unigrams(1)).unwrap();
        assert_eq!(lex.stems(), &["a", "b", "c"]);
    }

    #[test]
    fn lexicon_min_df_filter() {
        let lex = build_lexicon(&docs(&["a b", "b c"]), &TokenizerConfig::unigrams(2)).unwrap();
        assert_eq!(lex.stems(), &["b"]);
    }

    #[test]
    fn lexicon_bigrams_only() {
        let config = TokenizerConfig {
            ngram_orders: vec![2],
            min_doc_freq: 1,
            ..Default::default()
        };
        let lex = build_lexicon(&docs(&["x y", "x y"]), &config).unwrap();
        assert_eq!(lex.stems(), &["x y"]);
    }

    #[test]
    fn lexicon_empty_corpus_errors() {
        assert!(build_lexicon(&[], &TokenizerConfig::unigrams(1)).is_err());
        assert!(build_lexicon(&docs(&["...", "!!"]), &TokenizerConfig::unigrams(1)).is_err());
    }

    #[test]
    fn encode_merges_duplicates() {
        let lex = StemLexicon::from_stems(
            vec!["a".into(), "b".into(), "c".into()],
            TokenizerConfig::unigrams(1),
        )
        .unwrap();
        let enc = encode(&docs(&["a b", "a b"]), &lex).unwrap();
        assert_eq!(enc.n_unique(), 1);
        assert_eq!(enc.unique_vectors[0].bits, vec![1, 1, 0]);
        assert_eq!(enc.unique_vectors[0].multiplicity, 2);
    }

    #[test]
    fn encode_distinct_vectors() {
        let lex = StemLexicon::from_stems(
            vec!["a".into(), "b".into(), "c".into()],
            TokenizerConfig::unigrams(1),
        )
        .unwrap();
        let enc = encode(&docs(&["a", "c"]), &lex).unwrap();
        assert_eq!(enc.n_unique(), 2);
        let bits: Vec<&Vec<u8>> = enc.unique_vectors.iter().map(|v| &v.bits).collect();
        assert!(bits.contains(&&vec![1, 0, 0]));
        assert!(bits.contains(&&vec![0, 0, 1]));
    }

    #[test]
    fn encode_out_of_lexicon_maps_to_zero_vector() {
        let lex = StemLexicon::from_stems(
            vec!["a".into(), "b".into(), "c".into()],
            TokenizerConfig::unigrams(1),
        )
        .unwrap();
        let enc = encode(&docs(&["z"]), &lex).unwrap();
        assert_eq!(enc.n_unique(), 1);
        assert_eq!(enc.unique_vectors[0].bits, vec![0, 0, 0]);
        assert_eq!(enc.zero_vector_docs, 1);
    }

    #[test]
    fn multiplicities_sum_to_doc_count() {
        let texts = ["a b", "b c", "a", "a b", "c c c", "b"];
        let lex = build_lexicon(&docs(&texts), &TokenizerConfig::unigrams(1)).unwrap();
        let enc = encode(&docs(&texts), &lex).unwrap();
        let total: usize = enc.unique_vectors.iter().map(|v| v.multiplicity).sum();
        assert_eq!(total, texts.len());
    }

    #[test]
    fn permuting_documents_preserves_vector_multiset() {
        let texts = ["a b", "b c", "a", "a b", "b"];
        let mut permuted = texts;
        permuted.reverse();
        let lex = build_lexicon(&docs(&texts), &TokenizerConfig::unigrams(1)).unwrap();
        let e1 = encode(&docs(&texts), &lex).unwrap();
        let e2 = encode(&docs(&permuted), &lex).unwrap();
        assert_eq!(e1.unique_vectors, e2.unique_vectors);
    }

    #[test]
    fn encoding_is_deterministic() {
        let texts = ["caffè latte", "CAFFÈ", "latte e miele", "miele"];
        let config = TokenizerConfig {
            min_doc_freq: 1,
            ..Default::default()
        };
        let lex1 = build_lexicon(&docs(&texts), &config).unwrap();
        let lex2 = build_lexicon(&docs(&texts), &config).unwrap();
        assert_eq!(lex1.stems(), lex2.stems());
        let e1 = encode(&docs(&texts), &lex1).unwrap();
        let e2 = encode(&docs(&texts), &lex2).unwrap();
        assert_eq!(e1.unique_vectors, e2.unique_vectors);
    }

    #[test]
    fn case_folding_and_nfc() {
        // "é" composed vs decomposed must collide after NFC.
        let composed = "caf\u{e9}";
        let decomposed = "cafe\u{301}";
        let config = TokenizerConfig::unigrams(1);
        let t1 = tokenize(composed, &config);
        let t2 = tokenize(decomposed, &config);
        assert_eq!(t1, t2);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let lex = StemLexicon::from_stems(vec!["a".into()], TokenizerConfig::unigrams(1)).unwrap();
        let two = vec![Document::new("same", "a"), Document::new("same", "a")];
        assert!(encode(&two, &lex).is_err());
    }

    #[test]
    fn lexicon_roundtrip_through_text() {
        let texts = ["a b", "b c", "a b c"];
        let lex = build_lexicon(&docs(&texts), &TokenizerConfig::default()).unwrap();
        let reloaded = StemLexicon::from_text(&lex.to_text()).unwrap();
        assert_eq!(lex.stems(), reloaded.stems());
        assert_eq!(lex.config.min_doc_freq, reloaded.config.min_doc_freq);
        assert_eq!(lex.config.ngram_orders, reloaded.config.ngram_orders);
    }
}
