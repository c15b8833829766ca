//! Synthetic Zipf corpus and query generator.
//!
//! Tokens are drawn from a Zipf law over a fixed word list, so the head of
//! the distribution behaves like stopwords (present in nearly every
//! document) while the tail is discriminative. Each query samples a few
//! low-DF words from one source document, which is its only relevant
//! document, plus occasionally one frequent noise word. By default the noise
//! word is a frequent token of the source document itself, the way real
//! queries share function words with the passages that answer them.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Query};
use crate::error::{Error, Result};
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_docs: usize,
    /// Distinct word types the Zipf law ranges over.
    pub word_types: usize,
    pub zipf_exponent: f64,
    pub min_doc_len: usize,
    pub max_doc_len: usize,
    /// Words with corpus DF ratio below this count as informative.
    pub informative_max_df: f64,
    pub min_query_terms: usize,
    pub max_query_terms: usize,
    /// Probability of appending one frequent noise word to a query.
    pub noise_prob: f64,
    pub noise_source: NoiseSource,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_docs: 10_000,
            word_types: 2000,
            zipf_exponent: 1.1,
            min_doc_len: 20,
            max_doc_len: 60,
            informative_max_df: 0.02,
            min_query_terms: 2,
            max_query_terms: 4,
            noise_prob: 0.5,
            noise_source: NoiseSource::Document,
            seed: 7,
        }
    }
}

/// Where a query's noise word comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSource {
    /// A token occurrence of the source document above the informative DF
    /// cutoff, so frequent words are picked in proportion to their count.
    Document,
    /// An independent draw from the corpus Zipf law.
    Zipf,
}

impl std::fmt::Display for NoiseSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseSource::Document => "document",
            NoiseSource::Zipf => "zipf",
        })
    }
}

impl std::str::FromStr for NoiseSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "document" => Ok(NoiseSource::Document),
            "zipf" => Ok(NoiseSource::Zipf),
            other => Err(Error::InvalidArgument(format!(
                "unknown noise_source `{other}` (expected document or zipf)"
            ))),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_owned()));
        if self.num_docs == 0 || self.word_types == 0 {
            return bad("num_docs and word_types must be >= 1");
        }
        if self.min_doc_len == 0 || self.min_doc_len > self.max_doc_len {
            return bad("need 1 <= min_doc_len <= max_doc_len");
        }
        if self.min_query_terms == 0 || self.min_query_terms > self.max_query_terms {
            return bad("need 1 <= min_query_terms <= max_query_terms");
        }
        if !(self.zipf_exponent > 0.0) {
            return bad("zipf_exponent must be > 0");
        }
        if !(0.0..=1.0).contains(&self.noise_prob) {
            return bad("noise_prob must lie in [0, 1]");
        }
        Ok(())
    }

    fn zipf(&self) -> Result<Zipf<f64>> {
        Zipf::new(self.word_types as f64, self.zipf_exponent)
            .map_err(|e| Error::InvalidArgument(format!("zipf: {e}")))
    }
}

/// Surface form of the word with Zipf rank `rank` (1-based).
pub fn word(rank: usize) -> String {
    format!("w{rank}")
}

pub fn generate_corpus(config: &SynthConfig) -> Result<Vec<Document>> {
    config.validate()?;
    let zipf = config.zipf()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let docs = (0..config.num_docs)
        .map(|i| {
            let len = rng.random_range(config.min_doc_len..=config.max_doc_len);
            let words: Vec<String> = (0..len).map(|_| word(zipf.sample(&mut rng) as usize)).collect();
            Document {
                id: format!("d{i}"),
                text: words.join(" "),
            }
        })
        .collect();
    Ok(docs)
}

/// Document frequency of every token in `docs`.
pub fn token_df(docs: &[Document]) -> HashMap<String, usize> {
    let mut df: HashMap<String, usize> = HashMap::new();
    for d in docs {
        let unique: HashSet<String> = tokenize(&d.text).into_iter().collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    df
}

/// `count` queries whose source documents are drawn uniformly from `docs`.
///
/// Documents with fewer than `min_query_terms` informative words are
/// skipped. Query ids are `{prefix}{n}`.
pub fn generate_queries(
    docs: &[Document],
    config: &SynthConfig,
    count: usize,
    prefix: &str,
    seed: u64,
) -> Result<Vec<Query>> {
    config.validate()?;
    if docs.is_empty() {
        return Err(Error::EmptyInput("query source corpus"));
    }
    let zipf = config.zipf()?;
    let df = token_df(docs);
    let cutoff = config.informative_max_df * docs.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while queries.len() < count {
        attempts += 1;
        if attempts > 100 * count.max(1) {
            return Err(Error::InvalidArgument(
                "too few documents with enough informative words".into(),
            ));
        }
        let doc = docs.choose(&mut rng).expect("non-empty");
        let tokens = tokenize(&doc.text);
        let informative: Vec<String> = tokens
            .iter()
            .filter(|t| (df[*t] as f64) < cutoff)
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if informative.len() < config.min_query_terms {
            continue;
        }
        let n = rng
            .random_range(config.min_query_terms..=config.max_query_terms)
            .min(informative.len());
        let mut terms: Vec<String> = informative.choose_multiple(&mut rng, n).cloned().collect();
        if rng.random_bool(config.noise_prob) {
            let noise = match config.noise_source {
                NoiseSource::Zipf => Some(word(zipf.sample(&mut rng) as usize)),
                NoiseSource::Document => {
                    let frequent: Vec<&String> =
                        tokens.iter().filter(|t| (df[*t] as f64) >= cutoff).collect();
                    frequent.choose(&mut rng).map(|w| (*w).clone())
                }
            };
            terms.extend(noise);
        }
        queries.push(Query {
            id: format!("{prefix}{}", queries.len()),
            text: terms.join(" "),
            positive_doc_id: doc.id.clone(),
        });
    }
    Ok(queries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig {
            num_docs: 300,
            word_types: 400,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn corpus_shape() {
        let cfg = small();
        let docs = generate_corpus(&cfg).unwrap();
        assert_eq!(docs.len(), 300);
        for d in &docs {
            let n = tokenize(&d.text).len();
            assert!((20..=60).contains(&n));
        }
        assert_eq!(docs, generate_corpus(&cfg).unwrap());
        // the head word behaves like a stopword
        let df = token_df(&docs);
        assert!(df["w1"] as f64 > 0.95 * docs.len() as f64);
    }

    #[test]
    fn queries_come_from_their_source_doc() {
        let cfg = small();
        let docs = generate_corpus(&cfg).unwrap();
        let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.id.as_str(), d)).collect();
        let df = token_df(&docs);
        let qs = generate_queries(&docs, &cfg, 50, "q", 1).unwrap();
        assert_eq!(qs.len(), 50);
        for q in &qs {
            let src: HashSet<String> = tokenize(&by_id[q.positive_doc_id.as_str()].text).into_iter().collect();
            let toks = tokenize(&q.text);
            let informative = toks.iter().filter(|t| src.contains(*t) && (df[*t] as f64) < 6.0).count();
            assert!(informative >= 2, "{q:?}");
            assert!(toks.len() <= 5);
        }
    }

    #[test]
    fn document_noise_words_are_frequent_source_tokens() {
        let cfg = SynthConfig { noise_prob: 1.0, ..small() };
        let docs = generate_corpus(&cfg).unwrap();
        let by_id: HashMap<&str, &Document> = docs.iter().map(|d| (d.id.as_str(), d)).collect();
        let df = token_df(&docs);
        let cutoff = cfg.informative_max_df * docs.len() as f64;
        for q in generate_queries(&docs, &cfg, 50, "q", 3).unwrap() {
            let src: HashSet<String> = tokenize(&by_id[q.positive_doc_id.as_str()].text).into_iter().collect();
            let toks = tokenize(&q.text);
            assert!(toks.iter().all(|t| src.contains(t)), "{q:?}");
            assert_eq!(toks.iter().filter(|t| df[*t] as f64 >= cutoff).count(), 1, "{q:?}");
        }
        assert_eq!("zipf".parse::<NoiseSource>().unwrap(), NoiseSource::Zipf);
    }

    #[test]
    fn invalid_config() {
        let cfg = SynthConfig { min_doc_len: 10, max_doc_len: 5, ..small() };
        assert!(generate_corpus(&cfg).is_err());
    }
}
