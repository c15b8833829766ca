//! Tokenization, vocabulary construction, and raw-count vectorization.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sparse::{SparseVector, TermId, TermSet};

/// Lowercases `text` and splits it on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|tok| !tok.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Frozen, lexicographically sorted term list with dense ids `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    term_to_id: HashMap<String, TermId>,
}

impl Vocabulary {
    /// Builds a vocabulary from terms. Terms are sorted; duplicates are an error.
    pub fn from_terms(terms: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut terms: Vec<String> = terms.into_iter().collect();
        terms.sort();
        if let Some(pair) = terms.windows(2).find(|p| p[0] == p[1]) {
            return Err(Error::InvalidArgument(format!(
                "duplicate vocabulary term `{}`",
                pair[0]
            )));
        }
        if terms.iter().any(String::is_empty) {
            return Err(Error::InvalidArgument("empty vocabulary term".into()));
        }
        let term_to_id = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();
        Ok(Self { terms, term_to_id })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.term_to_id.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Binary query for `text`: the set of in-vocabulary token ids.
    pub fn query_terms(&self, text: &str) -> TermSet {
        tokenize(text).iter().filter_map(|t| self.id(t)).collect()
    }

    /// Newline-delimited term list; line number is the term id.
    pub fn to_file_contents(&self) -> String {
        let mut out = String::with_capacity(self.terms.iter().map(|t| t.len() + 1).sum());
        for t in &self.terms {
            out.push_str(t);
            out.push('\n');
        }
        out
    }

    /// First eight bytes of the SHA-256 of the persisted term list.
    pub fn content_hash(&self) -> u64 {
        let digest = Sha256::digest(self.to_file_contents().as_bytes());
        u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_file_contents()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let terms: Vec<String> = contents.lines().map(str::to_owned).collect();
        if terms.is_empty() {
            return Err(Error::corrupt("vocabulary", "no terms"));
        }
        // Line order is the id assignment, so it must already be sorted.
        if terms.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::corrupt(
                "vocabulary",
                "terms are not strictly increasing",
            ));
        }
        Self::from_terms(terms)
    }
}

/// Vocabulary of every token that occurs in at least `min_df` distinct documents.
pub fn build_vocab<S: AsRef<str>>(corpus: &[Vec<S>], min_df: usize) -> Result<Vocabulary> {
    if min_df == 0 {
        return Err(Error::InvalidArgument("min_df must be at least 1".into()));
    }
    let mut doc_freq: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        let unique: HashSet<&str> = doc.iter().map(AsRef::as_ref).collect();
        for tok in unique {
            *doc_freq.entry(tok).or_default() += 1;
        }
    }
    let terms: Vec<String> = doc_freq
        .into_iter()
        .filter(|&(_, df)| df >= min_df)
        .map(|(t, _)| t.to_owned())
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary { min_df });
    }
    Vocabulary::from_terms(terms)
}

/// Raw term counts of `tokens`; out-of-vocabulary tokens are ignored.
pub fn vectorize_counts<S: AsRef<str>>(
    doc_id: impl Into<String>,
    tokens: &[S],
    vocab: &Vocabulary,
) -> SparseVector {
    let mut counts: BTreeMap<TermId, f64> = BTreeMap::new();
    for tok in tokens {
        if let Some(id) = vocab.id(tok.as_ref()) {
            *counts.entry(id).or_default() += 1.0;
        }
    }
    SparseVector::from_sorted_unchecked(doc_id.into(), counts.into_iter().collect())
}
