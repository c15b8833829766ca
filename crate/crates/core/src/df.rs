//! Document-frequency statistics over encoded vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{SparseVector, TermId};

/// Per-term count of vectors whose weight exceeds `epsilon`, over a sample
/// of `sample_size` vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfTable {
    df: Vec<u32>,
    sample_size: usize,
    epsilon: f64,
}

impl DfTable {
    pub fn from_counts(df: Vec<u32>, sample_size: usize, epsilon: f64) -> Result<Self> {
        if sample_size == 0 {
            return Err(Error::InvalidArgument("DF sample size must be >= 1".into()));
        }
        if let Some(t) = df.iter().position(|&d| d as usize > sample_size) {
            return Err(Error::InvalidArgument(format!(
                "DF of term {t} exceeds sample size {sample_size}"
            )));
        }
        Ok(Self {
            df,
            sample_size,
            epsilon,
        })
    }

    pub fn df(&self, term: TermId) -> u32 {
        self.df[term as usize]
    }

    pub fn counts(&self) -> &[u32] {
        &self.df
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.df.len()
    }

    /// `DF_t / |C|`.
    pub fn ratio(&self, term: TermId) -> f64 {
        self.df[term as usize] as f64 / self.sample_size as f64
    }

    /// The `n` most frequent terms, by descending DF then ascending id.
    pub fn top_terms(&self, n: usize) -> Vec<(TermId, u32)> {
        let mut all: Vec<(TermId, u32)> = self
            .df
            .iter()
            .enumerate()
            .map(|(t, &d)| (t as TermId, d))
            .collect();
        all.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        all.truncate(n);
        all
    }
}

/// Counts, for each term, how many of `vectors` give it weight above `epsilon`.
pub fn estimate_df(vectors: &[SparseVector], epsilon: f64, dim: usize) -> Result<DfTable> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("DF sample"));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be >= 0")));
    }
    let mut df = vec![0u32; dim];
    for v in vectors {
        for &(t, w) in v.entries() {
            let slot = df
                .get_mut(t as usize)
                .ok_or(Error::TermOutOfRange { term: t, dim })?;
            if w > epsilon {
                *slot += 1;
            }
        }
    }
    DfTable::from_counts(df, vectors.len(), epsilon)
}

/// Mean number of stored entries per vector.
pub fn avg_active_terms(vectors: &[SparseVector]) -> Result<f64> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("vector list"));
    }
    let total: usize = vectors.iter().map(SparseVector::len).sum();
    Ok(total as f64 / vectors.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(entries: &[(TermId, f64)]) -> SparseVector {
        SparseVector::from_entries("d", entries.iter().copied(), 8).unwrap()
    }

    #[test]
    fn df_respects_threshold() {
        let df = estimate_df(&[sv(&[(1, 0.3)]), sv(&[(1, 0.9), (2, 0.1)])], 0.2, 8).unwrap();
        assert_eq!(df.df(1), 2);
        assert_eq!(df.df(2), 0);
        assert_eq!(df.sample_size(), 2);
    }

    #[test]
    fn df_of_empty_vectors_is_zero() {
        let df = estimate_df(&[sv(&[]), sv(&[])], 0.0, 8).unwrap();
        assert!(df.counts().iter().all(|&d| d == 0));
        assert!(estimate_df(&[], 0.0, 8).is_err());
    }

    #[test]
    fn avg_active() {
        let vs = [sv(&[(1, 1.0)]), sv(&[(1, 1.0), (2, 1.0), (3, 1.0)])];
        assert_eq!(avg_active_terms(&vs).unwrap(), 2.0);
        assert_eq!(avg_active_terms(&[sv(&[]), sv(&[])]).unwrap(), 0.0);
        assert!(avg_active_terms(&[]).is_err());
    }

    #[test]
    fn top_terms_breaks_ties_by_id() {
        let df = DfTable::from_counts(vec![1, 3, 3, 0], 3, 0.0).unwrap();
        assert_eq!(df.top_terms(2), vec![(1, 3), (2, 3)]);
        assert!(DfTable::from_counts(vec![4], 3, 0.0).is_err());
    }

    fn arb_vectors() -> impl Strategy<Value = Vec<SparseVector>> {
        prop::collection::vec(prop::collection::btree_map(0u32..16, 0.0f64..1.0, 0..10), 1..20)
            .prop_map(|maps| {
                maps.into_iter()
                    .map(|m| SparseVector::from_entries("d", m, 16).unwrap())
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn df_is_permutation_invariant(vs in arb_vectors(), seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = vs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(estimate_df(&vs, 0.1, 16).unwrap(), estimate_df(&shuffled, 0.1, 16).unwrap());
        }

        #[test]
        fn df_is_monotone_in_threshold(vs in arb_vectors(), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let a = estimate_df(&vs, lo, 16).unwrap();
            let b = estimate_df(&vs, hi, 16).unwrap();
            for t in 0..16 {
                prop_assert!(a.df(t) >= b.df(t));
            }
        }
    }
}
