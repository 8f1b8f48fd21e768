//! Filtering of model-generated corpora.

use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::dedup_exact;
use crate::rouge::RougeIndex;
use crate::{Corpus, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Documents scoring strictly above this are dropped.
    pub max_perplexity: f64,
    /// Documents whose best ROUGE-L against the originals is strictly above
    /// this are dropped.
    pub max_similarity: f64,
    /// Size of the final uniform sample.
    pub balance: usize,
    pub seed: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            max_perplexity: 400.0,
            max_similarity: 0.7,
            balance: 6000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FilterStats {
    pub input: usize,
    pub after_dedup: usize,
    pub after_perplexity: usize,
    pub after_similarity: usize,
    pub output: usize,
}

impl FilterStats {
    /// Fewer survivors than the requested balance.
    pub fn shortfall(&self, balance: usize) -> bool {
        self.after_similarity < balance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub corpus: Corpus,
    pub stats: FilterStats,
}

/// Exact dedup, then the perplexity cut, then the similarity cut against
/// the original corpus, then a seeded uniform sample of `balance` documents
/// (kept in input order).
///
/// Every document that survives dedup must carry a perplexity.
pub fn filter_synthetic(synth: Corpus, orig: &Corpus, config: &FilterConfig) -> Result<FilterOutcome> {
    let mut stats = FilterStats {
        input: synth.len(),
        ..FilterStats::default()
    };
    let deduped = dedup_exact(synth);
    stats.after_dedup = deduped.len();
    let community = deduped.community.clone();
    let mut docs = deduped.into_documents();

    if let Some(d) = docs.iter().find(|d| d.perplexity.is_none()) {
        return Err(Error::Unscored(d.id.clone()));
    }
    docs.retain(|d| d.perplexity.is_some_and(|p| p <= config.max_perplexity));
    stats.after_perplexity = docs.len();

    let index = RougeIndex::new(orig.texts());
    docs.retain(|d| !index.any_above(&d.text, config.max_similarity));
    stats.after_similarity = docs.len();

    if docs.len() > config.balance {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut keep = index::sample(&mut rng, docs.len(), config.balance).into_vec();
        keep.sort_unstable();
        let mut slots: Vec<Option<crate::Document>> = docs.into_iter().map(Some).collect();
        docs = keep.into_iter().filter_map(|i| slots[i].take()).collect();
    }
    stats.output = docs.len();

    Ok(FilterOutcome {
        corpus: Corpus::retain_documents(community, docs),
        stats,
    })
}

/// Best ROUGE-L of each document against a reference corpus.
pub fn external_similarity(corpus: &Corpus, reference: &Corpus) -> Vec<f64> {
    let index = RougeIndex::new(reference.texts());
    corpus.texts().map(|t| index.nearest(t).score).collect()
}

/// Best ROUGE-L of each document against the other documents of its own
/// corpus.
pub fn internal_similarity(corpus: &Corpus) -> Vec<f64> {
    let index = RougeIndex::new(corpus.texts());
    corpus
        .texts()
        .enumerate()
        .map(|(i, t)| index.nearest_excluding(t, Some(i)).score)
        .collect()
}
