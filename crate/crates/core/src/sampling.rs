//! Blinded samplers for human evaluation sheets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Corpus, Document, Provenance};

/// A blinded comparison: which tweet fits the community better?
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletRow {
    pub item_id: String,
    pub community: String,
    pub topic: String,
    pub tweet_a: String,
    pub tweet_b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletKey {
    pub item_id: String,
    pub source_a: Provenance,
    pub source_b: Provenance,
    pub doc_a: String,
    pub doc_b: String,
}

/// A single post whose origin is hidden from the annotator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmRow {
    pub item_id: String,
    pub community: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmKey {
    pub item_id: String,
    pub source: Provenance,
    pub doc_id: String,
}

/// Rows shown to annotators plus the key that undoes the blinding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sheet<R, K> {
    pub rows: Vec<R>,
    pub keys: Vec<K>,
    /// Fewer items than requested could be drawn.
    pub shortfall: bool,
}

impl<R, K> Default for Sheet<R, K> {
    fn default() -> Self {
        Sheet {
            rows: Vec::new(),
            keys: Vec::new(),
            shortfall: false,
        }
    }
}

impl<R, K> Sheet<R, K> {
    pub fn append(&mut self, other: Sheet<R, K>) {
        self.rows.extend(other.rows);
        self.keys.extend(other.keys);
        self.shortfall |= other.shortfall;
    }
}

fn by_topic(corpus: &Corpus) -> BTreeMap<&str, Vec<&Document>> {
    let mut out: BTreeMap<&str, Vec<&Document>> = BTreeMap::new();
    for d in corpus.documents() {
        if let Some(t) = d.topic.as_deref() {
            out.entry(t).or_default().push(d);
        }
    }
    out
}

/// Topic-matched (context, finetuned) pairs from one community, with the
/// left/right order randomized per item.
pub fn sample_triplets(ctx: &Corpus, ft: &Corpus, per_community: usize, seed: u64) -> Sheet<TripletRow, TripletKey> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ft_topics = by_topic(ft);
    let mut pool: Vec<(&str, &Document, &Document)> = Vec::new();
    for (topic, mut ctx_docs) in by_topic(ctx) {
        let Some(ft_docs) = ft_topics.get(topic) else { continue };
        let mut ft_docs = ft_docs.clone();
        ctx_docs.shuffle(&mut rng);
        ft_docs.shuffle(&mut rng);
        pool.extend(ctx_docs.into_iter().zip(ft_docs).map(|(c, f)| (topic, c, f)));
    }
    pool.shuffle(&mut rng);
    let shortfall = pool.len() < per_community;
    pool.truncate(per_community);

    let mut sheet = Sheet {
        shortfall,
        ..Sheet::default()
    };
    for (i, (topic, c, f)) in pool.into_iter().enumerate() {
        let item_id = format!("{}#{:03}", ctx.community, i + 1);
        let ((a, sa), (b, sb)) = if rng.gen_bool(0.5) {
            ((c, Provenance::Context), (f, Provenance::Finetuned))
        } else {
            ((f, Provenance::Finetuned), (c, Provenance::Context))
        };
        sheet.rows.push(TripletRow {
            item_id: item_id.clone(),
            community: ctx.community.clone(),
            topic: topic.into(),
            tweet_a: a.text.clone(),
            tweet_b: b.text.clone(),
        });
        sheet.keys.push(TripletKey {
            item_id,
            source_a: sa,
            source_b: sb,
            doc_a: a.id.clone(),
            doc_b: b.id.clone(),
        });
    }
    sheet
}

/// `per_source` posts from each of the original, context and finetuned
/// corpora of one community, shuffled together.
pub fn sample_harm_batch(
    orig: &Corpus,
    ctx: &Corpus,
    ft: &Corpus,
    per_source: usize,
    seed: u64,
) -> Sheet<HarmRow, HarmKey> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<(Provenance, &Document)> = Vec::new();
    let mut shortfall = false;
    for (source, corpus) in [
        (Provenance::Original, orig),
        (Provenance::Context, ctx),
        (Provenance::Finetuned, ft),
    ] {
        let docs = corpus.documents();
        let take = per_source.min(docs.len());
        shortfall |= take < per_source;
        let mut idx = index::sample(&mut rng, docs.len(), take).into_vec();
        idx.sort_unstable();
        picked.extend(idx.into_iter().map(|i| (source, &docs[i])));
    }
    picked.shuffle(&mut rng);

    let mut sheet = Sheet {
        shortfall,
        ..Sheet::default()
    };
    for (i, (source, d)) in picked.into_iter().enumerate() {
        let item_id = format!("{}#{:03}", orig.community, i + 1);
        sheet.rows.push(HarmRow {
            item_id: item_id.clone(),
            community: orig.community.clone(),
            text: d.text.clone(),
        });
        sheet.keys.push(HarmKey {
            item_id,
            source,
            doc_id: d.id.clone(),
        });
    }
    sheet
}

/// Resolves each triplet back to `(context text, finetuned text)`.
pub fn unblind_triplets(rows: &[TripletRow], keys: &[TripletKey]) -> Vec<(String, String, String)> {
    let keys: BTreeMap<&str, &TripletKey> = keys.iter().map(|k| (k.item_id.as_str(), k)).collect();
    rows.iter()
        .filter_map(|r| {
            let k = keys.get(r.item_id.as_str())?;
            let (ctx, ft) = if k.source_a == Provenance::Context {
                (&r.tweet_a, &r.tweet_b)
            } else {
                (&r.tweet_b, &r.tweet_a)
            };
            Some((r.item_id.clone(), ctx.clone(), ft.clone()))
        })
        .collect()
}
