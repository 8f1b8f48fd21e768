//! ROUGE-L over lowercased whitespace tokens, plus an inverted index for
//! exact nearest-neighbour similarity against a reference corpus.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Lowercased whitespace tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(|t| t.to_lowercase()).collect()
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(curr[j]) };
        }
        core::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

fn f_measure(lcs: usize, len_a: usize, len_b: usize) -> f64 {
    if lcs == 0 || len_a == 0 || len_b == 0 {
        return 0.0;
    }
    let precision = lcs as f64 / len_a as f64;
    let recall = lcs as f64 / len_b as f64;
    2.0 * precision * recall / (precision + recall)
}

/// LCS-based F1 between two texts; 0 when either is empty.
pub fn rouge_l(a: &str, b: &str) -> f64 {
    let (ta, tb) = (tokenize(a), tokenize(b));
    f_measure(lcs_len(&ta, &tb), ta.len(), tb.len())
}

/// Reference texts indexed by token for fast maximum-similarity queries.
///
/// Results equal a brute-force scan over every reference text; the index
/// only skips documents whose token overlap bounds their score below the
/// best found so far.
#[derive(Debug, Clone, Default)]
pub struct RougeIndex {
    vocabulary: BTreeMap<String, u32>,
    documents: Vec<Vec<u32>>,
    postings: Vec<Vec<(u32, u32)>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub score: f64,
    pub index: Option<usize>,
}

impl RougeIndex {
    pub fn new<'a, I: IntoIterator<Item = &'a str>>(texts: I) -> Self {
        let mut index = RougeIndex::default();
        for text in texts {
            index.insert(text);
        }
        index
    }

    pub fn insert(&mut self, text: &str) {
        let doc = self.documents.len() as u32;
        let ids: Vec<u32> = tokenize(text)
            .into_iter()
            .map(|t| {
                let next = self.vocabulary.len() as u32;
                *self.vocabulary.entry(t).or_insert(next)
            })
            .collect();
        if self.postings.len() < self.vocabulary.len() {
            self.postings.resize(self.vocabulary.len(), Vec::new());
        }
        for (token, count) in counts(&ids) {
            self.postings[token as usize].push((doc, count));
        }
        self.documents.push(ids);
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        tokenize(text)
            .iter()
            .map(|t| self.vocabulary.get(t).copied().unwrap_or(u32::MAX))
            .collect()
    }

    /// Documents sharing at least one token, with their F1 upper bound
    /// `2·overlap / (|a| + |b|)`, highest bound first.
    fn candidates(&self, query: &[u32], skip: Option<usize>) -> Vec<(f64, usize)> {
        let mut overlap: BTreeMap<u32, usize> = BTreeMap::new();
        for (token, q) in counts(query) {
            if token == u32::MAX {
                continue;
            }
            for &(doc, c) in &self.postings[token as usize] {
                *overlap.entry(doc).or_insert(0) += q.min(c) as usize;
            }
        }
        let mut out: Vec<(f64, usize)> = overlap
            .into_iter()
            .filter(|&(doc, _)| Some(doc as usize) != skip)
            .map(|(doc, o)| {
                let len = self.documents[doc as usize].len();
                (2.0 * o as f64 / (query.len() + len) as f64, doc as usize)
            })
            .collect();
        out.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        out
    }

    fn score(&self, query: &[u32], doc: usize) -> f64 {
        let d = &self.documents[doc];
        f_measure(lcs_len(query, d), query.len(), d.len())
    }

    /// Highest ROUGE-L between `text` and any indexed document.
    pub fn nearest(&self, text: &str) -> Nearest {
        self.nearest_excluding(text, None)
    }

    /// As [`nearest`](Self::nearest) but ignoring one indexed document, for
    /// similarity of a corpus against itself.
    pub fn nearest_excluding(&self, text: &str, skip: Option<usize>) -> Nearest {
        let query = self.encode(text);
        let mut best = Nearest {
            score: 0.0,
            index: None,
        };
        for (bound, doc) in self.candidates(&query, skip) {
            if bound <= best.score {
                break;
            }
            let s = self.score(&query, doc);
            if s > best.score {
                best = Nearest {
                    score: s,
                    index: Some(doc),
                };
            }
        }
        best
    }

    /// Whether any indexed document scores strictly above `threshold`.
    pub fn any_above(&self, text: &str, threshold: f64) -> bool {
        let query = self.encode(text);
        for (bound, doc) in self.candidates(&query, None) {
            if bound <= threshold {
                return false;
            }
            if self.score(&query, doc) > threshold {
                return true;
            }
        }
        false
    }
}

fn counts(ids: &[u32]) -> BTreeMap<u32, u32> {
    let mut m = BTreeMap::new();
    for &id in ids {
        *m.entry(id).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_disjoint() {
        assert_eq!(rouge_l("the cat sat", "the cat sat"), 1.0);
        assert_eq!(rouge_l("a b", "c d"), 0.0);
        assert_eq!(rouge_l("", "c d"), 0.0);
    }

    #[test]
    fn partial_overlap_by_hand() {
        // L = 2, P = 2/3, R = 1
        assert!((rouge_l("the cat sat", "the cat") - 0.8).abs() < 1e-12);
        assert!((rouge_l("The CAT", "the cat") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lcs_is_subsequence_not_substring() {
        let a: Vec<char> = "abcbdab".chars().collect();
        let b: Vec<char> = "bdcaba".chars().collect();
        assert_eq!(lcs_len(&a, &b), 4);
    }

    #[test]
    fn index_matches_scan() {
        let refs = ["the cat sat on the mat", "a dog ran", "cat cat cat", "mat on the cat"];
        let idx = RougeIndex::new(refs);
        for q in ["the cat", "dog ran fast", "nothing shared", "cat on mat the"] {
            let brute = refs.iter().map(|r| rouge_l(q, r)).fold(0.0, f64::max);
            assert!((idx.nearest(q).score - brute).abs() < 1e-15, "{q}");
            assert_eq!(idx.any_above(q, 0.5), brute > 0.5);
        }
        let self_sim = idx.nearest_excluding(refs[0], Some(0));
        assert!(self_sim.score < 1.0);
        assert_ne!(self_sim.index, Some(0));
    }
}
