//! Tweet origin classification: a bag-of-words multinomial model, the
//! train/holdout harness around it, and F1 scoring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::demos::Demonstration;
use crate::{Corpus, Error, Result};

/// Lowercased word tokens with surrounding punctuation stripped.
pub fn bag_of_words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
}

/// Multinomial naive Bayes with add-one smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    labels: Vec<String>,
    log_prior: Vec<f64>,
    token_counts: Vec<BTreeMap<String, u64>>,
    totals: Vec<u64>,
    vocabulary: usize,
}

impl NaiveBayes {
    /// Fits on `(text, label)` pairs. Labels keep first-seen order, which also
    /// breaks scoring ties.
    pub fn fit<'a, I>(examples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut docs: Vec<u64> = Vec::new();
        let mut token_counts: Vec<BTreeMap<String, u64>> = Vec::new();
        let mut vocabulary = BTreeSet::new();
        for (text, label) in examples {
            let k = match labels.iter().position(|l| l == label) {
                Some(k) => k,
                None => {
                    labels.push(label.to_string());
                    docs.push(0);
                    token_counts.push(BTreeMap::new());
                    labels.len() - 1
                }
            };
            docs[k] += 1;
            for token in bag_of_words(text) {
                vocabulary.insert(token.clone());
                *token_counts[k].entry(token).or_insert(0) += 1;
            }
        }
        if labels.is_empty() {
            return Err(Error::EmptyInput("training examples"));
        }
        let n: u64 = docs.iter().sum();
        let log_prior = docs.iter().map(|&d| libm::log(d as f64 / n as f64)).collect();
        let totals = token_counts.iter().map(|c| c.values().sum()).collect();
        Ok(NaiveBayes {
            labels,
            log_prior,
            token_counts,
            totals,
            vocabulary: vocabulary.len(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Log joint likelihood per label.
    pub fn scores(&self, text: &str) -> Vec<f64> {
        let tokens: Vec<String> = bag_of_words(text).collect();
        (0..self.labels.len())
            .map(|k| {
                let denom = libm::log((self.totals[k] + self.vocabulary as u64 + 1) as f64);
                tokens.iter().fold(self.log_prior[k], |acc, t| {
                    let c = self.token_counts[k].get(t).copied().unwrap_or(0);
                    acc + libm::log((c + 1) as f64) - denom
                })
            })
            .collect()
    }

    pub fn predict(&self, text: &str) -> &str {
        let scores = self.scores(text);
        let mut best = 0;
        for (k, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = k;
            }
        }
        &self.labels[best]
    }
}

/// A fitted origin classifier and how it did on its held-out sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub model: NaiveBayes,
    pub holdout_accuracy: f64,
    pub train_size: usize,
    pub holdout_size: usize,
    /// Ids of held-out documents, per community.
    pub holdout_ids: BTreeMap<String, Vec<String>>,
}

impl TrainedClassifier {
    pub fn classify<'a>(&'a self, texts: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
        texts.into_iter().map(|t| self.model.predict(t)).collect()
    }
}

/// `(community, train, holdout)` for each community.
pub type OriginSplit<'c> = (&'c str, Vec<&'c crate::Document>, Vec<&'c crate::Document>);

/// Per community, samples up to `per_community` documents and holds out a
/// `holdout` fraction (at least one) for testing.
pub fn split_for_origin(
    corpora: &[Corpus],
    per_community: usize,
    holdout: f64,
    seed: u64,
) -> Result<Vec<OriginSplit<'_>>> {
    if corpora.len() < 2 {
        return Err(Error::TooFewCommunities(corpora.len()));
    }
    if !(0.0..1.0).contains(&holdout) {
        return Err(Error::InvalidParameter("holdout fraction must be in [0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for corpus in corpora {
        let docs = corpus.documents();
        if docs.len() < 2 {
            return Err(Error::CommunityTooSmall {
                community: corpus.community.clone(),
                found: docs.len(),
                required: 2,
            });
        }
        let take = per_community.min(docs.len());
        let mut picked: Vec<&crate::Document> = index::sample(&mut rng, docs.len(), take)
            .into_iter()
            .map(|i| &docs[i])
            .collect();
        picked.shuffle(&mut rng);
        let held = (libm::round(take as f64 * holdout) as usize).clamp(1, take - 1);
        let train = picked.split_off(held);
        out.push((corpus.community.as_str(), train, picked));
    }
    Ok(out)
}

pub fn train_origin_classifier(
    corpora: &[Corpus],
    per_community: usize,
    holdout: f64,
    seed: u64,
) -> Result<TrainedClassifier> {
    let split = split_for_origin(corpora, per_community, holdout, seed)?;
    let model = NaiveBayes::fit(
        split
            .iter()
            .flat_map(|(label, train, _)| train.iter().map(move |d| (d.text.as_str(), *label))),
    )?;
    let mut correct = 0;
    let mut holdout_size = 0;
    let mut train_size = 0;
    let mut holdout_ids = BTreeMap::new();
    for (label, train, held) in &split {
        train_size += train.len();
        holdout_size += held.len();
        correct += held.iter().filter(|d| model.predict(&d.text) == *label).count();
        holdout_ids.insert(label.to_string(), held.iter().map(|d| d.id.clone()).collect());
    }
    Ok(TrainedClassifier {
        holdout_accuracy: correct as f64 / holdout_size as f64,
        model,
        train_size,
        holdout_size,
        holdout_ids,
    })
}

/// Instruction asking which of the named communities a post belongs to.
pub fn origin_instruction(communities: &[&str]) -> String {
    let list = match communities {
        [] => String::new(),
        [only] => String::from(*only),
        [init @ .., last] => format!("{}, and {}", init.join(", "), last),
    };
    format!("From these communities: {list}, which community does this Tweet belong to?")
}

/// Demonstrations for tuning an external model as origin classifier: the
/// post goes in `input`, the community name in `output`.
pub fn origin_demonstrations(corpora: &[Corpus], communities: &[&str]) -> Vec<Demonstration> {
    let instruction = origin_instruction(communities);
    corpora
        .iter()
        .flat_map(|c| {
            let instruction = &instruction;
            c.texts()
                .map(move |t| Demonstration::new(instruction.clone(), t, c.community.clone()))
        })
        .collect()
}

/// Reads a community name out of a free-text model answer: the known name
/// appearing earliest (longest on ties), case-insensitively.
pub fn parse_origin_answer<'a>(answer: &str, communities: &[&'a str]) -> Option<&'a str> {
    let lower = answer.to_lowercase();
    communities
        .iter()
        .filter_map(|c| {
            lower
                .find(&c.to_lowercase())
                .map(|pos| (pos, core::cmp::Reverse(c.len()), *c))
        })
        .min()
        .map(|(_, _, c)| c)
}

/// Micro- and macro-averaged F1 with the per-class breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub per_class: BTreeMap<String, f64>,
}

/// F1 over the classes in `known`; any label outside it is an error.
pub fn f1_report<S: AsRef<str>>(predicted: &[S], gold: &[S], known: &[S]) -> Result<F1Report> {
    if predicted.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::EmptyInput("labels"));
    }
    let known: BTreeSet<&str> = known.iter().map(AsRef::as_ref).collect();
    for label in predicted.iter().chain(gold) {
        if !known.contains(label.as_ref()) {
            return Err(Error::UnknownLabel(label.as_ref().to_string()));
        }
    }
    let mut tp: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fp: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fn_: BTreeMap<&str, usize> = BTreeMap::new();
    let mut correct = 0;
    for (p, g) in predicted.iter().zip(gold) {
        let (p, g) = (p.as_ref(), g.as_ref());
        if p == g {
            *tp.entry(p).or_insert(0) += 1;
            correct += 1;
        } else {
            *fp.entry(p).or_insert(0) += 1;
            *fn_.entry(g).or_insert(0) += 1;
        }
    }
    let per_class: BTreeMap<String, f64> = known
        .iter()
        .map(|&label| {
            let t = tp.get(label).copied().unwrap_or(0) as f64;
            let f = fp.get(label).copied().unwrap_or(0) as f64;
            let n = fn_.get(label).copied().unwrap_or(0) as f64;
            let f1 = if t == 0.0 { 0.0 } else { 2.0 * t / (2.0 * t + f + n) };
            (label.to_string(), f1)
        })
        .collect();
    let macro_f1 = per_class.values().sum::<f64>() / per_class.len() as f64;
    Ok(F1Report {
        macro_f1,
        // single-label multiclass: micro F1 equals accuracy
        micro_f1: correct as f64 / gold.len() as f64,
        per_class,
    })
}

/// Macro F1 over the classes that appear in either sequence.
pub fn macro_f1<S: AsRef<str>>(predicted: &[S], gold: &[S]) -> Result<f64> {
    let known: BTreeSet<&str> = predicted.iter().chain(gold).map(AsRef::as_ref).collect();
    let known: Vec<&str> = known.into_iter().collect();
    let predicted: Vec<&str> = predicted.iter().map(AsRef::as_ref).collect();
    let gold: Vec<&str> = gold.iter().map(AsRef::as_ref).collect();
    Ok(f1_report(&predicted, &gold, &known)?.macro_f1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Document;

    fn corpus(name: &str, words: &[&str], n: usize) -> Corpus {
        let docs = (0..n)
            .map(|i| {
                let text = format!(
                    "{} {} {}",
                    words[i % words.len()],
                    words[(i + 1) % words.len()],
                    words[(i * 7) % words.len()]
                );
                Document::new(format!("{name}-{i}"), name, text)
            })
            .collect();
        Corpus::from_documents(name, docs).unwrap()
    }

    #[test]
    fn perfect_and_constant_predictions() {
        let gold = ["a", "b", "a", "b"];
        assert_eq!(macro_f1(&gold, &gold).unwrap(), 1.0);
        let all_a = ["a", "a", "a", "a"];
        assert!((macro_f1(&all_a, &gold).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(macro_f1::<&str>(&[], &[]).is_err());
    }

    #[test]
    fn unknown_labels_rejected() {
        assert_eq!(
            f1_report(&["a", "z"], &["a", "b"], &["a", "b"]),
            Err(Error::UnknownLabel("z".into()))
        );
    }

    #[test]
    fn separable_communities_are_learned() {
        let corpora = [
            corpus("x", &["apple", "banana", "cherry", "date"], 200),
            corpus("y", &["engine", "piston", "gear", "clutch"], 200),
        ];
        let clf = train_origin_classifier(&corpora, 3000, 0.05, 3).unwrap();
        assert_eq!(clf.holdout_accuracy, 1.0);
        assert_eq!(clf.holdout_size, 20);
        assert_eq!(clf.model.predict("banana gear apple apple"), "x");
        let again = train_origin_classifier(&corpora, 3000, 0.05, 3).unwrap();
        assert_eq!(clf.holdout_ids, again.holdout_ids);
    }

    #[test]
    fn harness_input_errors() {
        let one = [corpus("x", &["a"], 5)];
        assert_eq!(
            train_origin_classifier(&one, 10, 0.05, 0),
            Err(Error::TooFewCommunities(1))
        );
        let tiny = [corpus("x", &["a"], 5), corpus("y", &["b"], 1)];
        assert!(matches!(
            train_origin_classifier(&tiny, 10, 0.05, 0),
            Err(Error::CommunityTooSmall { .. })
        ));
    }

    #[test]
    fn instruction_lists_communities() {
        assert_eq!(
            origin_instruction(&["Pro Eating Disorder", "Keto & Diet", "Body Image"]),
            "From these communities: Pro Eating Disorder, Keto & Diet, and Body Image, which community does this Tweet belong to?"
        );
        let names = ["Body Image", "Anti Eating Disorder", "Pro Eating Disorder"];
        assert_eq!(
            parse_origin_answer("Response: pro eating disorder", &names),
            Some("Pro Eating Disorder")
        );
        assert_eq!(parse_origin_answer("no idea", &names), None);
    }
}
