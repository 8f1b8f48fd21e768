//! Deterministic offline stand-in for every model service.
//!
//! Outputs are derived by keyed hashing of (seed, model name, input), so
//! the same input always yields the same output and distinct inputs
//! practically never collide. Scores built from per-word hashes make texts
//! with similar vocabulary score alike, which keeps the alignment metrics
//! meaningful on mock data.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use twin_core::screen::ANSWER_INSTRUCTION;

use super::{Backend, GenParams, Operation, ProviderResult, Score};

const GENERIC_WORDS: &[&str] = &[
    "today", "really", "people", "think", "time", "going", "good", "know", "want", "feel", "life", "love", "work",
    "need", "day", "week", "morning", "night", "friends", "family", "new", "great", "always", "never", "maybe", "just",
    "still", "again", "better", "best", "start", "make", "take", "keep", "try", "help", "look", "find", "world",
    "home", "school", "music", "movie", "coffee", "weekend", "summer", "happy", "tired", "busy", "ready", "thing",
    "things", "right", "little", "long", "first", "last", "year", "hope", "wish", "so", "very", "much", "the", "a",
    "and", "to", "of", "in", "is", "it", "my", "i", "you", "that", "for", "on", "with", "this", "be",
];

pub struct MockBackend {
    name: String,
    seed: u64,
    vocabulary: Vec<String>,
    memory: Vec<String>,
    dim: usize,
    requests: AtomicUsize,
}

impl MockBackend {
    /// A general-purpose mock: generic vocabulary, no memorized posts.
    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        MockBackend {
            name: name.into(),
            seed,
            vocabulary: GENERIC_WORDS.iter().map(|w| w.to_string()).collect(),
            memory: Vec::new(),
            dim: 32,
            requests: AtomicUsize::new(0),
        }
    }

    /// A mock "aligned" to a corpus: it writes with the corpus vocabulary
    /// and now and then reproduces a post verbatim or nearly so.
    pub fn with_corpus<'a>(mut self, texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut vocab = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for t in texts {
            self.memory.push(t.to_string());
            for w in t.split_whitespace() {
                if seen.insert(w.to_string()) {
                    vocab.push(w.to_string());
                }
            }
        }
        if !vocab.is_empty() {
            self.vocabulary = vocab;
        }
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim.max(1);
        self
    }

    fn digest(&self, parts: &[&[u8]]) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update((self.name.len() as u64).to_le_bytes());
        h.update(self.name.as_bytes());
        for p in parts {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p);
        }
        h.finalize().into()
    }

    fn unit(&self, parts: &[&[u8]]) -> f64 {
        let d = self.digest(parts);
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes")) as f64 / u64::MAX as f64
    }

    /// `n` values in [0,1) per word (n ≤ 16), averaged over the text's words.
    fn word_profile(&self, tag: &[u8], text: &str, n: usize) -> Vec<f64> {
        let words: Vec<String> = text.split_whitespace().map(str::to_lowercase).collect();
        let mut acc = vec![0.0; n];
        let owned;
        let words: &[String] = if words.is_empty() {
            owned = [text.to_string()];
            &owned
        } else {
            &words
        };
        for w in words {
            let d = self.digest(&[tag, w.as_bytes()]);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += u16::from_le_bytes([d[2 * k], d[2 * k + 1]]) as f64 / 65535.0;
            }
        }
        acc.iter().map(|a| a / words.len() as f64).collect()
    }

    fn embed(&self, text: &str) -> Vec<f64> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let mut v = vec![0.0; self.dim];
        for w in &words {
            let lw = w.to_lowercase();
            for (chunk, slot) in v.chunks_mut(16).enumerate() {
                let d = self.digest(&[b"embed", lw.as_bytes(), &(chunk as u64).to_le_bytes()]);
                for (k, x) in slot.iter_mut().enumerate() {
                    *x += i16::from_le_bytes([d[2 * k], d[2 * k + 1]]) as f64 / 32768.0;
                }
            }
        }
        let n = words.len().max(1) as f64;
        v.iter().map(|x| x / n.sqrt()).collect()
    }

    fn rng_for(&self, prompt: &str, params: &GenParams, i: usize) -> ChaCha8Rng {
        let d = self.digest(&[
            b"generate",
            prompt.as_bytes(),
            &params.seed.to_le_bytes(),
            &(i as u64).to_le_bytes(),
        ]);
        ChaCha8Rng::from_seed(d)
    }

    fn answer_screening(&self, prompt: &str, rng: &mut ChaCha8Rng) -> String {
        if rng.gen_bool(0.08) {
            return "I cannot answer that.".into();
        }
        let options: Vec<(char, &str)> = prompt
            .lines()
            .filter_map(|l| {
                let mut cs = l.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), Some(')')) if c.is_ascii_lowercase() => Some((c, l[2..].trim())),
                    _ => None,
                }
            })
            .collect();
        if options.is_empty() {
            let n = if rng.gen_bool(0.5) {
                rng.gen_range(0..6)
            } else {
                rng.gen_range(90..220)
            };
            return match rng.gen_range(0..3) {
                0 => format!("{n}"),
                1 => format!("Answer: {n}"),
                _ => format!("About {n}."),
            };
        }
        // answers lean toward one option per prompt, like a model with a view
        let favourite = (self.unit(&[b"favourite", prompt.as_bytes()]) * options.len() as f64) as usize;
        let pick = if rng.gen_bool(0.6) {
            favourite.min(options.len() - 1)
        } else {
            rng.gen_range(0..options.len())
        };
        let (letter, text) = options[pick];
        match rng.gen_range(0..3) {
            0 => letter.to_string(),
            1 => format!("{}) {}", letter.to_ascii_uppercase(), text.to_lowercase()),
            _ => format!("Answer: {letter}"),
        }
    }

    fn summarize(&self, prompt: &str) -> String {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for w in prompt.lines().skip(1).flat_map(str::split_whitespace) {
            if w.len() > 3 && w.chars().all(char::is_alphabetic) {
                *counts.entry(w).or_insert(0) += 1;
            }
        }
        let mut top: Vec<(&str, usize)> = counts.into_iter().collect();
        top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let words: Vec<&str> = top.iter().take(3).map(|(w, _)| *w).collect();
        match words.as_slice() {
            [] => "The posts share everyday personal updates.".into(),
            [a] => format!("The posts mostly talk about {a}."),
            [a, b] => format!("The posts mostly talk about {a} and {b}."),
            [a, b, c, ..] => format!("The posts mostly talk about {a}, {b} and {c}."),
        }
    }

    fn classify_origin(&self, prompt: &str, rng: &mut ChaCha8Rng) -> String {
        let list = prompt
            .strip_prefix("From these communities: ")
            .and_then(|r| r.split(", which community").next())
            .unwrap_or("");
        let names: Vec<&str> = list
            .split(", ")
            .map(|n| n.trim_start_matches("and ").trim())
            .filter(|n| !n.is_empty())
            .collect();
        names.choose(rng).map(|n| n.to_string()).unwrap_or_default()
    }

    fn compose(&self, prompt: &str, rng: &mut ChaCha8Rng) -> String {
        if !self.memory.is_empty() {
            let roll: f64 = rng.gen();
            if roll < 0.04 {
                return self.memory.choose(rng).expect("memory non-empty").clone();
            }
            if roll < 0.08 {
                let mut words: Vec<String> = self
                    .memory
                    .choose(rng)
                    .expect("memory non-empty")
                    .split_whitespace()
                    .map(str::to_string)
                    .collect();
                if words.len() > 4 {
                    let at = rng.gen_range(0..words.len());
                    words[at] = self.vocabulary.choose(rng).expect("vocabulary non-empty").clone();
                    return words.join(" ");
                }
            }
        }
        // in-context prompts lend their exemplar words to the base model
        let borrowed: Vec<&str> = if self.memory.is_empty() {
            prompt
                .lines()
                .filter(|l| l.starts_with("Tweet "))
                .filter_map(|l| l.split_once(": "))
                .flat_map(|(_, t)| t.split_whitespace())
                .collect()
        } else {
            Vec::new()
        };
        let len = rng.gen_range(6..18);
        let mut words: Vec<String> = (0..len)
            .map(|_| {
                if !borrowed.is_empty() && rng.gen_bool(0.5) {
                    borrowed.choose(rng).expect("non-empty").to_string()
                } else {
                    self.vocabulary.choose(rng).expect("vocabulary non-empty").clone()
                }
            })
            .collect();
        if let Some(topic) = topic_of(prompt) {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, topic.to_string());
        }
        words.join(" ")
    }
}

/// The topic of "... about X?" style instructions: the first short phrase
/// following " about ".
fn topic_of(prompt: &str) -> Option<&str> {
    prompt.match_indices(" about ").find_map(|(i, m)| {
        let tail = &prompt[i + m.len()..];
        let end = tail.find(['?', '.', '!', ':', '\n']).unwrap_or(tail.len());
        let topic = tail[..end].trim();
        (!topic.is_empty() && topic.split_whitespace().count() <= 3).then_some(topic)
    })
}

impl Backend for MockBackend {
    fn identity(&self) -> String {
        format!("mock:{}|seed={}", self.name, self.seed)
    }

    fn generate(&self, prompt: &str, params: &GenParams) -> ProviderResult<Vec<String>> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        Ok((0..params.n)
            .map(|i| {
                let mut rng = self.rng_for(prompt, params, i);
                if prompt.contains(ANSWER_INSTRUCTION) {
                    self.answer_screening(prompt, &mut rng)
                } else if prompt.starts_with("Given this list of posts") {
                    self.summarize(prompt)
                } else if prompt.starts_with("From these communities:") {
                    self.classify_origin(prompt, &mut rng)
                } else {
                    self.compose(prompt, &mut rng)
                }
            })
            .collect())
    }

    fn score(&self, op: Operation, texts: &[String]) -> ProviderResult<Vec<Score>> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        Ok(texts
            .iter()
            .map(|t| match op {
                Operation::Embed | Operation::Generate => Score::Vector(self.embed(t)),
                Operation::Emotions => Score::Vector(self.word_profile(b"emotions", t, 11)),
                Operation::Toxicity => {
                    let w = self.word_profile(b"toxicity", t, 1)[0];
                    let u = self.unit(&[b"toxicity-text", t.as_bytes()]);
                    Score::Scalar((0.7 * w + 0.3 * u).powi(4).clamp(0.0, 1.0))
                }
                Operation::Perplexity => {
                    let u = self.unit(&[b"perplexity", t.as_bytes()]);
                    Score::Scalar(20.0 + 580.0 * u.powf(1.5))
                }
            })
            .collect())
    }

    fn requests(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let m = MockBackend::new("base", 1);
        let p = GenParams::new(1.0, 64, 3, 9);
        let a = m.generate("What would you tweet about fasting?", &p).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a, m.generate("What would you tweet about fasting?", &p).unwrap());
        assert!(a.iter().all(|t| t.contains("fasting")));
        assert!(m.generate("x", &GenParams::new(1.0, 64, 0, 9)).unwrap().is_empty());
    }

    #[test]
    fn scores_are_bounded_and_text_keyed() {
        let m = MockBackend::new("scorer", 4);
        let texts = vec!["same words".to_string(), "same words".to_string(), "other".to_string()];
        let e = m.score(Operation::Embed, &texts).unwrap();
        assert_eq!(e[0], e[1]);
        assert_ne!(e[0], e[2]);
        for s in m.score(Operation::Emotions, &texts).unwrap() {
            let Score::Vector(v) = s else { panic!() };
            assert_eq!(v.len(), 11);
            assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
        }
        for s in m.score(Operation::Toxicity, &texts).unwrap() {
            let Score::Scalar(x) = s else { panic!() };
            assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn screening_answers_come_from_the_options() {
        let m = MockBackend::new("aligned", 2);
        let prompt = format!("How afraid?\na) Not\nb) Slightly\nc) Very\n{ANSWER_INSTRUCTION}");
        let out = m.generate(&prompt, &GenParams::new(0.7, 16, 40, 0)).unwrap();
        assert!(out.iter().all(|r| r.starts_with(['a', 'b', 'c', 'A', 'B', 'C'])
            || r.starts_with("Answer")
            || r.starts_with("I cannot")));
    }

    #[test]
    fn topic_extraction() {
        assert_eq!(topic_of("What would you tweet about fasting?"), Some("fasting"));
        assert_eq!(topic_of("Write a tweet about binge eating."), Some("binge eating"));
        assert_eq!(topic_of("Share a thought."), None);
        let ctx = twin_core::topics::context_prompt("thigh gap", &["x y".to_string()]);
        assert_eq!(topic_of(&ctx), Some("thigh gap"));
    }
}
