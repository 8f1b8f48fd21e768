//! Generation topics, keyword matching, and the prompt templates built from
//! community text.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Corpus;

/// The 27 generation topics, in their canonical order.
pub const TOPICS: [&str; 27] = [
    "thinspo",
    "fitspo",
    "bonespo",
    "deathspo",
    "caloric restriction",
    "meanspo",
    "ozempic",
    "wegovy",
    "fatspo",
    "fatphobia",
    "thighgap",
    "caloric counting",
    "purging",
    "food rules",
    "extreme diet",
    "food fear",
    "hiding food",
    "fasting",
    "starving",
    "steroid",
    "excessive exercising",
    "body dysmorphia",
    "working out",
    "anorexia",
    "bulimia",
    "orthorexia",
    "binge eating",
];

/// A topic and the keyword phrases that count as mentioning it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub name: String,
    pub keywords: Vec<String>,
}

impl Topic {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        Topic {
            keywords: alloc::vec![name.clone()],
            name,
        }
    }

    pub fn with_keywords(name: impl Into<String>, keywords: &[&str]) -> Self {
        Topic {
            name: name.into(),
            keywords: keywords.iter().map(|k| String::from(*k)).collect(),
        }
    }

    pub fn matches(&self, text: &str) -> bool {
        self.keywords.iter().any(|k| contains_phrase(text, k))
    }
}

/// The built-in topic list. Two topics also match their spaced spelling.
pub fn default_topics() -> Vec<Topic> {
    TOPICS
        .iter()
        .map(|&name| match name {
            "thighgap" => Topic::with_keywords(name, &["thighgap", "thigh gap"]),
            "caloric counting" => Topic::with_keywords(name, &["caloric counting", "calorie counting"]),
            _ => Topic::new(name),
        })
        .collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Case-insensitive phrase search that only matches on word boundaries.
pub fn contains_phrase(text: &str, phrase: &str) -> bool {
    let phrase = phrase.trim().to_lowercase();
    if phrase.is_empty() {
        return false;
    }
    let text = text.to_lowercase();
    for (start, _) in text.match_indices(phrase.as_str()) {
        let end = start + phrase.len();
        let before_ok = text[..start].chars().next_back().is_none_or(|c| !is_word_char(c));
        let after_ok = text[end..].chars().next().is_none_or(|c| !is_word_char(c));
        if before_ok && after_ok {
            return true;
        }
    }
    false
}

/// Number of documents mentioning each topic.
pub fn count_topic_mentions(corpus: &Corpus, topics: &[Topic]) -> Vec<(String, usize)> {
    topics
        .iter()
        .map(|t| (t.name.clone(), corpus.texts().filter(|text| t.matches(text)).count()))
        .collect()
}

/// Keeps the first `max_tokens` whitespace tokens.
pub fn truncate_tokens(text: &str, max_tokens: usize) -> String {
    let mut out = String::new();
    for word in text.split_whitespace().take(max_tokens) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExemplarSet {
    pub texts: Vec<String>,
    /// How many exemplars mention the topic.
    pub keyword_matches: usize,
    /// The corpus had fewer documents than requested.
    pub shortfall: bool,
}

/// In-context exemplars for one topic: every keyword match first, then a
/// seeded random fill from the rest of the corpus, each truncated.
pub fn select_exemplars(orig: &Corpus, topic: &Topic, count: usize, max_tokens: usize, seed: u64) -> ExemplarSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut matched, mut rest): (Vec<&str>, Vec<&str>) = orig.texts().partition(|t| topic.matches(t));
    if matched.len() > count {
        matched.shuffle(&mut rng);
        matched.truncate(count);
    }
    let fill = count - matched.len();
    let keyword_matches = matched.len();
    let picked: Vec<&str> = if rest.len() > fill {
        let mut idx = index::sample(&mut rng, rest.len(), fill).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| rest[i]).collect()
    } else {
        core::mem::take(&mut rest)
    };
    let texts: Vec<String> = matched
        .into_iter()
        .chain(picked)
        .map(|t| truncate_tokens(t, max_tokens))
        .collect();
    ExemplarSet {
        shortfall: texts.len() < count,
        texts,
        keyword_matches,
    }
}

/// Prompt for the untuned in-context baseline.
pub fn context_prompt(topic: &str, exemplars: &[String]) -> String {
    let mut p = String::new();
    let _ = write!(
        p,
        "You're part of an online community now. To help you describe this online community, \
         here are the tweets made by members in this community about the topic of {topic}.\n\n"
    );
    for (i, t) in exemplars.iter().enumerate() {
        let _ = writeln!(p, "Tweet {}: {}", i + 1, t);
    }
    let _ = write!(
        p,
        "\nWhat would you tweet about {topic}? Learn the ideas and mindset of the community from these \
         tweets and speak like a member from this community. Only generate one tweet."
    );
    p
}

/// Prompt asking for a one-sentence summary of sampled posts.
pub fn profile_prompt(posts: &[&str]) -> String {
    let mut p = String::from("Given this list of posts, summarize the main ideas in 1 sentence\n\n");
    for (i, post) in posts.iter().enumerate() {
        let _ = writeln!(p, "{}. {}", i + 1, post);
    }
    p
}

/// Up to `k` texts sampled without replacement, in corpus order.
pub fn sample_texts(corpus: &Corpus, k: usize, seed: u64) -> Vec<&str> {
    let texts: Vec<&str> = corpus.texts().collect();
    if k >= texts.len() {
        return texts;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = index::sample(&mut rng, texts.len(), k).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| texts[i]).collect()
}
