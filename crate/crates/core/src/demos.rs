//! Instruction-tuning demonstrations built from curated community posts.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Corpus;

/// The tweet-generation instruction pool, in index order (1-based in reports).
pub const INSTRUCTION_POOL: [&str; 20] = [
    "What would you tweet?",
    "What tweet would you send out?",
    "What's your tweet today?",
    "What would you want to tweet about?",
    "What's on your mind to tweet?",
    "What tweet would you drop?",
    "What would you say?",
    "What's your tweet?",
    "Tweet something.",
    "Share your thought with a tweet.",
    "What kind of tweet would you send out to engage with fellow members?",
    "Draft a tweet that captures the interests and spirit of the community.",
    "Craft a relatable tweet that resonates with members.",
    "Share a tweet that sparks conversation on relevant topics.",
    "Compose a tweet that reflects the shared voice and passions.",
    "Author an insightful tweet that inspires dialogue among members.",
    "Tweet something that provokes intellectual discourse.",
    "Tweet an observation or perspective that contributes meaningfully.",
    "Craft a tweet that elevates the ongoing conversations.",
    "Compose a tweet that encourages enriching engagement.",
];

/// One instruction/response pair. Serialized as `{instruction, input, output}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub instruction: String,
    #[serde(default)]
    pub input: String,
    pub output: String,
}

impl Demonstration {
    pub fn new(instruction: impl Into<String>, input: impl Into<String>, output: impl Into<String>) -> Self {
        Demonstration {
            instruction: instruction.into(),
            input: input.into(),
            output: output.into(),
        }
    }
}

/// Pairs every post with a pool instruction drawn uniformly at random.
pub fn build_demonstrations(corpus: &Corpus, seed: u64) -> Vec<Demonstration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    corpus
        .texts()
        .map(|text| {
            let instruction = INSTRUCTION_POOL[rng.gen_range(0..INSTRUCTION_POOL.len())];
            Demonstration::new(instruction, "", text)
        })
        .collect()
}

/// Specializes a pool instruction to a topic:
/// `What would you tweet?` becomes `What would you tweet about fasting?`.
pub fn topic_instruction(template: &str, topic: &str) -> String {
    let trimmed = template.trim_end();
    let (body, punctuation) = match trimmed.char_indices().last() {
        Some((i, c)) if c == '?' || c == '.' || c == '!' => (&trimmed[..i], &trimmed[i..]),
        _ => (trimmed, ""),
    };
    // "What would you want to tweet about?" already ends in the preposition.
    let body = body.strip_suffix(" about").unwrap_or(body);
    let mut out = String::with_capacity(body.len() + topic.len() + 8);
    out.push_str(body);
    out.push_str(" about ");
    out.push_str(topic);
    out.push_str(punctuation);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Document;

    fn corpus(n: usize) -> Corpus {
        let docs = (0..n)
            .map(|i| Document::new(alloc::format!("{i}"), "c", alloc::format!("post {i}")))
            .collect();
        Corpus::from_documents("c", docs).unwrap()
    }

    #[test]
    fn pool_has_twenty_distinct_templates() {
        let mut sorted = INSTRUCTION_POOL.to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 20);
        assert_eq!(INSTRUCTION_POOL[0], "What would you tweet?");
    }

    #[test]
    fn one_demo_per_post_with_verbatim_response() {
        let c = corpus(37);
        let demos = build_demonstrations(&c, 1);
        assert_eq!(demos.len(), 37);
        for (d, text) in demos.iter().zip(c.texts()) {
            assert_eq!(d.output, text);
            assert!(d.input.is_empty());
            assert!(INSTRUCTION_POOL.contains(&d.instruction.as_str()));
        }
        assert_eq!(demos, build_demonstrations(&c, 1));
        assert!(build_demonstrations(&corpus(0), 1).is_empty());
    }

    #[test]
    fn topic_specialization() {
        assert_eq!(
            topic_instruction("What would you tweet?", "fasting"),
            "What would you tweet about fasting?"
        );
        assert_eq!(
            topic_instruction("Tweet something.", "thinspo"),
            "Tweet something about thinspo."
        );
        assert_eq!(
            topic_instruction("What would you want to tweet about?", "ozempic"),
            "What would you want to tweet about ozempic?"
        );
    }
}
