//! A small synthetic dataset for smoke runs: six communities with their own
//! vocabulary, a retweet graph clustered by community, and platform noise
//! (links, mentions, hashtags, emoji, reposts and replies).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twin_core::Document;

use crate::error::{Result, TwinError};
use crate::io::{write_csv, write_jsonl, Interaction};

pub const TOY_COMMUNITIES: [&str; 6] = [
    "Pro-ED",
    "Keto & Diet",
    "Body Image",
    "Anti-ED",
    "Healthy Lifestyle & Weight Loss",
    "Weight Loss Drugs",
];

const VOCABULARY: [&[&str]; 6] = [
    &[
        "thinspo",
        "fasting",
        "skinny",
        "hungry",
        "bones",
        "thin",
        "goal",
        "weight",
        "purge",
        "lighter",
        "empty",
        "starve",
        "collarbones",
        "restrict",
        "mirror",
        "ugw",
        "cw",
        "gw",
        "numbers",
        "scale",
        "thighgap",
        "calories",
        "control",
        "perfect",
        "small",
        "fragile",
        "hollow",
        "tiny",
        "lose",
        "pounds",
    ],
    &[
        "keto",
        "carbs",
        "macros",
        "bacon",
        "ketosis",
        "avocado",
        "butter",
        "eggs",
        "protein",
        "meal",
        "prep",
        "lowcarb",
        "cheese",
        "steak",
        "recipe",
        "fat",
        "electrolytes",
        "cauliflower",
        "bulletproof",
        "intermittent",
        "net",
        "grams",
        "sugar",
        "free",
        "diet",
        "tracking",
        "salmon",
        "almond",
        "flour",
        "breakfast",
    ],
    &[
        "body",
        "positivity",
        "confidence",
        "curves",
        "selfie",
        "beautiful",
        "skin",
        "acne",
        "stretch",
        "marks",
        "love",
        "yourself",
        "worthy",
        "photoshop",
        "filters",
        "insecure",
        "compare",
        "model",
        "magazine",
        "swimsuit",
        "embrace",
        "shape",
        "size",
        "jeans",
        "outfit",
        "glow",
        "real",
        "natural",
        "flaws",
        "accept",
    ],
    &[
        "recovery",
        "therapist",
        "anorexia",
        "bulimia",
        "relapse",
        "support",
        "healing",
        "treatment",
        "journey",
        "survivor",
        "awareness",
        "nourish",
        "gentle",
        "strong",
        "hope",
        "clinic",
        "dietitian",
        "progress",
        "setback",
        "brave",
        "counselor",
        "binge",
        "eating",
        "disorder",
        "orthorexia",
        "help",
        "listen",
        "okay",
        "proud",
        "heal",
    ],
    &[
        "workout",
        "gym",
        "cardio",
        "steps",
        "running",
        "yoga",
        "smoothie",
        "vegetables",
        "salad",
        "hydrate",
        "sleep",
        "routine",
        "miles",
        "squats",
        "sweat",
        "healthy",
        "habits",
        "wellness",
        "walk",
        "energy",
        "fitness",
        "training",
        "trail",
        "stretching",
        "greens",
        "quinoa",
        "balance",
        "mindful",
        "sunrise",
        "coach",
    ],
    &[
        "ozempic",
        "semaglutide",
        "wegovy",
        "mounjaro",
        "dose",
        "injection",
        "pharmacy",
        "prescription",
        "insurance",
        "nausea",
        "side",
        "effects",
        "appetite",
        "doctor",
        "glp1",
        "shortage",
        "supply",
        "pen",
        "weekly",
        "tirzepatide",
        "metformin",
        "phentermine",
        "copay",
        "refill",
        "endocrinologist",
        "clinic",
        "coverage",
        "shots",
        "results",
        "a1c",
    ],
];

const SHARED: &[&str] = &[
    "today", "really", "feel", "just", "so", "my", "i", "the", "and", "to", "week", "again", "still", "need", "want",
    "think", "about", "this", "is", "it", "day", "time", "always", "never", "more",
];

const EMOJI: &[&str] = &[
    "\u{1F60A}",
    "\u{1F525}",
    "\u{2728}",
    "\u{1F4AA}",
    "\u{1F622}",
    "\u{2764}\u{FE0F}",
];

const USERS_PER_COMMUNITY: usize = 30;

fn sentence(rng: &mut ChaCha8Rng, own: &[&str]) -> String {
    let len = rng.gen_range(6..=14);
    let words: Vec<&str> = (0..len)
        .map(|_| {
            if rng.gen_bool(0.6) {
                *own.choose(rng).expect("vocabulary")
            } else {
                *SHARED.choose(rng).expect("shared words")
            }
        })
        .collect();
    words.join(" ")
}

fn add_noise(rng: &mut ChaCha8Rng, text: &mut String, ci: usize) {
    if rng.gen_bool(0.2) {
        let _ = write!(text, " https://t.co/{:x}", rng.gen::<u32>());
    }
    if rng.gen_bool(0.2) {
        let _ = write!(text, " @u{ci}_{}", rng.gen_range(0..USERS_PER_COMMUNITY));
    }
    if rng.gen_bool(0.2) {
        let _ = write!(text, " #{}", VOCABULARY[ci].choose(rng).expect("vocabulary"));
    }
    if rng.gen_bool(0.2) {
        text.push(' ');
        text.push_str(EMOJI.choose(rng).expect("emoji"));
    }
}

/// Posts: `per_community` originals per community plus reposts, replies
/// and posts that are empty after cleaning.
pub fn toy_documents(per_community: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    for (ci, name) in TOY_COMMUNITIES.iter().enumerate() {
        let own = VOCABULARY[ci];
        for k in 0..per_community {
            let mut text = sentence(&mut rng, own);
            add_noise(&mut rng, &mut text, ci);
            let mut d = Document::new(format!("t{ci}-{k:04}"), *name, text);
            d.author = Some(format!("u{ci}_{}", k % USERS_PER_COMMUNITY));
            docs.push(d);
        }
        for k in 0..per_community / 10 {
            let mut d = Document::new(
                format!("t{ci}-rt{k:03}"),
                *name,
                format!("RT {}", sentence(&mut rng, own)),
            );
            d.author = Some(format!("u{ci}_{}", k % USERS_PER_COMMUNITY));
            d.is_repost = k % 2 == 0;
            d.is_reply = k % 2 == 1;
            docs.push(d);
        }
        for (k, emoji) in EMOJI.iter().take(3).enumerate() {
            let mut d = Document::new(
                format!("t{ci}-noise{k}"),
                *name,
                format!("https://t.co/{k} @u{ci}_{k} {emoji}"),
            );
            d.author = Some(format!("u{ci}_{k}"));
            docs.push(d);
        }
    }
    docs
}

/// Retweets, almost all within a community.
pub fn toy_interactions(seed: u64) -> Vec<Interaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut out = Vec::new();
    let n = TOY_COMMUNITIES.len();
    for ci in 0..n {
        for a in 0..USERS_PER_COMMUNITY {
            for _ in 0..8 {
                let mut b = rng.gen_range(0..USERS_PER_COMMUNITY);
                if b == a {
                    b = (b + 1) % USERS_PER_COMMUNITY;
                }
                out.push(Interaction {
                    source: format!("u{ci}_{a}"),
                    target: format!("u{ci}_{b}"),
                });
            }
        }
        for _ in 0..5 {
            let other = (ci + rng.gen_range(1..n)) % n;
            out.push(Interaction {
                source: format!("u{ci}_{}", rng.gen_range(0..USERS_PER_COMMUNITY)),
                target: format!("u{other}_{}", rng.gen_range(0..USERS_PER_COMMUNITY)),
            });
        }
    }
    out
}

/// Two annotators' harm labels for the first items of each community's
/// harm sheet; they agree most of the time.
pub fn toy_annotations(per_community: usize, seed: u64) -> Vec<Vec<String>> {
    const LABELS: [&str; 4] = ["none", "diet", "body", "ed"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11);
    let mut rows = Vec::new();
    for name in TOY_COMMUNITIES {
        for i in 0..per_community {
            let a = *LABELS.choose(&mut rng).expect("labels");
            let b = if rng.gen_bool(0.7) {
                a
            } else {
                *LABELS.choose(&mut rng).expect("labels")
            };
            rows.push(vec![format!("{name}#{:03}", i + 1), a.to_string(), b.to_string()]);
        }
    }
    rows
}

pub fn toy_config(seed: u64) -> String {
    let mut s = format!(
        r#"seed = {seed}
offline = true

[paths]
documents = "documents.jsonl"
interactions = "interactions.jsonl"
annotations = "annotations.csv"
out = "out"

[synth]
per_topic = 8
exemplars = 50
balance = 150

[eval]
origin_per_community = 200
triplets_per_community = 20
"#
    );
    for (ci, name) in TOY_COMMUNITIES.iter().enumerate() {
        let _ = write!(s, "\n[[communities]]\nname = \"{name}\"\nanchors = [\"u{ci}_0\"]\n");
    }
    s
}

/// Writes the dataset and a ready-to-run offline config into `dir`;
/// returns the config path.
pub fn write_toy(dir: &Path, seed: u64) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| TwinError::io(dir, e))?;
    write_jsonl(&dir.join("documents.jsonl"), &toy_documents(200, seed))?;
    write_jsonl(&dir.join("interactions.jsonl"), &toy_interactions(seed))?;
    write_csv(
        &dir.join("annotations.csv"),
        &["item_id", "label_a", "label_b"],
        &toy_annotations(30, seed),
    )?;
    let path = dir.join("twin.toml");
    std::fs::write(&path, toy_config(seed)).map_err(|e| TwinError::io(&path, e))?;
    Ok(path)
}
