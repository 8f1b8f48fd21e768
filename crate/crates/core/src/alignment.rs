//! Emotion profiles, emotional alignment, and toxicity histograms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const EMOTION_LABELS: [&str; 11] = [
    "anger",
    "anticipation",
    "disgust",
    "fear",
    "joy",
    "love",
    "optimism",
    "pessimism",
    "sadness",
    "surprise",
    "trust",
];

/// Per-document confidences, one per entry of [`EMOTION_LABELS`], each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmotionVector([f64; 11]);

impl EmotionVector {
    pub fn new(values: [f64; 11]) -> Result<Self> {
        for (label, v) in EMOTION_LABELS.iter().zip(values) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidEmotion(format!("{label} = {v} outside [0, 1]")));
            }
        }
        Ok(EmotionVector(values))
    }

    pub fn values(&self) -> &[f64; 11] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for EmotionVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        let arr: [f64; 11] = v
            .try_into()
            .map_err(|v: Vec<f64>| Error::InvalidEmotion(format!("expected 11 confidences, found {}", v.len())))?;
        EmotionVector::new(arr)
    }
}

impl From<EmotionVector> for Vec<f64> {
    fn from(v: EmotionVector) -> Self {
        v.0.to_vec()
    }
}

/// Normalized emotion mass of a corpus (components sum to one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionProfile([f64; 11]);

impl EmotionProfile {
    /// Validates and wraps an existing distribution.
    pub fn new(values: [f64; 11]) -> Result<Self> {
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidEmotion(format!(
                "negative or non-finite mass in {values:?}"
            )));
        }
        let total: f64 = values.iter().sum();
        if libm::fabs(total - 1.0) > 1e-9 {
            return Err(Error::InvalidEmotion(format!("masses sum to {total}, not 1")));
        }
        Ok(EmotionProfile(values))
    }

    pub fn values(&self) -> &[f64; 11] {
        &self.0
    }
}

/// Sums raw confidences across documents and normalizes by the grand total.
pub fn emotion_profile(vectors: &[EmotionVector]) -> Result<EmotionProfile> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("emotion vectors"));
    }
    let mut sum = [0.0; 11];
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v.0) {
            *s += x;
        }
    }
    let total: f64 = sum.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateEmotionMass);
    }
    sum.iter_mut().for_each(|s| *s /= total);
    Ok(EmotionProfile(sum))
}

/// Base-2 Jensen–Shannon divergence, in [0, 1].
pub fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if m <= 0.0 {
            continue;
        }
        let mut term = 0.0;
        if a > 0.0 {
            term += a * libm::log2(a / m);
        }
        if b > 0.0 {
            term += b * libm::log2(b / m);
        }
        total += term;
    }
    (0.5 * total).clamp(0.0, 1.0)
}

/// One minus the Jensen–Shannon distance (square root of the base-2
/// divergence).
pub fn emotional_alignment(p: &EmotionProfile, q: &EmotionProfile) -> f64 {
    1.0 - libm::sqrt(js_divergence(&p.0, &q.0))
}

/// Equal-width histogram of scores at or above a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToxicityHistogram {
    pub threshold: f64,
    /// `bins + 1` edges from the threshold to 1.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Counts divided by the sample count; all zero when nothing qualified.
    pub masses: Vec<f64>,
    pub sample_count: usize,
}

pub fn toxicity_histogram(scores: &[f64], threshold: f64, bins: usize) -> Result<ToxicityHistogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin"));
    }
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidParameter("toxicity threshold must be in [0, 1)"));
    }
    if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidScore(format!("toxicity {bad} outside [0, 1]")));
    }
    let width = (1.0 - threshold) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| threshold + width * i as f64).collect();
    let mut counts = vec![0usize; bins];
    let mut sample_count = 0;
    for &s in scores.iter().filter(|&&s| s >= threshold) {
        let bin = (libm::floor((s - threshold) / width) as usize).min(bins - 1);
        counts[bin] += 1;
        sample_count += 1;
    }
    let masses = counts
        .iter()
        .map(|&c| {
            if sample_count == 0 {
                0.0
            } else {
                c as f64 / sample_count as f64
            }
        })
        .collect();
    Ok(ToxicityHistogram {
        threshold,
        edges,
        counts,
        masses,
        sample_count,
    })
}
