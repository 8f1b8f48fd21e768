//! Provider-backed alignment measurements.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use twin_core::alignment::{
    emotion_profile, emotional_alignment, toxicity_histogram, EmotionProfile, ToxicityHistogram,
};
use twin_core::classify::{f1_report, origin_instruction, parse_origin_answer, F1Report, TrainedClassifier};
use twin_core::frechet::frechet_distance;
use twin_core::Corpus;

use crate::error::Result;
use crate::providers::{GenParams, Provider};

/// Label recorded when a model's answer names no known community.
pub const UNPARSED_LABEL: &str = "(unparsed)";

pub struct Scorers<'a> {
    pub embed: &'a Provider,
    pub emotions: &'a Provider,
    pub toxicity: &'a Provider,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceMetrics {
    pub documents: usize,
    pub emotion_profile: EmotionProfile,
    pub toxicity: ToxicityHistogram,
}

pub struct CorpusMeasurements {
    pub embeddings: Vec<Vec<f64>>,
    pub metrics: SourceMetrics,
}

pub fn measure(scorers: &Scorers<'_>, corpus: &Corpus, threshold: f64, bins: usize) -> Result<CorpusMeasurements> {
    let texts: Vec<String> = corpus.texts().map(str::to_string).collect();
    if texts.is_empty() {
        return Err(twin_core::Error::EmptyInput("corpus to measure").into());
    }
    let embeddings = scorers.embed.embed(&texts)?;
    let emotions = scorers.emotions.emotions(&texts)?;
    let toxicity = scorers.toxicity.toxicity(&texts)?;
    Ok(CorpusMeasurements {
        embeddings,
        metrics: SourceMetrics {
            documents: texts.len(),
            emotion_profile: emotion_profile(&emotions)?,
            toxicity: toxicity_histogram(&toxicity, threshold, bins)?,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityAlignment {
    pub community: String,
    pub fid_context: f64,
    pub fid_finetuned: f64,
    pub emotion_alignment_context: f64,
    pub emotion_alignment_finetuned: f64,
    /// Keyed by source: original, context, finetuned.
    pub sources: BTreeMap<String, SourceMetrics>,
}

/// Measures the original, context and finetuned corpora of one community.
pub fn align_community(
    scorers: &Scorers<'_>,
    orig: &Corpus,
    ctx: &Corpus,
    ft: &Corpus,
    threshold: f64,
    bins: usize,
) -> Result<CommunityAlignment> {
    let o = measure(scorers, orig, threshold, bins)?;
    let c = measure(scorers, ctx, threshold, bins)?;
    let f = measure(scorers, ft, threshold, bins)?;
    Ok(CommunityAlignment {
        community: orig.community.clone(),
        fid_context: frechet_distance(&o.embeddings, &c.embeddings)?,
        fid_finetuned: frechet_distance(&o.embeddings, &f.embeddings)?,
        emotion_alignment_context: emotional_alignment(&o.metrics.emotion_profile, &c.metrics.emotion_profile),
        emotion_alignment_finetuned: emotional_alignment(&o.metrics.emotion_profile, &f.metrics.emotion_profile),
        sources: [
            ("original", o.metrics),
            ("context", c.metrics),
            ("finetuned", f.metrics),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect(),
    })
}

/// Where origin labels come from.
pub enum OriginClassifier<'a> {
    Builtin(&'a TrainedClassifier),
    /// A generation endpoint tuned on the exported origin demonstrations.
    Model {
        provider: &'a Provider,
        seed: u64,
    },
}

impl OriginClassifier<'_> {
    pub fn classify(&self, texts: &[&str], communities: &[&str]) -> Result<Vec<String>> {
        match self {
            OriginClassifier::Builtin(c) => Ok(c
                .classify(texts.iter().copied())
                .into_iter()
                .map(String::from)
                .collect()),
            OriginClassifier::Model { provider, seed } => {
                let instruction = origin_instruction(communities);
                let requests: Vec<(String, GenParams)> = texts
                    .iter()
                    .map(|t| (format!("{instruction}\n{t}"), GenParams::new(0.0, 16, 1, *seed)))
                    .collect();
                Ok(provider
                    .generate_many(&requests)?
                    .into_iter()
                    .map(|out| {
                        out.first()
                            .and_then(|a| parse_origin_answer(a, communities))
                            .unwrap_or(UNPARSED_LABEL)
                            .to_string()
                    })
                    .collect())
            }
        }
    }
}

/// Macro/micro F1 of predicting each corpus's community.
pub fn origin_f1(classifier: &OriginClassifier<'_>, corpora: &[&Corpus], communities: &[&str]) -> Result<F1Report> {
    let texts: Vec<&str> = corpora.iter().flat_map(|c| c.texts()).collect();
    let gold: Vec<&str> = corpora
        .iter()
        .flat_map(|c| c.texts().map(|_| c.community.as_str()))
        .collect();
    let predicted = classifier.classify(&texts, communities)?;
    let predicted: Vec<&str> = predicted.iter().map(String::as_str).collect();
    let mut known: Vec<&str> = communities.to_vec();
    if predicted.contains(&UNPARSED_LABEL) {
        known.push(UNPARSED_LABEL);
    }
    let mut report = f1_report(&predicted, &gold, &known)?;
    if known.last() == Some(&UNPARSED_LABEL) {
        // the placeholder is not a class of its own
        report.per_class.remove(UNPARSED_LABEL);
        report.macro_f1 = report.per_class.values().sum::<f64>() / report.per_class.len() as f64;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginSummary {
    pub backend: String,
    pub holdout_accuracy: f64,
    pub train_size: usize,
    pub holdout_size: usize,
    /// Keyed by source: context, finetuned.
    pub f1: BTreeMap<String, F1Report>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub communities: Vec<CommunityAlignment>,
    pub origin: OriginSummary,
}

/// Histogram counts of `values` on `bins` equal-width bins over `[lo, hi]`;
/// values outside are clamped into the end bins.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins.max(1)];
    let width = (hi - lo) / counts.len() as f64;
    for &v in values {
        let i = if width > 0.0 { ((v - lo) / width).floor() } else { 0.0 };
        let i = (i.max(0.0) as usize).min(counts.len() - 1);
        counts[i] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_edges() {
        assert_eq!(histogram(&[0.0, 0.49, 0.5, 1.0, 2.0], 0.0, 1.0, 2), vec![2, 3]);
    }
}
