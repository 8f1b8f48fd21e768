//! Clients for external model services.
//!
//! A [`Backend`] speaks to one service (HTTP or the offline mock). A
//! [`Provider`] wraps a backend with the on-disk response cache, batching,
//! and a bounded pool of in-flight requests. Results always come back in
//! input order.

pub mod cache;
pub mod http;
pub mod mock;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use twin_core::alignment::EmotionVector;

pub use cache::Cache;
pub use http::HttpBackend;
pub use mock::MockBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Generate,
    Embed,
    Emotions,
    Toxicity,
    Perplexity,
}

impl Operation {
    pub fn as_str(self) -> &'static str {
        match self {
            Operation::Generate => "generate",
            Operation::Embed => "embed",
            Operation::Emotions => "emotions",
            Operation::Toxicity => "toxicity",
            Operation::Perplexity => "perplexity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles after each failure.
    pub backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            backoff_ms: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding a bearer token, if the service wants one.
    pub token_env: Option<String>,
    pub timeout_secs: f64,
    pub max_in_flight: usize,
    pub batch_size: usize,
    pub retry: RetryPolicy,
    /// Path of the chat-completions route, e.g. `/v1/chat/completions`.
    pub generate_path: String,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint: String::new(),
            model: String::new(),
            token_env: None,
            timeout_secs: 120.0,
            max_in_flight: 4,
            batch_size: 64,
            retry: RetryPolicy::default(),
            generate_path: "/generate".into(),
        }
    }
}

impl ProviderConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        ProviderConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            ..ProviderConfig::default()
        }
    }

    pub fn validate(&self, role: &str) -> Result<(), String> {
        if self.endpoint.trim().is_empty() {
            return Err(format!("provider `{role}`: endpoint is empty"));
        }
        if self.max_in_flight == 0 {
            return Err(format!("provider `{role}`: max_in_flight must be at least 1"));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(format!("provider `{role}`: timeout_secs must be positive"));
        }
        if self.batch_size == 0 {
            return Err(format!("provider `{role}`: batch_size must be at least 1"));
        }
        if self.retry.max_attempts == 0 {
            return Err(format!("provider `{role}`: retry.max_attempts must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub temperature: f64,
    pub max_tokens: u32,
    pub n: usize,
    pub seed: u64,
}

impl GenParams {
    pub fn new(temperature: f64, max_tokens: u32, n: usize, seed: u64) -> Self {
        GenParams {
            temperature,
            max_tokens,
            n,
            seed,
        }
    }
}

/// Raw payload of a scoring call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Score {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("{endpoint}: transport failure after {attempts} attempt(s): {message}")]
    Transport {
        endpoint: String,
        attempts: u32,
        message: String,
    },
    #[error("{endpoint}: HTTP {status}: {excerpt}")]
    Status {
        endpoint: String,
        status: u16,
        excerpt: String,
    },
    #[error("{endpoint}: malformed response ({reason}): {excerpt}")]
    Malformed {
        endpoint: String,
        reason: String,
        excerpt: String,
    },
    #[error("{endpoint}: expected {expected} results, got {found}")]
    CountMismatch {
        endpoint: String,
        expected: usize,
        found: usize,
    },
    #[error("{operation} failed; unscored inputs {first}..={last}: {source}")]
    Unscored {
        operation: &'static str,
        first: usize,
        last: usize,
        #[source]
        source: Box<ProviderError>,
    },
    #[error("response cache: {0}")]
    Cache(String),
    #[error("invalid request: {0}")]
    InvalidRequest(&'static str),
}

pub type ProviderResult<T> = std::result::Result<T, ProviderError>;

pub(crate) fn excerpt(body: &str) -> String {
    const LIMIT: usize = 200;
    match body.char_indices().nth(LIMIT) {
        Some((cut, _)) => format!("{}…", &body[..cut]),
        None => body.to_string(),
    }
}

/// One model service.
pub trait Backend: Send + Sync {
    /// Identity used in cache keys: endpoint plus model.
    fn identity(&self) -> String;
    fn generate(&self, prompt: &str, params: &GenParams) -> ProviderResult<Vec<String>>;
    fn score(&self, op: Operation, texts: &[String]) -> ProviderResult<Vec<Score>>;
    /// Requests sent so far (HTTP attempts, or mock invocations).
    fn requests(&self) -> usize;
}

/// Runs `jobs` closures with at most `limit` in flight; results keep job
/// order.
pub fn run_bounded<T, F>(jobs: usize, limit: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if jobs == 0 {
        return Vec::new();
    }
    let limit = limit.clamp(1, jobs);
    if limit == 1 {
        return (0..jobs).map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<T>> = (0..jobs).map(|_| None).collect();
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..limit {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let out = f(i);
                results.lock().expect("result slots poisoned")[i] = Some(out);
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every job ran")).collect()
}

/// A backend with caching, batching and bounded concurrency.
pub struct Provider {
    backend: Arc<dyn Backend>,
    cache: Option<Arc<Cache>>,
    batch_size: usize,
    max_in_flight: usize,
    calls: AtomicUsize,
}

impl Provider {
    pub fn new(backend: Arc<dyn Backend>, config: &ProviderConfig) -> Self {
        Provider {
            backend,
            cache: None,
            batch_size: config.batch_size.max(1),
            max_in_flight: config.max_in_flight.max(1),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn with_cache(mut self, cache: Arc<Cache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn identity(&self) -> String {
        self.backend.identity()
    }

    /// Backend calls made through this handle (cache hits excluded).
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    fn generation_key(&self, prompt: &str, params: &GenParams) -> String {
        let params = serde_json::to_string(params).expect("params serialize");
        Cache::key(&[&self.backend.identity(), Operation::Generate.as_str(), prompt, &params])
    }

    /// `params.n` completions of `prompt`.
    pub fn generate(&self, prompt: &str, params: &GenParams) -> ProviderResult<Vec<String>> {
        if params.n == 0 {
            return Ok(Vec::new());
        }
        if prompt.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("prompt is empty"));
        }
        let key = self.generation_key(prompt, params);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get::<Vec<String>>(&key)? {
                if hit.len() == params.n {
                    return Ok(hit);
                }
            }
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let out = self.backend.generate(prompt, params)?;
        if out.len() != params.n {
            return Err(ProviderError::CountMismatch {
                endpoint: self.backend.identity(),
                expected: params.n,
                found: out.len(),
            });
        }
        if let Some(cache) = &self.cache {
            cache.put(&key, &out)?;
        }
        Ok(out)
    }

    /// Independent generation requests through the bounded pool, each with
    /// its own outcome.
    pub fn generate_each(&self, requests: &[(String, GenParams)]) -> Vec<ProviderResult<Vec<String>>> {
        run_bounded(requests.len(), self.max_in_flight, |i| {
            self.generate(&requests[i].0, &requests[i].1)
        })
    }

    /// Like [`Provider::generate_each`], failing on the first error in
    /// request order.
    pub fn generate_many(&self, requests: &[(String, GenParams)]) -> ProviderResult<Vec<Vec<String>>> {
        self.generate_each(requests).into_iter().collect()
    }

    fn score(&self, op: Operation, texts: &[String]) -> ProviderResult<Vec<Score>> {
        let identity = self.backend.identity();
        let keys: Vec<String> = texts.iter().map(|t| Cache::key(&[&identity, op.as_str(), t])).collect();
        let mut out: Vec<Option<Score>> = vec![None; texts.len()];
        if let Some(cache) = &self.cache {
            for (slot, key) in out.iter_mut().zip(&keys) {
                *slot = cache.get(key)?;
            }
        }
        // each distinct missing text is sent once
        let mut pending: Vec<usize> = Vec::new();
        let mut seen = std::collections::HashMap::new();
        for (i, slot) in out.iter().enumerate() {
            if slot.is_none() {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(texts[i].as_str()) {
                    e.insert(i);
                    pending.push(i);
                }
            }
        }
        let batches: Vec<&[usize]> = pending.chunks(self.batch_size).collect();
        let results = run_bounded(batches.len(), self.max_in_flight, |b| {
            let batch: Vec<String> = batches[b].iter().map(|&i| texts[i].clone()).collect();
            self.calls.fetch_add(1, Ordering::Relaxed);
            let scored = self.backend.score(op, &batch)?;
            if scored.len() != batch.len() {
                return Err(ProviderError::CountMismatch {
                    endpoint: identity.clone(),
                    expected: batch.len(),
                    found: scored.len(),
                });
            }
            Ok(scored)
        });
        for (batch, result) in batches.iter().zip(results) {
            let scored = result.map_err(|e| ProviderError::Unscored {
                operation: op.as_str(),
                first: batch[0],
                last: *batch.last().expect("non-empty batch"),
                source: Box::new(e),
            })?;
            for (&i, score) in batch.iter().zip(scored) {
                if let Some(cache) = &self.cache {
                    cache.put(&keys[i], &score)?;
                }
                out[i] = Some(score);
            }
        }
        // duplicates of a text scored in this call share its result
        let filled: Vec<Option<Score>> = out.clone();
        out.into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.or_else(|| filled[seen[texts[i].as_str()]].clone())
                    .ok_or(ProviderError::InvalidRequest("text left unscored"))
            })
            .collect()
    }

    fn scalars(&self, op: Operation, texts: &[String]) -> ProviderResult<Vec<f64>> {
        self.score(op, texts)?
            .into_iter()
            .map(|s| match s {
                Score::Scalar(x) if x.is_finite() => Ok(x),
                other => Err(self.malformed(op, "expected one finite number per text", &other)),
            })
            .collect()
    }

    fn malformed(&self, op: Operation, reason: &str, got: &Score) -> ProviderError {
        ProviderError::Malformed {
            endpoint: format!("{} /{}", self.backend.identity(), op.as_str()),
            reason: reason.into(),
            excerpt: excerpt(&serde_json::to_string(got).unwrap_or_default()),
        }
    }

    pub fn embed(&self, texts: &[String]) -> ProviderResult<Vec<Vec<f64>>> {
        let vectors: Vec<Vec<f64>> = self
            .score(Operation::Embed, texts)?
            .into_iter()
            .map(|s| match s {
                Score::Vector(v) => Ok(v),
                other => Err(self.malformed(Operation::Embed, "expected a vector per text", &other)),
            })
            .collect::<ProviderResult<_>>()?;
        if let Some(first) = vectors.first() {
            if let Some(bad) = vectors.iter().find(|v| v.len() != first.len()) {
                return Err(self.malformed(
                    Operation::Embed,
                    "embedding dimensions differ",
                    &Score::Vector(bad.clone()),
                ));
            }
        }
        Ok(vectors)
    }

    pub fn emotions(&self, texts: &[String]) -> ProviderResult<Vec<EmotionVector>> {
        self.score(Operation::Emotions, texts)?
            .into_iter()
            .map(|s| {
                let parsed = match &s {
                    Score::Vector(v) if v.len() == 11 => {
                        let mut a = [0.0; 11];
                        a.copy_from_slice(v);
                        EmotionVector::new(a).ok()
                    }
                    _ => None,
                };
                parsed.ok_or_else(|| self.malformed(Operation::Emotions, "expected 11 confidences in [0,1]", &s))
            })
            .collect()
    }

    pub fn toxicity(&self, texts: &[String]) -> ProviderResult<Vec<f64>> {
        let scores = self.scalars(Operation::Toxicity, texts)?;
        if let Some(&bad) = scores.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(self.malformed(Operation::Toxicity, "toxicity outside [0,1]", &Score::Scalar(bad)));
        }
        Ok(scores)
    }

    pub fn perplexity(&self, texts: &[String]) -> ProviderResult<Vec<f64>> {
        let scores = self.scalars(Operation::Perplexity, texts)?;
        if let Some(&bad) = scores.iter().find(|x| **x < 0.0) {
            return Err(self.malformed(Operation::Perplexity, "negative perplexity", &Score::Scalar(bad)));
        }
        Ok(scores)
    }
}
