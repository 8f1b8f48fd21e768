//! HTTP backend.
//!
//! Generation uses a chat-completions body: `{model, messages, temperature,
//! n, max_tokens, seed}` answered by `{choices: [{message: {content}}]}`.
//! Scoring posts `{model, texts}` to `/embed`, `/emotions`, `/toxicity` or
//! `/perplexity` and expects `{scores: [...]}` or `{vectors: [...]}`.
//! Emotion responses may carry `labels`, in which case the columns are
//! reordered to the canonical label order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde_json::{json, Value};
use twin_core::alignment::EMOTION_LABELS;

use super::{excerpt, Backend, GenParams, Operation, ProviderConfig, ProviderError, ProviderResult, Score};

/// Default environment variable for the bearer token.
pub const TOKEN_ENV: &str = "TWIN_API_TOKEN";

pub struct HttpBackend {
    config: ProviderConfig,
    agent: ureq::Agent,
    token: Option<String>,
    requests: AtomicUsize,
}

impl HttpBackend {
    /// Reads the bearer token from `config.token_env` when set, otherwise
    /// from [`TOKEN_ENV`].
    pub fn new(config: ProviderConfig) -> Self {
        let token = std::env::var(config.token_env.as_deref().unwrap_or(TOKEN_ENV))
            .ok()
            .filter(|t| !t.is_empty());
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend {
            config,
            agent,
            token,
            requests: AtomicUsize::new(0),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    /// POSTs JSON with retries on transport errors, 429 and 5xx.
    fn post(&self, path: &str, body: &Value) -> ProviderResult<Value> {
        let url = self.url(path);
        let payload = serde_json::to_vec(body).expect("request body serializes");
        let attempts = self.config.retry.max_attempts.max(1);
        let mut last = None;
        for attempt in 1..=attempts {
            if attempt > 1 {
                let factor = 1u64 << (attempt - 2).min(16);
                std::thread::sleep(Duration::from_millis(
                    self.config.retry.backoff_ms.saturating_mul(factor),
                ));
            }
            self.requests.fetch_add(1, Ordering::Relaxed);
            let mut req = self.agent.post(&url).header("content-type", "application/json");
            if let Some(token) = &self.token {
                req = req.header("authorization", format!("Bearer {token}"));
            }
            match req.send(&payload[..]) {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    let text = resp.body_mut().read_to_string().unwrap_or_default();
                    if (200..300).contains(&status) {
                        return serde_json::from_str(&text).map_err(|e| ProviderError::Malformed {
                            endpoint: url.clone(),
                            reason: format!("invalid JSON: {e}"),
                            excerpt: excerpt(&text),
                        });
                    }
                    let err = ProviderError::Status {
                        endpoint: url.clone(),
                        status,
                        excerpt: excerpt(&text),
                    };
                    if status != 429 && status < 500 {
                        return Err(err);
                    }
                    log::warn!("{err} (attempt {attempt}/{attempts})");
                    last = Some(err);
                }
                Err(e) => {
                    log::warn!("{url}: {e} (attempt {attempt}/{attempts})");
                    last = Some(ProviderError::Transport {
                        endpoint: url.clone(),
                        attempts,
                        message: e.to_string(),
                    });
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn malformed(&self, path: &str, reason: &str, body: &Value) -> ProviderError {
        ProviderError::Malformed {
            endpoint: self.url(path),
            reason: reason.into(),
            excerpt: excerpt(&body.to_string()),
        }
    }

    fn completions(&self, prompt: &str, params: &GenParams, n: usize, seed: u64) -> ProviderResult<Vec<String>> {
        let path = &self.config.generate_path;
        let body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "n": n,
            "seed": seed,
        });
        let resp = self.post(path, &body)?;
        let choices = resp
            .get("choices")
            .and_then(Value::as_array)
            .ok_or_else(|| self.malformed(path, "missing `choices` array", &resp))?;
        choices
            .iter()
            .map(|c| {
                c.pointer("/message/content")
                    .or_else(|| c.get("text"))
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| self.malformed(path, "choice without message content", &resp))
            })
            .collect()
    }
}

fn path_for(op: Operation) -> &'static str {
    match op {
        Operation::Generate => "/generate",
        Operation::Embed => "/embed",
        Operation::Emotions => "/emotions",
        Operation::Toxicity => "/toxicity",
        Operation::Perplexity => "/perplexity",
    }
}

impl Backend for HttpBackend {
    fn identity(&self) -> String {
        format!("{}|{}", self.config.endpoint.trim_end_matches('/'), self.config.model)
    }

    /// Servers that ignore `n` are asked again until `n` completions arrive.
    fn generate(&self, prompt: &str, params: &GenParams) -> ProviderResult<Vec<String>> {
        let mut out = Vec::with_capacity(params.n);
        let mut round = 0u64;
        while out.len() < params.n {
            let want = params.n - out.len();
            let got = self.completions(prompt, params, want, params.seed.wrapping_add(round))?;
            if got.is_empty() {
                return Err(ProviderError::CountMismatch {
                    endpoint: self.url(&self.config.generate_path),
                    expected: params.n,
                    found: out.len(),
                });
            }
            out.extend(got.into_iter().take(want));
            round += 1;
        }
        Ok(out)
    }

    fn score(&self, op: Operation, texts: &[String]) -> ProviderResult<Vec<Score>> {
        let path = path_for(op);
        let resp = self.post(path, &json!({"model": self.config.model, "texts": texts}))?;
        if let Some(scores) = resp.get("scores").and_then(Value::as_array) {
            return scores
                .iter()
                .map(|s| match s {
                    Value::Number(n) => n.as_f64().map(Score::Scalar),
                    Value::Array(_) => serde_json::from_value(s.clone()).ok().map(Score::Vector),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| self.malformed(path, "non-numeric entry in `scores`", &resp));
        }
        let vectors: Vec<Vec<f64>> = resp
            .get("vectors")
            .cloned()
            .and_then(|v| serde_json::from_value(v).ok())
            .ok_or_else(|| self.malformed(path, "expected `scores` or `vectors`", &resp))?;
        let vectors = match (op, resp.get("labels")) {
            (Operation::Emotions, Some(labels)) => {
                let labels: Vec<String> = serde_json::from_value(labels.clone())
                    .map_err(|_| self.malformed(path, "`labels` must be strings", &resp))?;
                let order: Vec<usize> = EMOTION_LABELS
                    .iter()
                    .map(|want| labels.iter().position(|l| l.eq_ignore_ascii_case(want)))
                    .collect::<Option<_>>()
                    .ok_or_else(|| self.malformed(path, "emotion labels incomplete", &resp))?;
                vectors
                    .into_iter()
                    .map(|v| order.iter().map(|&i| v.get(i).copied()).collect::<Option<Vec<f64>>>())
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| self.malformed(path, "vector shorter than labels", &resp))?
            }
            _ => vectors,
        };
        Ok(vectors.into_iter().map(Score::Vector).collect())
    }

    fn requests(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }
}
