//! Run configuration, read from TOML.
//!
//! Every threshold and cap lives here with its default; pipeline code reads
//! them from the config and never hard-codes them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use twin_core::corpus::CleanOptions;

use crate::error::{Result, TwinError};
use crate::providers::ProviderConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// Use mock providers for every service.
    pub offline: bool,
    pub paths: Paths,
    pub corpus: CorpusConfig,
    pub graph: GraphConfig,
    pub communities: Vec<CommunityMapping>,
    pub synth: SynthConfig,
    pub eval: EvalConfig,
    pub screen: ScreenConfig,
    pub providers: Providers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Raw posts, one JSON record per line.
    pub documents: PathBuf,
    /// `{source, target}` retweet records. Without it, documents must carry
    /// their community.
    pub interactions: Option<PathBuf>,
    /// External general-purpose demonstrations appended to each community's.
    pub general_demonstrations: Option<PathBuf>,
    /// Human annotation labels, read by `report` when present.
    pub annotations: Option<PathBuf>,
    pub out: PathBuf,
    /// Defaults to `<out>/cache`.
    pub cache: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            documents: "documents.jsonl".into(),
            interactions: None,
            general_demonstrations: None,
            annotations: None,
            out: "out".into(),
            cache: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub lowercase: bool,
    pub extra_patterns: Vec<String>,
    /// Posts kept per community after perplexity ranking.
    pub cap: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            lowercase: false,
            extra_patterns: Vec::new(),
            cap: 10_000,
        }
    }
}

impl CorpusConfig {
    pub fn clean_options(&self) -> CleanOptions {
        CleanOptions {
            lowercase: self.lowercase,
            extra_patterns: self.extra_patterns.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub weighted: bool,
    pub resolution: f64,
    pub top_k: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            weighted: true,
            resolution: 1.0,
            top_k: 20,
        }
    }
}

/// Names a community and the user clusters it is made of, given either by
/// cluster id or by users whose clusters it includes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunityMapping {
    pub name: String,
    #[serde(default)]
    pub clusters: Vec<usize>,
    #[serde(default)]
    pub anchors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Overrides the built-in topic list.
    pub topics: Option<Vec<String>>,
    pub per_topic: usize,
    pub exemplars: usize,
    pub exemplar_tokens: usize,
    pub max_perplexity: f64,
    pub max_similarity: f64,
    pub balance: usize,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            topics: None,
            per_topic: 1000,
            exemplars: 250,
            exemplar_tokens: 20,
            max_perplexity: 400.0,
            max_similarity: 0.7,
            balance: 6000,
            temperature: 1.0,
            max_tokens: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OriginBackend {
    /// The bag-of-words classifier.
    Builtin,
    /// Ask the `classifier` provider, a model tuned on the exported
    /// origin demonstrations.
    Provider,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub toxicity_threshold: f64,
    pub toxicity_bins: usize,
    pub origin_per_community: usize,
    pub origin_holdout: f64,
    pub origin_backend: OriginBackend,
    pub triplets_per_community: usize,
    pub harm_per_source: usize,
    pub profile_sample: usize,
    pub histogram_bins: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            toxicity_threshold: 0.05,
            toxicity_bins: 19,
            origin_per_community: 3000,
            origin_holdout: 0.05,
            origin_backend: OriginBackend::Builtin,
            triplets_per_community: 50,
            harm_per_source: 20,
            profile_sample: 200,
            histogram_bins: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreenConfig {
    pub samples: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Extra completions requested per item to replace unparsable ones.
    pub retry_budget: usize,
    /// A questionnaire file (TOML or JSON); the built-in screener otherwise.
    pub questionnaire: Option<PathBuf>,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            samples: 50,
            temperature: 0.7,
            max_tokens: 16,
            retry_budget: 25,
            questionnaire: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Providers {
    pub perplexity: Option<ProviderConfig>,
    pub embed: Option<ProviderConfig>,
    pub emotions: Option<ProviderConfig>,
    pub toxicity: Option<ProviderConfig>,
    /// Untuned generator for the in-context baseline and profiling.
    pub base: Option<ProviderConfig>,
    /// Origin classifier for `eval.origin_backend = "provider"`.
    pub classifier: Option<ProviderConfig>,
    /// Community-aligned generators by community name; `"*"` is the fallback.
    pub aligned: BTreeMap<String, ProviderConfig>,
}

impl Providers {
    pub fn aligned_for(&self, community: &str) -> Option<&ProviderConfig> {
        self.aligned.get(community).or_else(|| self.aligned.get("*"))
    }
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty());
    let last = last.ok_or_else(|| TwinError::Config(format!("override key `{key}` is empty")))?;
    let mut current = table;
    for p in parts {
        current = current
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| TwinError::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

fn check(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(TwinError::Config(message.into()))
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TwinError::io(path, e))?;
        let mut config: Config =
            toml::from_str(&text).map_err(|e| TwinError::Config(format!("{}: {e}", path.display())))?;
        config.resolve_relative_to(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    /// Like [`Config::load`], applying `key.path=value` overrides first.
    /// Values parse as TOML and fall back to plain strings.
    pub fn load_with_overrides(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TwinError::io(path, e))?;
        let mut table: toml::Table =
            toml::from_str(&text).map_err(|e| TwinError::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| TwinError::Config(format!("override `{o}` is not KEY=VALUE")))?;
            let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            set_dotted(&mut table, key.trim(), value)?;
        }
        let mut config: Config = toml::Value::Table(table)
            .try_into()
            .map_err(|e| TwinError::Config(format!("{}: {e}", path.display())))?;
        config.resolve_relative_to(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    /// Makes relative paths relative to the config file's directory.
    pub fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.paths.documents);
        fix(&mut self.paths.out);
        for p in [
            &mut self.paths.interactions,
            &mut self.paths.general_demonstrations,
            &mut self.paths.annotations,
            &mut self.paths.cache,
            &mut self.screen.questionnaire,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.paths.cache.clone().unwrap_or_else(|| self.paths.out.join("cache"))
    }

    /// Checks everything that does not depend on which stage runs.
    pub fn validate(&self) -> Result<()> {
        check(self.corpus.cap >= 1, "corpus.cap must be at least 1")?;
        check(self.graph.resolution > 0.0, "graph.resolution must be positive")?;
        check(self.graph.top_k >= 1, "graph.top_k must be at least 1")?;
        let s = &self.synth;
        check(s.per_topic >= 1, "synth.per_topic must be at least 1")?;
        check(s.exemplars >= 1, "synth.exemplars must be at least 1")?;
        check(s.exemplar_tokens >= 1, "synth.exemplar_tokens must be at least 1")?;
        check(s.max_perplexity >= 0.0, "synth.max_perplexity must be non-negative")?;
        check(
            (0.0..=1.0).contains(&s.max_similarity),
            "synth.max_similarity must be in [0, 1]",
        )?;
        check(s.balance >= 1, "synth.balance must be at least 1")?;
        check(s.temperature >= 0.0, "synth.temperature must be non-negative")?;
        if let Some(topics) = &s.topics {
            check(!topics.is_empty(), "synth.topics must not be empty")?;
        }
        let e = &self.eval;
        check(
            (0.0..1.0).contains(&e.toxicity_threshold),
            "eval.toxicity_threshold must be in [0, 1)",
        )?;
        check(e.toxicity_bins >= 1, "eval.toxicity_bins must be at least 1")?;
        check(e.histogram_bins >= 1, "eval.histogram_bins must be at least 1")?;
        check(
            e.origin_per_community >= 2,
            "eval.origin_per_community must be at least 2",
        )?;
        check(
            (0.0..1.0).contains(&e.origin_holdout),
            "eval.origin_holdout must be in [0, 1)",
        )?;
        check(
            self.screen.samples >= 1,
            "screen.samples must be at least 1 (no responses otherwise)",
        )?;
        check(
            self.screen.temperature >= 0.0,
            "screen.temperature must be non-negative",
        )?;

        let mut names = std::collections::BTreeSet::new();
        for c in &self.communities {
            check(!c.name.trim().is_empty(), "community names must not be empty")?;
            check(
                names.insert(&c.name),
                &format!("community `{}` is listed twice", c.name),
            )?;
            if self.paths.interactions.is_some() {
                check(
                    !c.clusters.is_empty() || !c.anchors.is_empty(),
                    &format!("community `{}` needs clusters or anchors", c.name),
                )?;
            }
        }
        let p = &self.providers;
        for (role, cfg) in [
            ("perplexity", &p.perplexity),
            ("embed", &p.embed),
            ("emotions", &p.emotions),
            ("toxicity", &p.toxicity),
            ("base", &p.base),
            ("classifier", &p.classifier),
        ] {
            if let Some(cfg) = cfg {
                cfg.validate(role).map_err(TwinError::Config)?;
            }
        }
        for (name, cfg) in &p.aligned {
            cfg.validate(&format!("aligned.{name}")).map_err(TwinError::Config)?;
        }
        Ok(())
    }

    /// Fails unless every listed provider role is configured (or the run is
    /// offline, where mocks stand in).
    pub fn require_providers(&self, stage: &str, roles: &[&str], communities: &[String]) -> Result<()> {
        if self.offline {
            return Ok(());
        }
        let p = &self.providers;
        for role in roles {
            let missing = match *role {
                "perplexity" => p.perplexity.is_none(),
                "embed" => p.embed.is_none(),
                "emotions" => p.emotions.is_none(),
                "toxicity" => p.toxicity.is_none(),
                "base" => p.base.is_none(),
                "classifier" => p.classifier.is_none(),
                "aligned" => {
                    if let Some(c) = communities.iter().find(|c| p.aligned_for(c).is_none()) {
                        return Err(TwinError::Config(format!(
                            "`{stage}` needs an aligned endpoint for community `{c}` (providers.aligned)"
                        )));
                    }
                    false
                }
                other => unreachable!("unknown provider role {other}"),
            };
            if missing {
                return Err(TwinError::Config(format!("`{stage}` needs providers.{role}")));
            }
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn topics(&self) -> Vec<twin_core::topics::Topic> {
        match &self.synth.topics {
            Some(names) => names.iter().map(twin_core::topics::Topic::new).collect(),
            None => twin_core::topics::default_topics(),
        }
    }
}
