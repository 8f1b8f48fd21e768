//! Stage orchestration. Each stage reads the previous stages' files under
//! `out/`, writes its own directory from scratch and records digests in the
//! run manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use twin_core::agreement::cohens_kappa;
use twin_core::alignment::EMOTION_LABELS;
use twin_core::classify::{origin_demonstrations, split_for_origin, train_origin_classifier};
use twin_core::corpus::{clean_text_with, filter_originals, select_lowest_perplexity};
use twin_core::demos::{build_demonstrations, Demonstration};
use twin_core::graph::{louvain_with, top_clusters, LouvainConfig};
use twin_core::sampling::{sample_harm_batch, sample_triplets, HarmKey, HarmRow, Sheet, TripletKey, TripletRow};
use twin_core::screen::{discrepancies, display_score, rank_results, swed, Criteria, Questionnaire, ScreeningResult};
use twin_core::synth::{external_similarity, filter_synthetic, internal_similarity, FilterConfig, FilterStats};
use twin_core::topics::count_topic_mentions;
use twin_core::{Corpus, Document, InteractionGraph};

use crate::config::{Config, OriginBackend};
use crate::derive_seed;
use crate::error::{Result, TwinError};
use crate::evaluation::{
    align_community, histogram, origin_f1, AlignmentReport, OriginClassifier, OriginSummary, Scorers,
};
use crate::io::{
    fmt_f, read_csv, read_json, read_jsonl, require, slug, write_csv, write_json, write_jsonl, Interaction,
    PartitionRecord,
};
use crate::manifest::{digests, now_unix, ProviderRecord, RunManifest, StageRecord};
use crate::providers::{Cache, HttpBackend, MockBackend, Provider, ProviderConfig, ProviderError};
use crate::screening::{
    administer, load_questionnaire, results_from_votes, score, AdministerPlan, ReferenceRow, VoteRow,
};
use crate::synthgen::{
    fingerprint, generate_context_corpus, generate_finetuned_corpus, profile_community, Checkpoints, ContextPlan,
    GenerationPlan,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Communities,
    Curate,
    Demos,
    Generate,
    Evaluate,
    Screen,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Communities,
        Stage::Curate,
        Stage::Demos,
        Stage::Generate,
        Stage::Evaluate,
        Stage::Screen,
        Stage::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Communities => "communities",
            Stage::Curate => "curate",
            Stage::Demos => "demos",
            Stage::Generate => "generate",
            Stage::Evaluate => "evaluate",
            Stage::Screen => "screen",
            Stage::Report => "report",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One entry of `communities/index.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityEntry {
    pub name: String,
    pub slug: String,
    pub documents: usize,
    /// Louvain clusters mapped to the community (empty without a graph).
    pub clusters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records: usize,
    pub reposts_and_replies: usize,
    pub empty_after_cleaning: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub clusters: usize,
    pub modularity: f64,
    pub phase_modularity: Vec<f64>,
    pub unassigned_documents: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFilterStats {
    pub finetuned: FilterStats,
    pub context: FilterStats,
}

/// A screening row with the published values it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningEntry {
    #[serde(flatten)]
    pub result: ScreeningResult,
    pub reference: Option<Criteria>,
    pub discrepancies: Vec<String>,
}

/// Annotation labels for one item from two annotators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub item_id: String,
    pub label_a: String,
    pub label_b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub items: usize,
    pub kappa: Option<f64>,
    pub error: Option<String>,
}

pub struct Pipeline {
    config: Config,
    out: PathBuf,
    cache: Arc<Cache>,
    registry: Mutex<Vec<(String, Arc<Provider>)>>,
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| TwinError::io(path, e))
}

/// Files under `dir`, sorted, recursively.
fn files_under(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| TwinError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            out.extend(files_under(&p)?);
        } else {
            out.push(p);
        }
    }
    Ok(out)
}

fn provider_context(context: String) -> impl FnOnce(ProviderError) -> TwinError {
    move |source| TwinError::ProviderContext { context, source }
}

fn flag(b: bool) -> &'static str {
    if b {
        "T"
    } else {
        "F"
    }
}

impl Pipeline {
    /// Validates the configuration and opens the output directory and cache.
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let out = config.paths.out.clone();
        create_dir(&out)?;
        let cache = Arc::new(Cache::open(config.cache_dir())?);
        Ok(Pipeline {
            config,
            out,
            cache,
            registry: Mutex::new(Vec::new()),
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn out(&self) -> &Path {
        &self.out
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.out.join(stage.as_str())
    }

    fn seed(&self, parts: &[&str]) -> u64 {
        derive_seed(self.config.seed, parts)
    }

    fn register(&self, role: &str, provider: Provider) -> Arc<Provider> {
        let p = Arc::new(provider.with_cache(self.cache.clone()));
        self.registry
            .lock()
            .expect("registry lock")
            .push((role.to_string(), p.clone()));
        p
    }

    /// An HTTP provider for `role`, or a mock when offline.
    fn provider(&self, role: &str, cfg: Option<&ProviderConfig>) -> Result<Arc<Provider>> {
        let provider = if self.config.offline {
            Provider::new(
                Arc::new(MockBackend::new(role, self.config.seed)),
                &ProviderConfig::default(),
            )
        } else {
            let cfg = cfg.ok_or_else(|| TwinError::Config(format!("providers.{role} is not configured")))?;
            Provider::new(Arc::new(HttpBackend::new(cfg.clone())), cfg)
        };
        Ok(self.register(role, provider))
    }

    /// The model aligned to a community. Offline, a mock that writes with the
    /// curated corpus's vocabulary.
    fn aligned_provider(&self, orig: &Corpus) -> Result<Arc<Provider>> {
        let community = orig.community.as_str();
        let role = format!("aligned:{community}");
        let provider = if self.config.offline {
            let texts: Vec<&str> = orig.texts().collect();
            let digest = Cache::key(&texts);
            let name = format!("aligned-{}-{}", slug(community), &digest[..12]);
            let mock = MockBackend::new(name, self.config.seed).with_corpus(texts);
            Provider::new(Arc::new(mock), &ProviderConfig::default())
        } else {
            let cfg = self.config.providers.aligned_for(community).ok_or_else(|| {
                TwinError::Config(format!(
                    "no aligned endpoint for community `{community}` (providers.aligned)"
                ))
            })?;
            Provider::new(Arc::new(HttpBackend::new(cfg.clone())), cfg)
        };
        Ok(self.register(&role, provider))
    }

    pub fn run(&self, stage: Stage) -> Result<StageRecord> {
        match stage {
            Stage::Ingest => self.execute(stage, |p| p.ingest()),
            Stage::Communities => self.execute(stage, |p| p.communities()),
            Stage::Curate => self.execute(stage, |p| p.curate()),
            Stage::Demos => self.execute(stage, |p| p.demos()),
            Stage::Generate => self.execute(stage, |p| p.generate()),
            Stage::Evaluate => self.execute(stage, |p| p.evaluate()),
            Stage::Screen => self.screen(None),
            Stage::Report => self.execute(stage, |p| p.report()),
        }
    }

    /// Every stage in order; records of each.
    pub fn run_all(&self) -> Result<Vec<(Stage, StageRecord)>> {
        Stage::ALL.iter().map(|&s| self.run(s).map(|r| (s, r))).collect()
    }

    /// Administers the questionnaire to every community's aligned model,
    /// comparing against published criteria when given.
    pub fn screen(&self, reference: Option<&Path>) -> Result<StageRecord> {
        self.execute(Stage::Screen, |p| p.screen_models(reference))
    }

    /// Scores recorded majority votes instead of querying models.
    pub fn screen_from_votes(&self, votes: &Path, reference: Option<&Path>) -> Result<StageRecord> {
        self.execute(Stage::Screen, |p| {
            let q = p.questionnaire()?;
            let rows: Vec<VoteRow> = read_csv(votes)?;
            let results = results_from_votes(&q, &rows)?;
            p.write_screening(results, reference)?;
            let mut inputs = vec![votes.to_path_buf()];
            inputs.extend(reference.map(Path::to_path_buf));
            Ok(inputs)
        })
    }

    fn execute(&self, stage: Stage, body: impl FnOnce(&Self) -> Result<Vec<PathBuf>>) -> Result<StageRecord> {
        let started = now_unix();
        self.registry.lock().expect("registry lock").clear();
        let dir = self.stage_dir(stage);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| TwinError::io(&dir, e))?;
        }
        create_dir(&dir)?;
        log::info!("stage {stage}: starting");
        let inputs = body(self)?;
        let providers = self
            .registry
            .lock()
            .expect("registry lock")
            .iter()
            .map(|(role, p)| ProviderRecord {
                role: role.clone(),
                identity: p.identity(),
                calls: p.calls(),
            })
            .collect();
        let record = StageRecord {
            config_digest: self.config.digest(),
            seed: self.config.seed,
            inputs: digests(&self.out, &inputs)?,
            outputs: digests(&self.out, &files_under(&dir)?)?,
            providers,
            started_unix: started,
            finished_unix: now_unix(),
        };
        let mut manifest = RunManifest::load_or_default(&self.out)?;
        manifest.stages.insert(stage.as_str().to_string(), record.clone());
        manifest.save(&self.out)?;
        log::info!(
            "stage {stage}: {} outputs, {} provider calls",
            record.outputs.len(),
            record.provider_calls()
        );
        Ok(record)
    }

    fn ingest(&self) -> Result<Vec<PathBuf>> {
        let src = &self.config.paths.documents;
        if !src.is_file() {
            return Err(TwinError::Config(format!(
                "documents file {} does not exist",
                src.display()
            )));
        }
        let raw: Vec<Document> = read_jsonl(src)?;
        let records = raw.len();
        let originals = filter_originals(raw);
        let reposts_and_replies = records - originals.len();
        let options = self.config.corpus.clean_options();
        let mut ids = BTreeSet::new();
        let mut kept = Vec::with_capacity(originals.len());
        let mut empty = 0;
        for mut d in originals {
            if !ids.insert(d.id.clone()) {
                return Err(twin_core::Error::DuplicateId(d.id).into());
            }
            d.text = clean_text_with(&d.text, &options);
            if d.text.is_empty() {
                empty += 1;
            } else {
                kept.push(d);
            }
        }
        let dir = self.stage_dir(Stage::Ingest);
        write_jsonl(&dir.join("documents.jsonl"), &kept)?;
        write_json(
            &dir.join("stats.json"),
            &IngestStats {
                records,
                reposts_and_replies,
                empty_after_cleaning: empty,
                kept: kept.len(),
            },
        )?;
        Ok(vec![src.clone()])
    }

    fn communities(&self) -> Result<Vec<PathBuf>> {
        let docs_path = self.stage_dir(Stage::Ingest).join("documents.jsonl");
        require(&docs_path, "ingest")?;
        let docs: Vec<Document> = read_jsonl(&docs_path)?;
        let dir = self.stage_dir(Stage::Communities);
        let mut inputs = vec![docs_path];

        // (name, clusters, documents) in configured order
        let mut groups: Vec<(String, Vec<usize>, Vec<Document>)> = Vec::new();
        if let Some(ipath) = &self.config.paths.interactions {
            inputs.push(ipath.clone());
            let interactions: Vec<Interaction> = read_jsonl(ipath)?;
            let graph = InteractionGraph::build(interactions.iter().map(|i| (i.source.as_str(), i.target.as_str())));
            if graph.edge_count() == 0 {
                return Err(twin_core::Error::EmptyGraph.into());
            }
            let g = &self.config.graph;
            let outcome = louvain_with(
                &graph,
                &LouvainConfig {
                    seed: self.seed(&["louvain"]),
                    resolution: g.resolution,
                    weighted: g.weighted,
                    ..LouvainConfig::default()
                },
            );
            let partition = &outcome.partition;
            let records: Vec<PartitionRecord> = partition
                .assignment()
                .iter()
                .map(|(user, &cluster)| PartitionRecord {
                    user: user.clone(),
                    cluster,
                })
                .collect();
            write_jsonl(&dir.join("partition.jsonl"), &records)?;
            let top: Vec<Vec<String>> = top_clusters(partition, g.top_k)
                .into_iter()
                .enumerate()
                .map(|(rank, (c, n))| vec![(rank + 1).to_string(), c.to_string(), n.to_string()])
                .collect();
            write_csv(&dir.join("clusters.csv"), &["rank", "cluster", "users"], &top)?;

            if self.config.communities.is_empty() {
                return Err(TwinError::Config(
                    "with an interaction graph, [[communities]] must map clusters to community names".into(),
                ));
            }
            let known: BTreeSet<usize> = partition.assignment().values().copied().collect();
            let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
            for (idx, m) in self.config.communities.iter().enumerate() {
                let mut clusters: BTreeSet<usize> = BTreeSet::new();
                for &c in &m.clusters {
                    if !known.contains(&c) {
                        return Err(TwinError::Config(format!(
                            "community `{}`: cluster {c} does not exist",
                            m.name
                        )));
                    }
                    clusters.insert(c);
                }
                for a in &m.anchors {
                    let c = partition.cluster_of(a).ok_or_else(|| {
                        TwinError::Config(format!("community `{}`: anchor user `{a}` is not in the graph", m.name))
                    })?;
                    clusters.insert(c);
                }
                for &c in &clusters {
                    if let Some(prev) = owner.insert(c, idx) {
                        if prev != idx {
                            return Err(TwinError::Config(format!(
                                "cluster {c} is mapped to both `{}` and `{}`",
                                self.config.communities[prev].name, m.name
                            )));
                        }
                    }
                }
                groups.push((m.name.clone(), clusters.into_iter().collect(), Vec::new()));
            }
            let mut unassigned = 0;
            for mut d in docs {
                let slot = d
                    .author
                    .as_deref()
                    .and_then(|a| partition.cluster_of(a))
                    .and_then(|c| owner.get(&c).copied());
                match slot {
                    Some(i) => {
                        d.community = groups[i].0.clone();
                        groups[i].2.push(d);
                    }
                    None => unassigned += 1,
                }
            }
            write_json(
                &dir.join("graph.json"),
                &GraphSummary {
                    nodes: graph.node_count(),
                    edges: graph.edge_count(),
                    clusters: partition.cluster_count(),
                    modularity: outcome.modularity(),
                    phase_modularity: outcome.phase_modularity.clone(),
                    unassigned_documents: unassigned,
                },
            )?;
        } else {
            let names: Vec<String> = if self.config.communities.is_empty() {
                docs.iter()
                    .filter(|d| !d.community.is_empty())
                    .map(|d| d.community.clone())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            } else {
                self.config.communities.iter().map(|m| m.name.clone()).collect()
            };
            let position: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
            let mut buckets: Vec<Vec<Document>> = vec![Vec::new(); names.len()];
            for d in docs {
                if let Some(&i) = position.get(d.community.as_str()) {
                    buckets[i].push(d);
                }
            }
            groups = names
                .into_iter()
                .zip(buckets)
                .map(|(n, b)| (n, Vec::new(), b))
                .collect();
        }

        if groups.len() < 2 {
            return Err(twin_core::Error::TooFewCommunities(groups.len()).into());
        }
        let mut slugs = BTreeSet::new();
        let mut index = Vec::new();
        for (name, clusters, documents) in groups {
            let s = slug(&name);
            if !slugs.insert(s.clone()) {
                return Err(TwinError::Config(format!("community names collide on file name `{s}`")));
            }
            if documents.is_empty() {
                return Err(TwinError::Config(format!("community `{name}` has no documents")));
            }
            let corpus = Corpus::from_documents(name.clone(), documents)?;
            write_jsonl(&dir.join(format!("{s}.jsonl")), corpus.documents())?;
            index.push(CommunityEntry {
                name,
                slug: s,
                documents: corpus.len(),
                clusters,
            });
        }
        write_json(&dir.join("index.json"), &index)?;
        Ok(inputs)
    }

    fn index(&self) -> Result<Vec<CommunityEntry>> {
        let path = self.stage_dir(Stage::Communities).join("index.json");
        require(&path, "communities")?;
        read_json(&path)
    }

    fn load_corpus(&self, stage: Stage, file: &str, community: &str) -> Result<(Corpus, PathBuf)> {
        let path = self.stage_dir(stage).join(file);
        require(&path, stage.as_str())?;
        let docs: Vec<Document> = read_jsonl(&path)?;
        Ok((Corpus::from_documents(community, docs)?, path))
    }

    fn curated(&self, entry: &CommunityEntry) -> Result<(Corpus, PathBuf)> {
        self.load_corpus(Stage::Curate, &format!("{}.jsonl", entry.slug), &entry.name)
    }

    fn synthetic(&self, entry: &CommunityEntry, source: &str) -> Result<(Corpus, PathBuf)> {
        self.load_corpus(Stage::Generate, &format!("{}/{source}.jsonl", entry.slug), &entry.name)
    }

    fn names(index: &[CommunityEntry]) -> Vec<String> {
        index.iter().map(|e| e.name.clone()).collect()
    }

    fn curate(&self) -> Result<Vec<PathBuf>> {
        let index = self.index()?;
        self.config
            .require_providers("curate", &["perplexity"], &Self::names(&index))?;
        let ppl = self.provider("perplexity", self.config.providers.perplexity.as_ref())?;
        let dir = self.stage_dir(Stage::Curate);
        let topics = self.config.topics();
        let mut mentions = Vec::new();
        let mut inputs = Vec::new();
        for entry in &index {
            let (mut corpus, path) =
                self.load_corpus(Stage::Communities, &format!("{}.jsonl", entry.slug), &entry.name)?;
            inputs.push(path);
            let texts: Vec<String> = corpus.texts().map(str::to_string).collect();
            let scores = ppl
                .perplexity(&texts)
                .map_err(provider_context(format!("curating `{}`", entry.name)))?;
            for (d, s) in corpus.documents_mut().iter_mut().zip(scores) {
                d.perplexity = Some(s);
            }
            let curated = select_lowest_perplexity(corpus, self.config.corpus.cap)?;
            write_jsonl(&dir.join(format!("{}.jsonl", entry.slug)), curated.documents())?;
            for (topic, n) in count_topic_mentions(&curated, &topics) {
                mentions.push(vec![entry.name.clone(), topic, n.to_string()]);
            }
        }
        write_csv(
            &dir.join("topic_mentions.csv"),
            &["community", "topic", "mentions"],
            &mentions,
        )?;
        Ok(inputs)
    }

    fn demos(&self) -> Result<Vec<PathBuf>> {
        let index = self.index()?;
        let dir = self.stage_dir(Stage::Demos);
        let mut inputs = Vec::new();
        let general: Vec<Demonstration> = match &self.config.paths.general_demonstrations {
            Some(p) => {
                inputs.push(p.clone());
                read_jsonl(p)?
            }
            None => Vec::new(),
        };
        let mut corpora = Vec::new();
        for entry in &index {
            let (corpus, path) = self.curated(entry)?;
            inputs.push(path);
            let mut demos = build_demonstrations(&corpus, self.seed(&["demos", &entry.name]));
            demos.extend(general.iter().cloned());
            write_jsonl(&dir.join(format!("{}.jsonl", entry.slug)), &demos)?;
            corpora.push(corpus);
        }
        let names = Self::names(&index);
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        write_jsonl(
            &dir.join("origin_classification.jsonl"),
            &origin_demonstrations(&corpora, &names),
        )?;
        Ok(inputs)
    }

    fn generate(&self) -> Result<Vec<PathBuf>> {
        let index = self.index()?;
        let names = Self::names(&index);
        self.config
            .require_providers("generate", &["aligned", "base", "perplexity"], &names)?;
        let base = self.provider("base", self.config.providers.base.as_ref())?;
        let ppl = self.provider("perplexity", self.config.providers.perplexity.as_ref())?;
        let s = &self.config.synth;
        let dir = self.stage_dir(Stage::Generate);
        let topics = self.config.topics();
        let topics_json = serde_json::to_string(&topics).expect("topics serialize");
        let generation = GenerationPlan {
            per_topic: s.per_topic,
            temperature: s.temperature,
            max_tokens: s.max_tokens,
            seed: self.seed(&["generate"]),
        };
        let context_plan = ContextPlan {
            generation: generation.clone(),
            exemplars: s.exemplars,
            exemplar_tokens: s.exemplar_tokens,
        };
        let mut stats = BTreeMap::new();
        let mut profiles = BTreeMap::new();
        let mut inputs = Vec::new();
        for entry in &index {
            let (orig, path) = self.curated(entry)?;
            let orig_digest = crate::io::file_digest(&path)?;
            inputs.push(path);
            let aligned = self.aligned_provider(&orig)?;
            let cdir = dir.join(&entry.slug);
            create_dir(&cdir)?;
            let checkpoints = self.out.join("checkpoints").join(&entry.slug);

            let plan_json = serde_json::to_string(&generation).expect("plan serializes");
            let ft_cp = Checkpoints::open(
                checkpoints.join("finetuned"),
                &fingerprint(&[&aligned.identity(), &plan_json, &topics_json, &orig_digest]),
            )?;
            let ft_raw = generate_finetuned_corpus(&aligned, &entry.name, &topics, &generation, Some(&ft_cp))?;

            let ctx_json = serde_json::to_string(&context_plan).expect("plan serializes");
            let ctx_cp = Checkpoints::open(
                checkpoints.join("context"),
                &fingerprint(&[&base.identity(), &ctx_json, &topics_json, &orig_digest]),
            )?;
            let ctx_raw = generate_context_corpus(&base, &orig, &topics, &context_plan, Some(&ctx_cp))?;

            let mut filtered = Vec::new();
            for (source, mut corpus) in [("finetuned", ft_raw), ("context", ctx_raw)] {
                write_jsonl(&cdir.join(format!("{source}_raw.jsonl")), corpus.documents())?;
                let texts: Vec<String> = corpus.texts().map(str::to_string).collect();
                let scores = ppl
                    .perplexity(&texts)
                    .map_err(provider_context(format!("scoring {source} corpus of `{}`", entry.name)))?;
                for (d, p) in corpus.documents_mut().iter_mut().zip(scores) {
                    d.perplexity = Some(p);
                }
                let outcome = filter_synthetic(
                    corpus,
                    &orig,
                    &FilterConfig {
                        max_perplexity: s.max_perplexity,
                        max_similarity: s.max_similarity,
                        balance: s.balance,
                        seed: self.seed(&["filter", &entry.name, source]),
                    },
                )?;
                if outcome.stats.shortfall(s.balance) {
                    log::warn!(
                        "{}: only {} {source} documents survived filtering, fewer than the balance of {}",
                        entry.name,
                        outcome.stats.after_similarity,
                        s.balance
                    );
                }
                write_jsonl(&cdir.join(format!("{source}.jsonl")), outcome.corpus.documents())?;
                filtered.push(outcome.stats);
            }
            stats.insert(
                entry.name.clone(),
                SourceFilterStats {
                    finetuned: filtered[0],
                    context: filtered[1],
                },
            );
            let summary = profile_community(
                &base,
                &orig,
                self.config.eval.profile_sample,
                self.seed(&["profile", &entry.name]),
                s.max_tokens,
            )
            .map_err(|e| match e {
                TwinError::Provider(source) => TwinError::ProviderContext {
                    context: format!("profiling `{}`", entry.name),
                    source,
                },
                other => other,
            })?;
            profiles.insert(entry.name.clone(), summary);
        }
        write_json(&dir.join("filter_stats.json"), &stats)?;
        write_json(&dir.join("profiles.json"), &profiles)?;
        Ok(inputs)
    }

    fn evaluate(&self) -> Result<Vec<PathBuf>> {
        let index = self.index()?;
        let names = Self::names(&index);
        let mut roles = vec!["embed", "emotions", "toxicity"];
        if self.config.eval.origin_backend == OriginBackend::Provider {
            roles.push("classifier");
        }
        self.config.require_providers("evaluate", &roles, &names)?;
        let p = &self.config.providers;
        let embed = self.provider("embed", p.embed.as_ref())?;
        let emotions = self.provider("emotions", p.emotions.as_ref())?;
        let toxicity = self.provider("toxicity", p.toxicity.as_ref())?;
        let scorers = Scorers {
            embed: &embed,
            emotions: &emotions,
            toxicity: &toxicity,
        };
        let e = &self.config.eval;
        let dir = self.stage_dir(Stage::Evaluate);

        let mut inputs = Vec::new();
        let mut originals = Vec::new();
        let mut contexts = Vec::new();
        let mut finetuned = Vec::new();
        for entry in &index {
            let (o, po) = self.curated(entry)?;
            let (c, pc) = self.synthetic(entry, "context")?;
            let (f, pf) = self.synthetic(entry, "finetuned")?;
            inputs.extend([po, pc, pf]);
            originals.push(o);
            contexts.push(c);
            finetuned.push(f);
        }

        let mut communities = Vec::new();
        for ((o, c), f) in originals.iter().zip(&contexts).zip(&finetuned) {
            let aligned =
                align_community(&scorers, o, c, f, e.toxicity_threshold, e.toxicity_bins).map_err(|err| match err {
                    TwinError::Provider(source) => TwinError::ProviderContext {
                        context: format!("evaluating `{}`", o.community),
                        source,
                    },
                    other => other,
                })?;
            communities.push(aligned);
        }

        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let origin_seed = self.seed(&["origin"]);
        let trained;
        let classifier_provider;
        let (classifier, backend, holdout_accuracy, train_size, holdout_size) = match e.origin_backend {
            OriginBackend::Builtin => {
                trained = train_origin_classifier(&originals, e.origin_per_community, e.origin_holdout, origin_seed)?;
                (
                    OriginClassifier::Builtin(&trained),
                    "builtin".to_string(),
                    trained.holdout_accuracy,
                    trained.train_size,
                    trained.holdout_size,
                )
            }
            OriginBackend::Provider => {
                classifier_provider = self.provider("classifier", p.classifier.as_ref())?;
                let classifier = OriginClassifier::Model {
                    provider: &classifier_provider,
                    seed: origin_seed,
                };
                let split = split_for_origin(&originals, e.origin_per_community, e.origin_holdout, origin_seed)?;
                let held: Vec<(&str, &str)> = split
                    .iter()
                    .flat_map(|(label, _, held)| held.iter().map(move |d| (*label, d.text.as_str())))
                    .collect();
                let texts: Vec<&str> = held.iter().map(|(_, t)| *t).collect();
                let predicted = classifier.classify(&texts, &name_refs)?;
                let correct = held
                    .iter()
                    .zip(&predicted)
                    .filter(|((l, _), p)| *l == p.as_str())
                    .count();
                let train_size = split.iter().map(|(_, t, _)| t.len()).sum();
                (
                    classifier,
                    classifier_provider.identity(),
                    correct as f64 / held.len() as f64,
                    train_size,
                    held.len(),
                )
            }
        };
        let mut f1 = BTreeMap::new();
        for (source, corpora) in [("context", &contexts), ("finetuned", &finetuned)] {
            let refs: Vec<&Corpus> = corpora.iter().collect();
            f1.insert(source.to_string(), origin_f1(&classifier, &refs, &name_refs)?);
        }
        let report = AlignmentReport {
            communities,
            origin: OriginSummary {
                backend,
                holdout_accuracy,
                train_size,
                holdout_size,
                f1,
            },
        };
        write_json(&dir.join("alignment_report.json"), &report)?;

        let mut similarity = Vec::new();
        let mut perplexity = Vec::new();
        let mut triplets: Sheet<TripletRow, TripletKey> = Sheet::default();
        let mut harm: Sheet<HarmRow, HarmKey> = Sheet::default();
        for ((o, c), f) in originals.iter().zip(&contexts).zip(&finetuned) {
            let name = &o.community;
            let mut push = |source: &str, kind: &str, values: Vec<f64>| {
                for v in values {
                    similarity.push(vec![name.clone(), source.to_string(), kind.to_string(), fmt_f(v)]);
                }
            };
            push("original", "internal", internal_similarity(o));
            for (source, corpus) in [("context", c), ("finetuned", f)] {
                push(source, "internal", internal_similarity(corpus));
                push(source, "external", external_similarity(corpus, o));
            }
            for (source, corpus) in [("original", o), ("context", c), ("finetuned", f)] {
                for d in corpus.documents() {
                    if let Some(p) = d.perplexity {
                        perplexity.push(vec![name.clone(), source.to_string(), fmt_f(p)]);
                    }
                }
            }
            triplets.append(sample_triplets(
                c,
                f,
                e.triplets_per_community,
                self.seed(&["triplets", name]),
            ));
            harm.append(sample_harm_batch(
                o,
                c,
                f,
                e.harm_per_source,
                self.seed(&["harm", name]),
            ));
        }
        if triplets.shortfall || harm.shortfall {
            log::warn!("some annotation sheets have fewer items than requested");
        }
        write_csv(
            &dir.join("similarity.csv"),
            &["community", "source", "kind", "rouge_l"],
            &similarity,
        )?;
        write_csv(
            &dir.join("perplexity.csv"),
            &["community", "source", "perplexity"],
            &perplexity,
        )?;
        write_csv(
            &dir.join("triplets.csv"),
            &["item_id", "community", "topic", "tweet_a", "tweet_b"],
            &triplets
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.item_id.clone(),
                        r.community.clone(),
                        r.topic.clone(),
                        r.tweet_a.clone(),
                        r.tweet_b.clone(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
        write_csv(
            &dir.join("triplets_key.csv"),
            &["item_id", "source_a", "source_b", "doc_a", "doc_b"],
            &triplets
                .keys
                .iter()
                .map(|k| {
                    vec![
                        k.item_id.clone(),
                        k.source_a.as_str().to_string(),
                        k.source_b.as_str().to_string(),
                        k.doc_a.clone(),
                        k.doc_b.clone(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
        write_csv(
            &dir.join("harm.csv"),
            &["item_id", "community", "text"],
            &harm
                .rows
                .iter()
                .map(|r| vec![r.item_id.clone(), r.community.clone(), r.text.clone()])
                .collect::<Vec<_>>(),
        )?;
        write_csv(
            &dir.join("harm_key.csv"),
            &["item_id", "source", "doc_id"],
            &harm
                .keys
                .iter()
                .map(|k| vec![k.item_id.clone(), k.source.as_str().to_string(), k.doc_id.clone()])
                .collect::<Vec<_>>(),
        )?;
        Ok(inputs)
    }

    fn questionnaire(&self) -> Result<Questionnaire> {
        match &self.config.screen.questionnaire {
            Some(p) => load_questionnaire(p),
            None => Ok(swed()),
        }
    }

    fn screen_models(&self, reference: Option<&Path>) -> Result<Vec<PathBuf>> {
        let index = self.index()?;
        self.config
            .require_providers("screen", &["aligned"], &Self::names(&index))?;
        let q = self.questionnaire()?;
        let sc = &self.config.screen;
        let dir = self.stage_dir(Stage::Screen);
        let mut results = Vec::new();
        let mut inputs = Vec::new();
        for entry in &index {
            let (orig, path) = self.curated(entry)?;
            inputs.push(path);
            let provider = self.aligned_provider(&orig)?;
            let plan = AdministerPlan {
                samples: sc.samples,
                temperature: sc.temperature,
                max_tokens: sc.max_tokens,
                retry_budget: sc.retry_budget,
                seed: self.seed(&["screen"]),
            };
            let responses = administer(&provider, &entry.name, &q, &plan).map_err(|e| match e {
                TwinError::Provider(source) => TwinError::ProviderContext {
                    context: format!("screening `{}`", entry.name),
                    source,
                },
                other => other,
            })?;
            write_json(&dir.join(format!("{}_responses.json", entry.slug)), &responses)?;
            results.push(score(&q, &responses)?);
        }
        rank_results(&mut results);
        self.write_screening(results, reference)?;
        inputs.extend(reference.map(Path::to_path_buf));
        Ok(inputs)
    }

    fn write_screening(&self, results: Vec<ScreeningResult>, reference: Option<&Path>) -> Result<()> {
        let dir = self.stage_dir(Stage::Screen);
        let refs: BTreeMap<String, Criteria> = match reference {
            Some(p) => read_csv::<ReferenceRow>(p)?
                .into_iter()
                .map(|r| r.criteria().map(|c| (r.community, c)))
                .collect::<Result<_>>()?,
            None => BTreeMap::new(),
        };
        let entries: Vec<ScreeningEntry> = results
            .into_iter()
            .map(|result| {
                let reference = refs.get(&result.community).copied();
                let discrepancies = reference
                    .map(|r| {
                        discrepancies(&result.criteria, &r)
                            .into_iter()
                            .map(String::from)
                            .collect()
                    })
                    .unwrap_or_default();
                ScreeningEntry {
                    result,
                    reference,
                    discrepancies,
                }
            })
            .collect();
        let votes: Vec<Vec<String>> = entries
            .iter()
            .flat_map(|e| {
                e.result
                    .votes
                    .iter()
                    .map(|(item, vote)| vec![e.result.community.clone(), item.clone(), vote.to_string()])
            })
            .collect();
        write_csv(&dir.join("votes.csv"), &["community", "item", "vote"], &votes)?;
        write_json(&dir.join("results.json"), &entries)
    }

    fn report(&self) -> Result<Vec<PathBuf>> {
        let eval_dir = self.stage_dir(Stage::Evaluate);
        let screen_dir = self.stage_dir(Stage::Screen);
        let dir = self.stage_dir(Stage::Report);
        let alignment_path = eval_dir.join("alignment_report.json");
        let screening_path = screen_dir.join("results.json");
        require(&alignment_path, "evaluate")?;
        require(&screening_path, "screen")?;
        let mut inputs = vec![alignment_path.clone(), screening_path.clone()];
        let report: AlignmentReport = read_json(&alignment_path)?;
        let screening: Vec<ScreeningEntry> = read_json(&screening_path)?;
        let bins = self.config.eval.histogram_bins;

        write_json(&dir.join("alignment_report.json"), &report)?;
        let fid: Vec<Vec<String>> = report
            .communities
            .iter()
            .map(|c| vec![c.community.clone(), fmt_f(c.fid_context), fmt_f(c.fid_finetuned)])
            .collect();
        write_csv(
            &dir.join("fid.csv"),
            &["community", "fid_context", "fid_finetuned"],
            &fid,
        )?;
        let emo: Vec<Vec<String>> = report
            .communities
            .iter()
            .map(|c| {
                vec![
                    c.community.clone(),
                    fmt_f(c.emotion_alignment_context),
                    fmt_f(c.emotion_alignment_finetuned),
                ]
            })
            .collect();
        write_csv(
            &dir.join("emotion_alignment.csv"),
            &["community", "context", "finetuned"],
            &emo,
        )?;

        let mut profiles = Vec::new();
        let mut toxicity = Vec::new();
        for c in &report.communities {
            for (source, m) in &c.sources {
                for (label, v) in EMOTION_LABELS.iter().zip(m.emotion_profile.values()) {
                    profiles.push(vec![c.community.clone(), source.clone(), label.to_string(), fmt_f(*v)]);
                }
                let h = &m.toxicity;
                for (i, (count, mass)) in h.counts.iter().zip(&h.masses).enumerate() {
                    toxicity.push(vec![
                        c.community.clone(),
                        source.clone(),
                        fmt_f(h.edges[i]),
                        fmt_f(h.edges[i + 1]),
                        count.to_string(),
                        fmt_f(*mass),
                        h.sample_count.to_string(),
                    ]);
                }
            }
        }
        write_csv(
            &dir.join("emotion_profiles.csv"),
            &["community", "source", "emotion", "mass"],
            &profiles,
        )?;
        write_csv(
            &dir.join("toxicity_histograms.csv"),
            &["community", "source", "bin_low", "bin_high", "count", "mass", "samples"],
            &toxicity,
        )?;

        let mut origin = Vec::new();
        for (source, f1) in &report.origin.f1 {
            origin.push(vec![source.clone(), "(macro)".into(), fmt_f(f1.macro_f1)]);
            origin.push(vec![source.clone(), "(micro)".into(), fmt_f(f1.micro_f1)]);
            for (class, v) in &f1.per_class {
                origin.push(vec![source.clone(), class.clone(), fmt_f(*v)]);
            }
        }
        write_csv(&dir.join("origin_f1.csv"), &["source", "class", "f1"], &origin)?;

        // distributions as histograms
        #[derive(Deserialize)]
        struct SimilarityRow {
            community: String,
            source: String,
            kind: String,
            rouge_l: f64,
        }
        #[derive(Deserialize)]
        struct PerplexityRow {
            community: String,
            source: String,
            perplexity: f64,
        }
        let sim_path = eval_dir.join("similarity.csv");
        let ppl_path = eval_dir.join("perplexity.csv");
        require(&sim_path, "evaluate")?;
        require(&ppl_path, "evaluate")?;
        inputs.extend([sim_path.clone(), ppl_path.clone()]);
        let mut grouped: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
        for r in read_csv::<SimilarityRow>(&sim_path)? {
            grouped
                .entry((r.community, r.source, r.kind))
                .or_default()
                .push(r.rouge_l);
        }
        let mut rows = Vec::new();
        for ((community, source, kind), values) in &grouped {
            for (i, n) in histogram(values, 0.0, 1.0, bins).into_iter().enumerate() {
                let w = 1.0 / bins as f64;
                rows.push(vec![
                    community.clone(),
                    source.clone(),
                    kind.clone(),
                    fmt_f(i as f64 * w),
                    fmt_f((i + 1) as f64 * w),
                    n.to_string(),
                ]);
            }
        }
        write_csv(
            &dir.join("similarity.csv"),
            &["community", "source", "kind", "bin_low", "bin_high", "count"],
            &rows,
        )?;
        let mut grouped: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for r in read_csv::<PerplexityRow>(&ppl_path)? {
            grouped.entry((r.community, r.source)).or_default().push(r.perplexity);
        }
        let hi = grouped.values().flatten().fold(0.0f64, |a, &b| a.max(b)).max(1.0);
        let w = hi / bins as f64;
        let mut rows = Vec::new();
        for ((community, source), values) in &grouped {
            for (i, n) in histogram(values, 0.0, hi, bins).into_iter().enumerate() {
                rows.push(vec![
                    community.clone(),
                    source.clone(),
                    fmt_f(i as f64 * w),
                    fmt_f((i + 1) as f64 * w),
                    n.to_string(),
                ]);
            }
        }
        write_csv(
            &dir.join("perplexity.csv"),
            &["community", "source", "bin_low", "bin_high", "count"],
            &rows,
        )?;

        let screening_rows: Vec<Vec<String>> = screening
            .iter()
            .map(|e| {
                let c = &e.result.criteria;
                let mut row = vec![
                    e.result.community.clone(),
                    format!("{:.1}", display_score(c.c1)),
                    flag(c.c2).into(),
                    flag(c.c3).into(),
                    flag(c.c4).into(),
                    c.positives().to_string(),
                ];
                match &e.reference {
                    Some(r) => row.extend([
                        format!("{:.1}", display_score(r.c1)),
                        flag(r.c2).into(),
                        flag(r.c3).into(),
                        flag(r.c4).into(),
                    ]),
                    None => row.extend(std::iter::repeat_n(String::new(), 4)),
                }
                row.push(e.discrepancies.join(" "));
                row
            })
            .collect();
        write_csv(
            &dir.join("screening.csv"),
            &[
                "community",
                "c1",
                "c2",
                "c3",
                "c4",
                "positives",
                "reference_c1",
                "reference_c2",
                "reference_c3",
                "reference_c4",
                "discrepancies",
            ],
            &screening_rows,
        )?;
        write_json(&dir.join("screening.json"), &screening)?;
        let items: BTreeSet<&String> = screening.iter().flat_map(|e| e.result.votes.keys()).collect();
        let mut header = vec!["community"];
        header.extend(items.iter().map(|s| s.as_str()));
        let votes: Vec<Vec<String>> = screening
            .iter()
            .map(|e| {
                let mut row = vec![e.result.community.clone()];
                row.extend(
                    items
                        .iter()
                        .map(|i| e.result.votes.get(*i).map(|v| v.to_string()).unwrap_or_default()),
                );
                row
            })
            .collect();
        write_csv(&dir.join("screening_votes.csv"), &header, &votes)?;

        for (stage, file) in [
            (Stage::Curate, "topic_mentions.csv"),
            (Stage::Communities, "clusters.csv"),
        ] {
            let src = self.stage_dir(stage).join(file);
            if src.is_file() {
                fs::copy(&src, dir.join(file)).map_err(|e| TwinError::io(&src, e))?;
                inputs.push(src);
            }
        }

        if let Some(ann) = &self.config.paths.annotations {
            inputs.push(ann.clone());
            self.report_annotations(ann, &dir)?;
        }
        Ok(inputs)
    }

    /// Agreement between the two annotators, and harm-category counts per
    /// source from the first annotator's labels on the harm sheet.
    fn report_annotations(&self, path: &Path, dir: &Path) -> Result<()> {
        #[derive(Deserialize)]
        struct KeyRow {
            item_id: String,
            source: String,
        }
        #[derive(Deserialize)]
        struct ItemRow {
            item_id: String,
            community: String,
        }
        let rows: Vec<AnnotationRow> = read_csv(path)?;
        let a: Vec<&str> = rows.iter().map(|r| r.label_a.as_str()).collect();
        let b: Vec<&str> = rows.iter().map(|r| r.label_b.as_str()).collect();
        let summary = match cohens_kappa(&a, &b) {
            Ok(k) => AgreementSummary {
                items: rows.len(),
                kappa: Some(k),
                error: None,
            },
            Err(e) => AgreementSummary {
                items: rows.len(),
                kappa: None,
                error: Some(e.to_string()),
            },
        };
        write_json(&dir.join("agreement.json"), &summary)?;

        let eval_dir = self.stage_dir(Stage::Evaluate);
        let key_path = eval_dir.join("harm_key.csv");
        let sheet_path = eval_dir.join("harm.csv");
        require(&key_path, "evaluate")?;
        let sources: BTreeMap<String, String> = read_csv::<KeyRow>(&key_path)?
            .into_iter()
            .map(|k| (k.item_id, k.source))
            .collect();
        let communities: BTreeMap<String, String> = read_csv::<ItemRow>(&sheet_path)?
            .into_iter()
            .map(|r| (r.item_id, r.community))
            .collect();
        let mut counts: BTreeMap<(String, String, String), usize> = BTreeMap::new();
        for r in &rows {
            if let (Some(source), Some(community)) = (sources.get(&r.item_id), communities.get(&r.item_id)) {
                *counts
                    .entry((community.clone(), source.clone(), r.label_a.clone()))
                    .or_insert(0) += 1;
            }
        }
        let table: Vec<Vec<String>> = counts
            .into_iter()
            .map(|((c, s, l), n)| vec![c, s, l, n.to_string()])
            .collect();
        write_csv(
            &dir.join("harm_categories.csv"),
            &["community", "source", "category", "count"],
            &table,
        )
    }
}
