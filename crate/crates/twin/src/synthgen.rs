//! Synthetic corpus generation with per-topic checkpoints.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use twin_core::demos::{topic_instruction, INSTRUCTION_POOL};
use twin_core::topics::{context_prompt, profile_prompt, sample_texts, select_exemplars, Topic};
use twin_core::{Corpus, Document, Provenance};

use crate::derive_seed;
use crate::error::{Result, TwinError};
use crate::io::{read_jsonl, slug, write_jsonl};
use crate::providers::{GenParams, Provider, ProviderResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationPlan {
    pub per_topic: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    pub seed: u64,
}

/// Finished topics of an interrupted run, one file per topic. A changed
/// fingerprint (provider, plan, topics or inputs) discards them.
pub struct Checkpoints {
    dir: PathBuf,
}

impl Checkpoints {
    pub fn open(dir: impl Into<PathBuf>, fingerprint: &str) -> Result<Self> {
        let dir = dir.into();
        let stamp = dir.join("fingerprint");
        let current = fs::read_to_string(&stamp).ok();
        if current.as_deref() != Some(fingerprint) {
            if dir.exists() {
                fs::remove_dir_all(&dir).map_err(|e| TwinError::io(&dir, e))?;
            }
            fs::create_dir_all(&dir).map_err(|e| TwinError::io(&dir, e))?;
            fs::write(&stamp, fingerprint).map_err(|e| TwinError::io(&stamp, e))?;
        }
        Ok(Checkpoints { dir })
    }

    fn path(&self, index: usize, topic: &str) -> PathBuf {
        self.dir.join(format!("{:02}-{}.jsonl", index + 1, slug(topic)))
    }

    pub fn load(&self, index: usize, topic: &str) -> Result<Option<Vec<Document>>> {
        let path = self.path(index, topic);
        if path.is_file() {
            read_jsonl(&path).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn save(&self, index: usize, topic: &str, docs: &[Document]) -> Result<()> {
        // write then rename, so a crash never leaves a half topic behind
        let path = self.path(index, topic);
        let tmp = path.with_extension("partial");
        write_jsonl(&tmp, docs)?;
        fs::rename(&tmp, &path).map_err(|e| TwinError::io(&path, e))
    }

    pub fn completed(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|rd| {
                rd.filter_map(|e| e.ok())
                    .filter(|e| e.path().extension().is_some_and(|x| x == "jsonl"))
                    .count()
            })
            .unwrap_or(0)
    }
}

/// Requests for one topic and how to turn their completions into documents.
struct TopicJob {
    index: usize,
    topic: String,
    requests: Vec<(String, GenParams)>,
}

fn run_jobs(
    provider: &Provider,
    community: &str,
    provenance: Provenance,
    jobs: Vec<TopicJob>,
    done: BTreeMap<usize, Vec<Document>>,
    checkpoints: Option<&Checkpoints>,
) -> Result<Corpus> {
    let flat: Vec<(String, GenParams)> = jobs.iter().flat_map(|j| j.requests.iter().cloned()).collect();
    let mut results: std::vec::IntoIter<ProviderResult<Vec<String>>> = provider.generate_each(&flat).into_iter();
    let mut by_topic = done;
    let mut first_error = None;
    let tag = match provenance {
        Provenance::Finetuned => "ft",
        Provenance::Context => "ctx",
        Provenance::Original => "orig",
    };
    for job in jobs {
        let mut texts = Vec::new();
        let mut failed = None;
        for _ in &job.requests {
            match results.next().expect("one result per request") {
                Ok(out) => texts.extend(out),
                Err(e) => {
                    failed.get_or_insert(e);
                }
            }
        }
        if let Some(e) = failed {
            first_error.get_or_insert((job.index, job.topic.clone(), e));
            continue;
        }
        let docs: Vec<Document> = texts
            .into_iter()
            .map(|t| t.trim().to_string())
            .enumerate()
            .filter(|(_, t)| !t.is_empty())
            .map(|(k, t)| {
                Document::new(
                    format!("{}-{tag}-{:02}-{:04}", slug(community), job.index + 1, k + 1),
                    community,
                    t,
                )
                .with_topic(job.topic.clone())
                .with_provenance(provenance)
            })
            .collect();
        if let Some(cp) = checkpoints {
            cp.save(job.index, &job.topic, &docs)?;
        }
        by_topic.insert(job.index, docs);
    }
    if let Some((index, topic, source)) = first_error {
        return Err(TwinError::ProviderContext {
            context: format!(
                "{} generation for `{community}` stopped at topic {} ({topic}); finished topics are checkpointed",
                provenance.as_str(),
                index + 1
            ),
            source,
        });
    }
    Ok(Corpus::from_documents(
        community,
        by_topic.into_values().flatten().collect(),
    )?)
}

/// Topics still to generate, and documents of those already checkpointed.
type Pending<'t> = (Vec<(usize, &'t Topic)>, BTreeMap<usize, Vec<Document>>);

fn pending<'t>(topics: &'t [Topic], checkpoints: Option<&Checkpoints>) -> Result<Pending<'t>> {
    let mut todo = Vec::new();
    let mut done = BTreeMap::new();
    for (i, t) in topics.iter().enumerate() {
        match checkpoints.map(|c| c.load(i, &t.name)).transpose()?.flatten() {
            Some(docs) => {
                done.insert(i, docs);
            }
            None => todo.push((i, t)),
        }
    }
    Ok((todo, done))
}

/// `per_topic` completions per topic from an aligned model, each slot
/// prompted with a pool instruction specialized to the topic. Slots that
/// drew the same instruction share one request.
pub fn generate_finetuned_corpus(
    provider: &Provider,
    community: &str,
    topics: &[Topic],
    plan: &GenerationPlan,
    checkpoints: Option<&Checkpoints>,
) -> Result<Corpus> {
    let (todo, done) = pending(topics, checkpoints)?;
    let jobs = todo
        .into_iter()
        .map(|(index, topic)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, &["finetuned", community, &topic.name]));
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for _ in 0..plan.per_topic {
                *counts.entry(rng.gen_range(0..INSTRUCTION_POOL.len())).or_insert(0) += 1;
            }
            let requests = counts
                .into_iter()
                .map(|(template, n)| {
                    let seed = derive_seed(plan.seed, &["finetuned", community, &topic.name, &template.to_string()]);
                    (
                        topic_instruction(INSTRUCTION_POOL[template], &topic.name),
                        GenParams::new(plan.temperature, plan.max_tokens, n, seed),
                    )
                })
                .collect();
            TopicJob {
                index,
                topic: topic.name.clone(),
                requests,
            }
        })
        .collect();
    run_jobs(provider, community, Provenance::Finetuned, jobs, done, checkpoints)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextPlan {
    pub generation: GenerationPlan,
    pub exemplars: usize,
    pub exemplar_tokens: usize,
}

/// The in-context baseline: per topic, one prompt carrying exemplar posts
/// (keyword matches first, random fill after), asking for `per_topic`
/// completions.
pub fn generate_context_corpus(
    provider: &Provider,
    orig: &Corpus,
    topics: &[Topic],
    plan: &ContextPlan,
    checkpoints: Option<&Checkpoints>,
) -> Result<Corpus> {
    let community = orig.community.as_str();
    if orig.len() < plan.exemplars {
        log::warn!(
            "{community}: only {} posts available for {} in-context exemplars; using all",
            orig.len(),
            plan.exemplars
        );
    }
    let (todo, done) = pending(topics, checkpoints)?;
    let g = &plan.generation;
    let jobs = todo
        .into_iter()
        .map(|(index, topic)| {
            let exemplars = select_exemplars(
                orig,
                topic,
                plan.exemplars,
                plan.exemplar_tokens,
                derive_seed(g.seed, &["exemplars", community, &topic.name]),
            );
            let seed = derive_seed(g.seed, &["context", community, &topic.name]);
            TopicJob {
                index,
                topic: topic.name.clone(),
                requests: vec![(
                    context_prompt(&topic.name, &exemplars.texts),
                    GenParams::new(g.temperature, g.max_tokens, g.per_topic, seed),
                )],
            }
        })
        .collect();
    run_jobs(provider, community, Provenance::Context, jobs, done, checkpoints)
}

/// One-sentence summary of `sample` posts drawn from the corpus.
pub fn profile_community(
    provider: &Provider,
    corpus: &Corpus,
    sample: usize,
    seed: u64,
    max_tokens: u32,
) -> Result<String> {
    if corpus.is_empty() {
        return Err(twin_core::Error::EmptyInput("corpus to profile").into());
    }
    let posts = sample_texts(corpus, sample, seed);
    let out = provider.generate(&profile_prompt(&posts), &GenParams::new(0.0, max_tokens, 1, seed))?;
    Ok(out.into_iter().next().unwrap_or_default().trim().to_string())
}

pub fn fingerprint(parts: &[&str]) -> String {
    crate::providers::Cache::key(parts)
}
