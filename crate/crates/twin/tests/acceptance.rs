//! One PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twin::evaluation::{origin_f1, OriginClassifier};
use twin::io::read_csv;
use twin::providers::{GenParams, MockBackend, Provider, ProviderConfig};
use twin::screening::{results_from_votes, ReferenceRow, VoteRow};
use twin::{Config, Pipeline};
use twin_core::agreement::cohens_kappa;
use twin_core::alignment::{emotional_alignment, toxicity_histogram, EmotionProfile};
use twin_core::classify::{f1_report, train_origin_classifier};
use twin_core::frechet::frechet_distance;
use twin_core::graph::{louvain_with, modularity, LouvainConfig};
use twin_core::screen::{display_score, swed};
use twin_core::synth::{external_similarity, filter_synthetic, FilterConfig, FilterStats};
use twin_core::{Corpus, Document, InteractionGraph, Partition};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

// ---------------------------------------------------------------- WCS

fn wcs_reproduction() -> Outcome {
    let q = swed();
    let votes: Vec<VoteRow> = read_csv(&data("published_votes.csv")).map_err(|e| e.to_string())?;
    let reference: Vec<ReferenceRow> = read_csv(&data("published_criteria.csv")).map_err(|e| e.to_string())?;
    let results = results_from_votes(&q, &votes).map_err(|e| e.to_string())?;
    ensure(results.len() == 6, || format!("{} communities scored", results.len()))?;

    let (mut c2, mut c3, mut c4) = (0, 0, 0);
    let mut c3_mismatch = Vec::new();
    for r in &reference {
        let want = r.criteria().map_err(|e| e.to_string())?;
        let got = results
            .iter()
            .find(|x| x.community == r.community)
            .ok_or_else(|| format!("{} not scored", r.community))?;
        let c1 = display_score(got.criteria.c1);
        ensure(c1 == want.c1, || format!("{}: C1 {c1} != {}", r.community, want.c1))?;
        c2 += usize::from(got.criteria.c2 == want.c2);
        if got.criteria.c3 == want.c3 {
            c3 += 1;
        } else {
            c3_mismatch.push(r.community.clone());
        }
        c4 += usize::from(got.criteria.c4 == want.c4);
    }
    ensure(c2 == 6, || format!("C2 matches {c2}/6"))?;
    ensure(c3 == 5 && c3_mismatch == ["Anti-ED"], || {
        format!("C3 matches {c3}/6, mismatched {c3_mismatch:?}")
    })?;
    let ranked: Vec<f64> = results.iter().map(|r| display_score(r.criteria.c1)).collect();
    Ok(format!(
        "C1 {ranked:?}, C2 6/6, C3 5/6 (Anti-ED flagged), C4 {c4}/6 reported only"
    ))
}

// ---------------------------------------------------------------- Fréchet

fn dense_frechet(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let moments = |set: &[Vec<f64>]| {
        let d = set[0].len();
        let x = DMatrix::from_fn(set.len(), d, |i, j| set[i][j]);
        let mu = DVector::from_fn(d, |j, _| x.column(j).mean());
        let centered = DMatrix::from_fn(set.len(), d, |i, j| x[(i, j)] - mu[j]);
        let cov = centered.transpose() * &centered / (set.len() as f64 - 1.0);
        (mu, cov)
    };
    let (mu_a, cov_a) = moments(a);
    let (mu_b, cov_b) = moments(b);
    let eig = cov_a.clone().symmetric_eigen();
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let inner = &root * &cov_b * &root;
    let inner = (&inner + inner.transpose()) * 0.5;
    let tr_sqrt: f64 = inner.symmetric_eigenvalues().iter().map(|v| v.max(0.0).sqrt()).sum();
    ((mu_a - mu_b).norm_squared() + cov_a.trace() + cov_b.trace() - 2.0 * tr_sqrt).max(0.0)
}

fn correlated_set(rng: &mut ChaCha8Rng, n: usize, d: usize, shift: f64) -> Vec<Vec<f64>> {
    let mix: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (0..d)
                .map(|i| shift + (0..d).map(|j| mix[i][j] * z[j]).sum::<f64>())
                .collect()
        })
        .collect()
}

fn frechet() -> Outcome {
    let fd = |a: &[Vec<f64>], b: &[Vec<f64>]| frechet_distance(a, b).map_err(|e| e.to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = correlated_set(&mut rng, 200, 8, 0.0);
    let same = fd(&a, &a)?;
    ensure(same <= 1e-6, || format!("identical sets gave {same}"))?;

    let shift: Vec<f64> = (0..8).map(|i| 0.1 * i as f64 - 0.3).collect();
    let moved: Vec<Vec<f64>> = a
        .iter()
        .map(|x| x.iter().zip(&shift).map(|(p, s)| p + s).collect())
        .collect();
    let expected: f64 = shift.iter().map(|s| s * s).sum();
    let got = fd(&a, &moved)?;
    ensure((got - expected).abs() <= 1e-6, || {
        format!("mean shift gave {got}, expected {expected}")
    })?;

    let mut worst: f64 = 0.0;
    for trial in 0..5 {
        let x = correlated_set(&mut rng, 200, 8, 0.0);
        let y = correlated_set(&mut rng, 200, 8, 0.1 * trial as f64);
        let ours = fd(&x, &y)?;
        let oracle = dense_frechet(&x, &y);
        worst = worst.max((ours - oracle).abs());
    }
    ensure(worst <= 1e-6, || format!("oracle disagreement {worst:e}"))?;
    Ok(format!(
        "identity {same:.1e}, shift error {:.1e}, oracle max error {worst:.1e}",
        (got - expected).abs()
    ))
}

// ---------------------------------------------------------------- Louvain

fn dense_modularity(n: usize, edges: &[(usize, usize, f64)], labels: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in edges {
        a[u][v] += w;
        a[v][u] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for label in 0..=next {
            prefix.push(label);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

fn graph_of(n: usize, edges: &[(usize, usize, f64)]) -> InteractionGraph {
    let names: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
    let named: Vec<(&str, &str, f64)> = edges
        .iter()
        .map(|&(u, v, w)| (names[u].as_str(), names[v].as_str(), w))
        .collect();
    InteractionGraph::from_weighted_edges(&named)
}

type TestGraph = (usize, Vec<(usize, usize, f64)>);

fn graph_set() -> Vec<TestGraph> {
    let mut set = vec![
        (
            6,
            vec![
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
                (2, 3, 1.0),
            ],
        ),
        (3, vec![(0, 1, 1.0), (1, 2, 1.0)]),
        (5, vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)]),
        (8, (0..8).map(|i| (i, (i + 1) % 8, 1.0)).collect()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..30 {
        let n = 3 + i % 6;
        let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|v| (rng.gen_range(0..v), v, 1.0)).collect();
        for _ in 0..n {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v && !edges.iter().any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u)) {
                edges.push((u, v, rng.gen_range(1..=3) as f64));
            }
        }
        set.push((n, edges));
    }
    set
}

fn louvain() -> Outcome {
    let (mut exact, mut local) = (0, 0);
    for (n, edges) in graph_set() {
        let best = set_partitions(n)
            .iter()
            .map(|l| dense_modularity(n, &edges, l))
            .fold(f64::NEG_INFINITY, f64::max);
        let g = graph_of(n, &edges);
        let singletons = modularity(&g, &Partition::singletons(&g)).map_err(|e| e.to_string())?;
        for seed in 0..3 {
            let out = louvain_with(
                &g,
                &LouvainConfig {
                    seed,
                    ..LouvainConfig::default()
                },
            );
            let q = modularity(&g, &out.partition).map_err(|e| e.to_string())?;
            ensure(q <= best + 1e-9, || {
                format!("Q {q} above the exhaustive maximum {best}")
            })?;
            if (q - best).abs() <= 1e-9 {
                exact += 1;
            } else {
                let monotone = out.phase_modularity.windows(2).all(|w| w[1] >= w[0] - 1e-12);
                ensure(q >= singletons.max(0.0) - 1e-12 && monotone, || {
                    format!("n={n} seed={seed}: Q {q} is not a sound local optimum (best {best})")
                })?;
                local += 1;
            }
        }
    }
    let (n, edges) = graph_set().remove(0);
    let g = graph_of(n, &edges);
    let p = louvain_with(&g, &LouvainConfig::default()).partition;
    let q = modularity(&g, &p).map_err(|e| e.to_string())?;
    let split = p.cluster_count() == 2
        && p.cluster_of("u0") == p.cluster_of("u2")
        && p.cluster_of("u3") == p.cluster_of("u5")
        && p.cluster_of("u0") != p.cluster_of("u3");
    ensure(split && (q - 0.3571).abs() <= 1e-4, || {
        format!("two triangles: split {split}, Q {q}")
    })?;
    Ok(format!(
        "{exact} runs at the exhaustive optimum, {local} sound local optima, two triangles Q {q:.4}"
    ))
}

// ---------------------------------------------------------------- filter

fn mock_provider(backend: MockBackend) -> Provider {
    Provider::new(Arc::new(backend), &ProviderConfig::new("mock://", "mock"))
}

fn originals(community: &str, n: usize, seed: u64) -> Corpus {
    let vocab: Vec<String> = (0..120).map(|w| format!("{community}{w}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = (0..n)
        .map(|i| {
            let len = rng.gen_range(8..16);
            let words: Vec<&str> = (0..len)
                .map(|_| vocab[rng.gen_range(0..vocab.len())].as_str())
                .collect();
            Document::new(format!("{community}-o{i}"), community, words.join(" "))
        })
        .collect();
    Corpus::from_documents(community, docs).expect("unique ids")
}

fn filtered_mock_corpus(seed: u64) -> Result<(Corpus, Corpus, FilterStats), String> {
    let orig = originals("keto", 300, 1);
    let writer = mock_provider(MockBackend::new("aligned-keto", seed).with_corpus(orig.texts()));
    let scorer = mock_provider(MockBackend::new("perplexity", seed));
    let mut texts = Vec::new();
    for topic in 0..120 {
        let out = writer
            .generate(
                &format!("What would you tweet about topic {topic}?"),
                &GenParams::new(1.0, 48, 90, seed),
            )
            .map_err(|e| e.to_string())?;
        texts.extend(out);
    }
    // plant the cases the filter has to remove
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..200 {
        texts.push(texts[i * 7].clone());
    }
    for o in orig.texts().take(150) {
        let mut words: Vec<&str> = o.split_whitespace().collect();
        let last = words.len() - 1;
        words[last] = "tweaked";
        texts.push(words.join(" "));
    }
    let mut perplexity = scorer.perplexity(&texts).map_err(|e| e.to_string())?;
    for p in perplexity.iter_mut() {
        if rng.gen_bool(0.1) {
            *p = rng.gen_range(400.5..2000.0);
        }
    }
    let docs: Vec<Document> = texts
        .into_iter()
        .zip(perplexity)
        .enumerate()
        .map(|(i, (t, p))| {
            let mut d = Document::new(format!("s{i}"), "keto", t);
            d.perplexity = Some(p);
            d
        })
        .collect();
    let synth = Corpus::from_documents("keto", docs).map_err(|e| e.to_string())?;
    let config = FilterConfig {
        seed,
        ..FilterConfig::default()
    };
    let out = filter_synthetic(synth, &orig, &config).map_err(|e| e.to_string())?;
    Ok((out.corpus, orig, out.stats))
}

fn synthetic_filter() -> Outcome {
    let (kept, orig, stats) = filtered_mock_corpus(9)?;
    let mut seen = HashSet::new();
    ensure(kept.texts().all(|t| seen.insert(t)), || {
        "exact duplicate survived".into()
    })?;
    let worst_ppl = kept.documents().iter().filter_map(|d| d.perplexity).fold(0.0, f64::max);
    ensure(worst_ppl <= 400.0, || format!("perplexity {worst_ppl} survived"))?;
    let worst_sim = external_similarity(&kept, &orig).into_iter().fold(0.0, f64::max);
    ensure(worst_sim <= 0.7, || format!("ROUGE-L {worst_sim} survived"))?;
    ensure(kept.len() <= 6000, || format!("{} documents kept", kept.len()))?;
    let (again, _, _) = filtered_mock_corpus(9)?;
    ensure(again == kept, || "same seed produced a different corpus".into())?;
    let (other, _, _) = filtered_mock_corpus(10)?;
    ensure(other != kept, || "a different seed produced the same corpus".into())?;
    ensure(
        stats.after_dedup < stats.input && stats.after_perplexity < stats.after_dedup,
        || format!("{stats:?}"),
    )?;
    ensure(stats.after_similarity < stats.after_perplexity, || format!("{stats:?}"))?;
    Ok(format!(
        "{} in, {} after dedup, {} after perplexity, {} after ROUGE-L, {} kept; max perplexity {worst_ppl:.1}, \
         max ROUGE-L {worst_sim:.3}, reproducible",
        stats.input,
        stats.after_dedup,
        stats.after_perplexity,
        stats.after_similarity,
        kept.len()
    ))
}

// ---------------------------------------------------------------- origin

fn draw(name: &str, vocab: &[String], n: usize, rng: &mut ChaCha8Rng) -> Corpus {
    let docs = (0..n)
        .map(|i| {
            let len = rng.gen_range(6..14);
            let words: Vec<&str> = (0..len)
                .map(|_| vocab[rng.gen_range(0..vocab.len())].as_str())
                .collect();
            Document::new(format!("{name}-{i}"), name, words.join(" "))
        })
        .collect();
    Corpus::from_documents(name, docs).expect("unique ids")
}

fn holdout_f1(train: &[Corpus], test: &[Corpus]) -> Result<f64, String> {
    let clf = train_origin_classifier(train, 3000, 0.05, 7).map_err(|e| e.to_string())?;
    let known: Vec<&str> = train.iter().map(|c| c.community.as_str()).collect();
    let texts: Vec<&str> = test.iter().flat_map(|c| c.texts()).collect();
    let gold: Vec<&str> = test
        .iter()
        .flat_map(|c| c.texts().map(|_| c.community.as_str()))
        .collect();
    let predicted = clf.classify(texts);
    Ok(f1_report(&predicted, &gold, &known)
        .map_err(|e| e.to_string())?
        .macro_f1)
}

fn mock_corpus(provider: &Provider, community: &str, n: usize) -> Result<Corpus, String> {
    let texts = provider
        .generate(&format!("Write a post for {community}"), &GenParams::new(1.0, 32, n, 0))
        .map_err(|e| e.to_string())?;
    let docs = texts
        .into_iter()
        .enumerate()
        .map(|(i, t)| Document::new(format!("{community}-{i}"), community, t))
        .collect();
    Corpus::from_documents(community, docs).map_err(|e| e.to_string())
}

fn origin_harness() -> Outcome {
    let names = ["a", "b", "c", "d", "e", "f"];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let own = |k: usize| (0..40).map(|w| format!("w{k}_{w}")).collect::<Vec<_>>();
    let train: Vec<Corpus> = names
        .iter()
        .enumerate()
        .map(|(k, n)| draw(n, &own(k), 400, &mut rng))
        .collect();
    let test: Vec<Corpus> = names
        .iter()
        .enumerate()
        .map(|(k, n)| draw(n, &own(k), 100, &mut rng))
        .collect();
    let disjoint = holdout_f1(&train, &test)?;
    ensure(disjoint >= 0.95, || {
        format!("disjoint vocabularies: macro-F1 {disjoint}")
    })?;

    let shared: Vec<String> = (0..200).map(|w| format!("w{w}")).collect();
    let train_same: Vec<Corpus> = names.iter().map(|n| draw(n, &shared, 400, &mut rng)).collect();
    let test_same: Vec<Corpus> = names.iter().map(|n| draw(n, &shared, 200, &mut rng)).collect();
    let identical = holdout_f1(&train_same, &test_same)?;
    ensure(identical <= 0.27, || {
        format!("identical distributions: macro-F1 {identical}")
    })?;

    // generated corpora: the finetuned mock writes with each community's
    // vocabulary, the context mock with a generic one
    let clf = train_origin_classifier(&train, 3000, 0.05, 7).map_err(|e| e.to_string())?;
    let mut finetuned = Vec::new();
    let mut context = Vec::new();
    for c in &train {
        let ft = mock_provider(MockBackend::new(format!("aligned-{}", c.community), 3).with_corpus(c.texts()));
        let ctx = mock_provider(MockBackend::new("base", 3));
        finetuned.push(mock_corpus(&ft, &c.community, 100)?);
        context.push(mock_corpus(&ctx, &c.community, 100)?);
    }
    let score = |corpora: &[Corpus]| -> Result<f64, String> {
        let refs: Vec<&Corpus> = corpora.iter().collect();
        origin_f1(&OriginClassifier::Builtin(&clf), &refs, &names)
            .map(|r| r.macro_f1)
            .map_err(|e| e.to_string())
    };
    let (ft, ctx) = (score(&finetuned)?, score(&context)?);
    ensure(ft > ctx, || {
        format!("finetuned mock {ft} does not beat context mock {ctx}")
    })?;
    Ok(format!(
        "disjoint {disjoint:.3}, identical {identical:.3}, finetuned mock {ft:.3} > context mock {ctx:.3}; \
         published 0.74/0.53/0.40 need the original data and models"
    ))
}

// ---------------------------------------------------------------- emotion / toxicity

fn random_profile(rng: &mut ChaCha8Rng) -> EmotionProfile {
    let raw: Vec<f64> = (0..11).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut v = [0.0; 11];
    for (slot, r) in v.iter_mut().zip(&raw) {
        *slot = r / total;
    }
    let last: f64 = v[..10].iter().sum();
    v[10] = 1.0 - last;
    EmotionProfile::new(v).expect("normalized")
}

fn emotion_toxicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let p = random_profile(&mut rng);
    let self_alignment = emotional_alignment(&p, &p);
    ensure((self_alignment - 1.0).abs() <= 1e-12, || {
        format!("alignment(p,p) = {self_alignment}")
    })?;

    let mut first = [0.0; 11];
    first[0] = 1.0;
    let mut second = [0.0; 11];
    second[5] = 1.0;
    let one_hot = |v| EmotionProfile::new(v).map_err(|e| e.to_string());
    let disjoint = emotional_alignment(&one_hot(first)?, &one_hot(second)?);
    ensure(disjoint.abs() <= 1e-12, || format!("disjoint one-hots gave {disjoint}"))?;

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (a, b) = (random_profile(&mut rng), random_profile(&mut rng));
        worst = worst.max((emotional_alignment(&a, &b) - emotional_alignment(&b, &a)).abs());
    }
    ensure(worst <= 1e-12, || format!("asymmetry {worst:e}"))?;

    let h = toxicity_histogram(&[0.05, 0.049_999, 0.5, 1.0], 0.05, 19).map_err(|e| e.to_string())?;
    ensure(h.sample_count == 3 && h.counts[0] == 1, || {
        format!("threshold boundary: {h:?}")
    })?;
    Ok(format!(
        "self 1, disjoint {disjoint:.1e}, asymmetry {worst:.1e}, 0.05 counted"
    ))
}

// ---------------------------------------------------------------- agreement

fn agreement() -> Outcome {
    let same = cohens_kappa(&["x", "y", "z", "x"], &["x", "y", "z", "x"]).map_err(|e| e.to_string())?;
    ensure((same - 1.0).abs() <= 1e-12, || format!("identical labels gave {same}"))?;
    // observed 0.5, chance 0.5
    let chance = cohens_kappa(&[1, 1, 0, 0], &[1, 0, 1, 0]).map_err(|e| e.to_string())?;
    ensure(chance.abs() <= 1e-12, || format!("hand example gave {chance}"))?;
    ensure(cohens_kappa(&["x", "x", "x"], &["x", "x", "x"]).is_err(), || {
        "degenerate case accepted".into()
    })?;
    Ok(format!("identical {same}, hand example {chance}, degenerate rejected"))
}

// ---------------------------------------------------------------- end to end

const REPORT_FILES: &[&str] = &[
    "agreement.json",
    "alignment_report.json",
    "clusters.csv",
    "emotion_alignment.csv",
    "emotion_profiles.csv",
    "fid.csv",
    "harm_categories.csv",
    "origin_f1.csv",
    "perplexity.csv",
    "screening.csv",
    "screening.json",
    "screening_votes.csv",
    "similarity.csv",
    "topic_mentions.csv",
    "toxicity_histograms.csv",
];

fn run_toy(config: &Path) -> Result<BTreeMap<String, twin::manifest::StageRecord>, String> {
    let config = Config::load(config).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::new(config).map_err(|e| e.to_string())?;
    let records = pipeline.run_all().map_err(|e| e.to_string())?;
    Ok(records.into_iter().map(|(s, r)| (s.to_string(), r)).collect())
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = twin::toy::write_toy(dir.path(), 0).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let first = run_toy(&config)?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(120), || {
        format!("first run took {elapsed:?}")
    })?;
    ensure(first.len() == 8, || format!("{} stages ran", first.len()))?;
    let report = dir.path().join("out/report");
    let missing: Vec<&&str> = REPORT_FILES.iter().filter(|f| !report.join(f).is_file()).collect();
    ensure(missing.is_empty(), || format!("missing report files {missing:?}"))?;
    let first_calls: usize = first.values().map(|r| r.provider_calls()).sum();

    let second = run_toy(&config)?;
    let calls: usize = second.values().map(|r| r.provider_calls()).sum();
    ensure(calls == 0, || format!("rerun made {calls} provider calls"))?;
    for (stage, record) in &first {
        ensure(second[stage].outputs == record.outputs, || {
            format!("{stage} outputs changed on rerun")
        })?;
    }
    Ok(format!(
        "{} report files in {:.1}s, {first_calls} mock calls, rerun 0 calls with identical outputs",
        REPORT_FILES.len(),
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Check; 8] = [
        ("WCS reproduction", wcs_reproduction),
        ("Frechet distance", frechet),
        ("Louvain", louvain),
        ("Synthetic filter contract", synthetic_filter),
        ("Origin-classification harness", origin_harness),
        ("Emotion/toxicity metrics", emotion_toxicity),
        ("Agreement statistic", agreement),
        ("End-to-end offline smoke run", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {name}: {detail} [{:.2}s]", started.elapsed().as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{:.2}s]", started.elapsed().as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
