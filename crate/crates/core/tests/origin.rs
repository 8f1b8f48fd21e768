use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twin_core::classify::{f1_report, train_origin_classifier};
use twin_core::{Corpus, Document};

fn draw_corpus(name: &str, vocab: &[String], n: usize, rng: &mut ChaCha8Rng) -> Corpus {
    let docs = (0..n)
        .map(|i| {
            let len = rng.gen_range(6..14);
            let text: Vec<&str> = (0..len)
                .map(|_| vocab[rng.gen_range(0..vocab.len())].as_str())
                .collect();
            Document::new(format!("{name}-{i}"), name, text.join(" "))
        })
        .collect();
    Corpus::from_documents(name, docs).unwrap()
}

fn holdout_macro_f1(corpora: &[Corpus], fresh: &[Corpus]) -> f64 {
    let clf = train_origin_classifier(corpora, 3000, 0.05, 7).unwrap();
    let known: Vec<&str> = corpora.iter().map(|c| c.community.as_str()).collect();
    let texts: Vec<&str> = fresh.iter().flat_map(|c| c.texts()).collect();
    let gold: Vec<&str> = fresh
        .iter()
        .flat_map(|c| c.texts().map(|_| c.community.as_str()))
        .collect();
    let predicted = clf.classify(texts);
    f1_report(&predicted, &gold, &known).unwrap().macro_f1
}

#[test]
fn separable_communities_score_high() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let names = ["a", "b", "c", "d", "e", "f"];
    let vocab = |k: usize| (0..40).map(|w| format!("w{k}_{w}")).collect::<Vec<_>>();
    let train: Vec<Corpus> = names
        .iter()
        .enumerate()
        .map(|(k, n)| draw_corpus(n, &vocab(k), 400, &mut rng))
        .collect();
    let test: Vec<Corpus> = names
        .iter()
        .enumerate()
        .map(|(k, n)| draw_corpus(n, &vocab(k), 100, &mut rng))
        .collect();
    assert!(holdout_macro_f1(&train, &test) >= 0.95);
}

#[test]
fn indistinguishable_communities_score_near_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let names = ["a", "b", "c", "d", "e", "f"];
    let shared: Vec<String> = (0..200).map(|w| format!("w{w}")).collect();
    let train: Vec<Corpus> = names.iter().map(|n| draw_corpus(n, &shared, 400, &mut rng)).collect();
    let test: Vec<Corpus> = names.iter().map(|n| draw_corpus(n, &shared, 200, &mut rng)).collect();
    let f1 = holdout_macro_f1(&train, &test);
    assert!(f1 <= 1.0 / 6.0 + 0.1, "{f1}");
}
