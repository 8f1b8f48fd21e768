use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn twin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twin"))
        .args(args)
        .env_remove("TWIN_CONFIG")
        .output()
        .expect("run twin")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn toy(dir: &Path) -> String {
    let o = twin(&["toy", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    dir.join("twin.toml").to_string_lossy().into_owned()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn unused_port() -> u16 {
    let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    l.local_addr().unwrap().port()
}

#[test]
fn toy_run_end_to_end_then_rerun_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    let o = twin(&["-c", &cfg, "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = dir.path().join("out/report");
    for f in [
        "alignment_report.json",
        "fid.csv",
        "origin_f1.csv",
        "screening.csv",
        "agreement.json",
    ] {
        assert!(report.join(f).is_file(), "missing {f}");
    }
    assert!(dir.path().join("out/manifest.json").is_file());

    let again = twin(&["-c", &cfg, "all"]);
    assert_eq!(again.status.code(), Some(0), "{}", stderr(&again));
    let out = stdout(&again);
    assert_eq!(out.lines().count(), 8, "{out}");
    assert!(out.lines().all(|l| l.ends_with(" 0 provider calls")), "{out}");
}

#[test]
fn stage_without_its_input_names_the_missing_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    let o = twin(&["-c", &cfg, "curate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("communities"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nope.toml");
    let o = twin(&["-c", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("does not exist"));
}

#[test]
fn invalid_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    let o = twin(&["-c", &cfg, "--set", "synth.balance=0", "ingest"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("balance"), "{}", stderr(&o));
}

#[test]
fn online_screen_without_aligned_endpoint_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    for stage in ["ingest", "communities"] {
        let o = twin(&["-c", &cfg, stage]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let o = twin(&["-c", &cfg, "--set", "offline=false", "screen"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("aligned endpoint"), "{}", stderr(&o));
}

#[test]
fn unreachable_provider_exits_with_provider_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    for stage in ["ingest", "communities"] {
        let o = twin(&["-c", &cfg, stage]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let endpoint = format!("providers.perplexity.endpoint=http://127.0.0.1:{}", unused_port());
    let o = twin(&[
        "-c",
        &cfg,
        "--set",
        "offline=false",
        "--set",
        &endpoint,
        "--set",
        "providers.perplexity.model=m",
        "--set",
        "providers.perplexity.retry.max_attempts=1",
        "curate",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(twin(&["--help"]).status.code(), Some(0));
    assert_eq!(twin(&["--version"]).status.code(), Some(0));
    assert_eq!(twin(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(twin(&[]).status.code(), Some(1));
}

#[test]
fn recorded_votes_are_scored_against_a_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    let o = twin(&[
        "-c",
        &cfg,
        "screen",
        "--from-votes",
        &data("published_votes.csv"),
        "--reference",
        &data("published_criteria.csv"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("out/screen/results.json")).unwrap();
    let results: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = results.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0]["community"], "Pro-ED");
    assert_eq!(rows[0]["criteria"]["c1"], 45.0);
    for r in rows {
        let d: Vec<&str> = r["discrepancies"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        assert!(!d.contains(&"C1") && !d.contains(&"C2"), "{r}");
    }
}
