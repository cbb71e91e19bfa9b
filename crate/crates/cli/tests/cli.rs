use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn gapq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapq"))
        .current_dir(dir)
        .args(args)
        .env_remove("GAPQ_BACKEND_URL")
        .output()
        .expect("run gapq")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) {
    let mut text = String::new();
    for l in lines {
        text += &l;
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

fn corpus(dir: &TempDir, docs: usize) -> PathBuf {
    let path = dir.path().join("corpus.jsonl");
    write_lines(
        &path,
        (0..docs).map(|i| {
            json!({
                "id": format!("d{i}"),
                "kind": "prose",
                "text": "Anna visited the barn. Bruno painted the door. Carla opened the gate. Hugo cleaned the bridge.",
            })
            .to_string()
        }),
    );
    path
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn build_writes_dataset_and_report() {
    let dir = tempfile::tempdir().unwrap();
    corpus(&dir, 12);
    let out = gapq(
        dir.path(),
        &["build", "--corpus", "corpus.jsonl", "--out", "out.jsonl", "--seed", "1"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let lines = std::fs::read_to_string(dir.path().join("out.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 12);
    for line in lines.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(v["source"].is_string() && v["target"].is_string());
    }
    let r = report(&dir.path().join("out.jsonl.report.json"));
    assert_eq!(r["documents"], 12);
    assert_eq!(r["emitted"], 12);
    assert!(!dir.path().join("out.jsonl.partial").exists());
}

#[test]
fn missing_corpus_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gapq(dir.path(), &["build", "--corpus", "nope.jsonl", "--out", "out.jsonl"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("nope.jsonl"));
    assert!(!dir.path().join("out.jsonl").exists());
}

#[test]
fn out_of_range_proportion_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    corpus(&dir, 2);
    let out = gapq(
        dir.path(),
        &[
            "build",
            "--corpus",
            "corpus.jsonl",
            "--out",
            "out.jsonl",
            "--prop",
            "1.5",
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(!dir.path().join("out.jsonl").exists());
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gapq(dir.path(), &["build", "--bogus"])), 1);
    assert_eq!(code(&gapq(dir.path(), &[])), 1);
    assert_eq!(code(&gapq(dir.path(), &["--help"])), 0);
    assert_eq!(code(&gapq(dir.path(), &["--version"])), 0);
}

#[test]
fn output_may_not_overwrite_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    corpus(&dir, 2);
    let out = gapq(
        dir.path(),
        &["build", "--corpus", "corpus.jsonl", "--out", "./corpus.jsonl"],
    );
    assert_eq!(code(&out), 1);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("corpus.jsonl"))
            .unwrap()
            .lines()
            .count(),
        2
    );
}

#[test]
fn too_many_skips_abort_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    write_lines(
        &path,
        (0..1200).map(|i| json!({"id": format!("e{i}"), "kind": "prose", "text": ""}).to_string()),
    );
    let out = gapq(dir.path(), &["build", "--corpus", "empty.jsonl", "--out", "out.jsonl"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("skip rate"));
    assert!(!dir.path().join("out.jsonl").exists());
    assert!(!dir.path().join("out.jsonl.partial").exists());
    let r = report(&dir.path().join("out.jsonl.report.json"));
    assert_eq!(r["emitted"], 0);
    assert!(r["skipped"].as_u64().unwrap() >= 1000);
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    corpus(&dir, 20);
    std::fs::write(dir.path().join("gapq.toml"), "prop = 1.0\nseed = 5\n").unwrap();
    let modes = |args: &[&str]| {
        let out = gapq(dir.path(), args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        report(&dir.path().join("out.jsonl.report.json"))["mode_counts"].clone()
    };
    let from_file = modes(&[
        "build",
        "--corpus",
        "corpus.jsonl",
        "--out",
        "out.jsonl",
        "--config",
        "gapq.toml",
    ]);
    assert_eq!(from_file["ask_and_answer"], 20);
    let from_flag = modes(&[
        "build",
        "--corpus",
        "corpus.jsonl",
        "--out",
        "out.jsonl",
        "--config",
        "gapq.toml",
        "--prop",
        "0",
    ]);
    assert_eq!(from_flag["ask_and_answer"], 0);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    corpus(&dir, 2);
    std::fs::write(dir.path().join("gapq.toml"), "proportion = 0.5\n").unwrap();
    let out = gapq(
        dir.path(),
        &[
            "build",
            "--corpus",
            "corpus.jsonl",
            "--out",
            "o.jsonl",
            "--config",
            "gapq.toml",
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("proportion"), "{}", stderr(&out));
}

#[test]
fn recorded_backend_needs_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    corpus(&dir, 2);
    let out = gapq(
        dir.path(),
        &[
            "build",
            "--corpus",
            "corpus.jsonl",
            "--out",
            "o.jsonl",
            "--backend",
            "recorded",
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--fixtures"));
}

#[test]
fn builds_are_reproducible_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    corpus(&dir, 40);
    for (out, workers) in [("a.jsonl", "1"), ("b.jsonl", "3")] {
        let o = gapq(
            dir.path(),
            &[
                "build",
                "--corpus",
                "corpus.jsonl",
                "--out",
                out,
                "--workers",
                workers,
                "--prop",
                "0.5",
            ],
        );
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.jsonl")).unwrap());
}

#[test]
fn unknown_strategy_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = gapq(
        dir.path(),
        &[
            "plans",
            "--strategy",
            "outline",
            "--in",
            &data("sample/summaries.jsonl"),
            "--out",
            "p.jsonl",
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(!dir.path().join("p.jsonl").exists());
}

#[test]
fn plans_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let summaries = data("sample/summaries.jsonl");
    let out = gapq(
        dir.path(),
        &[
            "plans",
            "--strategy",
            "keywords",
            "--in",
            &summaries,
            "--out",
            "p.jsonl",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("20 plans written, 0 empty"));
    let out = gapq(
        dir.path(),
        &[
            "analyze",
            "--plans",
            "p.jsonl",
            "--summaries",
            &summaries,
            "--json",
            "s.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.starts_with("strategy"));
    assert!(table.contains("keywords"));
    let stats = report(&dir.path().join("s.json"));
    assert_eq!(stats["keywords"]["plans"], 20);
    assert!(stats.get("blueprint_qa").is_none());
}

#[test]
fn plans_without_summaries_are_orphans() {
    let dir = tempfile::tempdir().unwrap();
    let plans = dir.path().join("p.jsonl");
    write_lines(
        &plans,
        [json!({"doc_id": "nowhere", "query_id": "q9", "strategy": "keywords", "plan_text": "x"}).to_string()],
    );
    let out = gapq(
        dir.path(),
        &[
            "analyze",
            "--plans",
            "p.jsonl",
            "--summaries",
            &data("sample/summaries.jsonl"),
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("nowhere/q9"), "{}", stderr(&out));
}

#[test]
fn stats_and_plans_flags_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let out = gapq(
        dir.path(),
        &[
            "analyze",
            "--stats",
            &data("stats/stories.jsonl"),
            "--plans",
            &data("sample/plans.jsonl"),
        ],
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn rouge_scores_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.txt"), "a x b\nthe cat\n").unwrap();
    std::fs::write(dir.path().join("r.txt"), "a b y\nthe cat\n").unwrap();
    std::fs::write(dir.path().join("r2.txt"), "a x b\ndog\n").unwrap();
    let json = |args: &[&str]| -> Value {
        let out = gapq(dir.path(), args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        serde_json::from_slice(&out.stdout).unwrap()
    };

    let same = json(&["rouge", "--candidates", "c.txt", "--references", "c.txt", "--json"]);
    for row in same.as_array().unwrap() {
        assert_eq!(row["f1"], 1.0);
    }
    let l = json(&[
        "rouge",
        "--candidates",
        "c.txt",
        "--references",
        "r.txt",
        "--variant",
        "rougeL",
        "--json",
    ]);
    // mean of 2/3 and 1
    assert!((l[0]["f1"].as_f64().unwrap() - 5.0 / 6.0).abs() < 1e-12);
    assert_eq!(l[0]["count"], 2);

    let multi = json(&[
        "rouge",
        "--candidates",
        "c.txt",
        "--references",
        "r.txt",
        "--references",
        "r2.txt",
        "--multi-ref",
        "max",
        "--variant",
        "rougeL",
        "--json",
    ]);
    assert_eq!(multi[0]["f1"], 1.0);
}

#[test]
fn rouge_rejects_ambiguous_or_misaligned_input() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.txt"), "a\nb\n").unwrap();
    std::fs::write(dir.path().join("r.txt"), "a\n").unwrap();
    let out = gapq(dir.path(), &["rouge", "--candidates", "c.txt", "--references", "r.txt"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("lines"));
    let out = gapq(
        dir.path(),
        &[
            "rouge",
            "--candidates",
            "c.txt",
            "--references",
            "c.txt",
            "--references",
            "c.txt",
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--multi-ref"));
}
