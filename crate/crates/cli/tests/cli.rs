use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn karate() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/karate.txt")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgeprune"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn edge_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(String::from)
        .collect()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["sparsify", "--method", "nope"]).status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.txt");
    let o = run(&[
        "sparsify",
        "--dataset",
        dir.path().join("absent.txt").to_str().unwrap(),
        "--method",
        "re",
        "--ratio",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn malformed_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0 1\n1 x\n").unwrap();
    let out = dir.path().join("o.txt");
    let o = run(&[
        "sparsify",
        "--dataset",
        bad.to_str().unwrap(),
        "--method",
        "re",
        "--ratio",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sparsify_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("half.txt");
    let o = run(&[
        "sparsify",
        "--dataset",
        karate().to_str().unwrap(),
        "--method",
        "re",
        "--ratio",
        "0.5",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(edge_lines(&out).len(), 39);

    let csv = dir.path().join("eval.csv");
    let o = run(&[
        "evaluate",
        "--dataset",
        karate().to_str().unwrap(),
        "--sparsified",
        out.to_str().unwrap(),
        "--metric",
        "pagerank",
        "--metric",
        "modularity",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn train_and_sparsify_with_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "schema_version = 1\noutput_dir = {:?}\n\n[dataset]\npath = {:?}\n\n[reward]\nobjective = \"pagerank\"\n\n[train]\nepisodes = 3\n",
            dir.path().join("out"),
            karate()
        ),
    )
    .unwrap();
    let o = run(&["train", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/agent.ckpt").exists());

    let out = dir.path().join("rl.txt");
    let o = run(&[
        "sparsify",
        "--dataset",
        karate().to_str().unwrap(),
        "--method",
        "rl",
        "--ratio",
        "0.8",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(edge_lines(&out).len(), 62);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "schema_version = 1\n\n[dataset]\npath = {:?}\n\n[reward]\nobjective = \"modularity\"\nlabel_sign = \"plus\"\n",
            karate()
        ),
    )
    .unwrap();
    assert_eq!(run(&["train", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}
