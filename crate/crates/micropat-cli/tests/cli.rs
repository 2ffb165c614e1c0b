use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn micropat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_micropat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(root: &Path, rel: &str, content: &str) {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, content).unwrap();
}

fn sample_corpus(root: &Path) {
    write(
        root,
        "one/Token.sol",
        r#"
        pragma solidity ^0.8.0;
        contract Token {
            address public owner;
            event Moved(address to, uint256 amount);
            modifier onlyOwner() { require(msg.sender == owner); _; }
            function move(address to, uint256 amount) public onlyOwner {
                emit Moved(to, amount);
            }
        }
        "#,
    );
    write(
        root,
        "two/Store.sol",
        r#"
        pragma solidity ^0.7.6;
        contract Store {
            uint256 value;
            function put(uint256 v) public { value = v; }
            function get() public view returns (uint256) { return value; }
        }
        "#,
    );
}

#[test]
fn scan_writes_csv_to_stdout_and_summary_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    sample_corpus(dir.path());
    let out = micropat(&["scan", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    assert!(csv.starts_with("name,file_path,compiler_version,kind,Ownable,"));
    assert!(csv.contains("Token,one/Token.sol,^0.8.0,contract,1,"));
    assert!(csv.contains("Store,two/Store.sol,^0.7.6,contract,0,"));
    assert!(stderr(&out).contains("parsed successfully: 2 (100.00%)"));
}

#[test]
fn scan_emits_json_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    sample_corpus(dir.path());
    let matrix = dir.path().join("matrix.json");
    let out = micropat(&[
        "scan",
        dir.path().to_str().unwrap(),
        "--format",
        "json",
        "--label",
        "demo",
        "--out",
        matrix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&matrix).unwrap()).unwrap();
    assert_eq!(parsed["label"], "demo");
    assert_eq!(parsed["rows"][0]["kind"], "contract");
    assert!(parsed["rows"][0]["flags"][0].is_boolean());
}

#[test]
fn scan_of_a_missing_root_fails() {
    let out = micropat(&["scan", "/nonexistent/corpus/root"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn metrics_renders_coverage_tables() {
    let dir = tempfile::tempdir().unwrap();
    sample_corpus(dir.path());
    let matrix = dir.path().join("m.csv");
    let out = micropat(&[
        "scan",
        dir.path().to_str().unwrap(),
        "--out",
        matrix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let arg = format!("demo={}", matrix.display());
    let out = micropat(&["metrics", &arg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("corpus: demo"));
    assert!(text.contains("coverage"));
    assert!(text.contains("Ownable"));
}

#[test]
fn metrics_arguments_must_be_label_path_pairs() {
    let out = micropat(&["metrics", "/tmp/whatever.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("label=path"));
}

#[test]
fn stats_runs_phi_for_a_single_corpus() {
    let dir = tempfile::tempdir().unwrap();
    sample_corpus(dir.path());
    let matrix = dir.path().join("m.csv");
    micropat(&["scan", dir.path().to_str().unwrap(), "--out", matrix.to_str().unwrap()]);
    let arg = format!("demo={}", matrix.display());

    let out = micropat(&["stats", &arg, "--phi"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("phi matrix: demo"));

    // The cross-corpus analyses refuse to run on one matrix.
    let out = micropat(&["stats", &arg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least two"));
}

#[test]
fn stats_compares_two_corpora() {
    let dir = tempfile::tempdir().unwrap();
    sample_corpus(dir.path());
    let matrix = dir.path().join("m.csv");
    micropat(&["scan", dir.path().to_str().unwrap(), "--out", matrix.to_str().unwrap()]);
    let a = format!("a={}", matrix.display());
    let b = format!("b={}", matrix.display());

    let out = micropat(&["stats", &a, &b, "--chi2", "--spearman"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("pairwise coverage tests"));
    assert!(text.contains("a vs b"));
    // Identical corpora: identical coverage profiles.
    assert!(text.contains("rho = 1.0000"));

    let out = micropat(&["stats", &a, &b, "--mantel", "--seed", "7", "--permutations", "99"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("mantel a vs b"));
}

#[test]
fn mantel_requires_a_seed() {
    let out = micropat(&["stats", "a=x.csv", "b=y.csv", "--mantel"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--seed"));
}

#[test]
fn power_prints_the_minimum_sample_size() {
    let out = micropat(&["power", "--w", "0.3", "--alpha", "0.05", "--power", "0.8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "88");

    // Deterministic across runs.
    let again = micropat(&["power", "--w", "0.3", "--alpha", "0.05", "--power", "0.8"]);
    assert_eq!(stdout(&out), stdout(&again));

    let out = micropat(&["power", "--w", "0", "--power", "0.8"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scan_of_an_empty_corpus_exits_two_with_a_bare_header() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("empty.csv");
    let out = micropat(&[
        "scan",
        dir.path().to_str().unwrap(),
        "--out",
        matrix.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let content = fs::read_to_string(&matrix).unwrap();
    assert!(content.starts_with("name,file_path,compiler_version,kind,Ownable,"));
    assert_eq!(content.lines().count(), 1);
}
