//! End-to-end tests of the `holigram` binary: exit codes, artifact formats,
//! and pipeline determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn holigram(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holigram"))
        .args(args)
        .current_dir(dir)
        .env("HOLIGRAM_LOG", "quiet")
        .output()
        .expect("failed to launch binary")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, content).unwrap();
    p.display().to_string()
}

fn small_config(dir: &Path) -> String {
    write(
        dir,
        "train.cfg",
        "architecture = skipgram\ndim = 8\nmax_window = 2\nnegatives = 3\n\
         epochs = 3\nlr_initial = 0.05\nsubsample_t = off\nmin_count = 1\nseed = 7\n",
    )
}

fn small_corpus(dir: &Path) -> String {
    let mut text = String::new();
    for _ in 0..60 {
        text.push_str("alpha beta gamma delta\n");
        text.push_str("delta gamma beta alpha\n");
        text.push_str("epsilon zeta eta theta\n");
        text.push_str("iota kappa lambda mu\n");
    }
    write(dir, "corpus.txt", &text)
}

#[test]
fn missing_corpus_file_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = holigram(
        &["train", "--corpus", "nope.txt", "--config", &cfg, "--out", "v.vec"],
        dir.path(),
    );
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn unknown_config_key_is_input_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = write(dir.path(), "bad.cfg", "dim = 8\nwibble = 3\n");
    let out = holigram(
        &["train", "--corpus", &corpus, "--config", &cfg, "--out", "v.vec"],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("wibble"), "stderr: {}", stderr(&out));
}

#[test]
fn empty_vocabulary_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = write(
        dir.path(),
        "high.cfg",
        "dim = 8\nmin_count = 100000\nsubsample_t = off\n",
    );
    let out = holigram(
        &["train", "--corpus", &corpus, "--config", &cfg, "--out", "v.vec"],
        dir.path(),
    );
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("min_count") || stderr(&out).contains("vocabulary"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn empty_seed_list_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = small_config(dir.path());
    let suite = write(dir.path(), "suite.txt", ": sec\nalpha beta gamma delta\n");
    let out = holigram(
        &[
            "compare", "--corpus", &corpus, "--config", &cfg, "--seeds", ",",
            "--suite", &suite, "--out", "cmp",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn train_writes_word2vec_header_and_eval_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = small_config(dir.path());
    let out = holigram(
        &["train", "--corpus", &corpus, "--config", &cfg, "--out", "v.vec"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("v.vec")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "12 8", "header was {header:?}"); // 12 words, dim 8
    assert_eq!(text.lines().count(), 13);

    let suite = write(
        dir.path(),
        "suite.txt",
        ": sem-basic\nalpha beta gamma delta\n: gram-basic\nbeta alpha gamma theta\n",
    );
    let out = holigram(
        &["eval", "--vectors", "v.vec", "--suite", &suite, "--out", "report.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("section"));
    assert!(csv.contains("sem-basic"));
}

#[test]
fn train_is_deterministic_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = small_config(dir.path());
    for name in ["a.vec", "b.vec"] {
        let out = holigram(
            &["train", "--corpus", &corpus, "--config", &cfg, "--out", name],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    let a = fs::read(dir.path().join("a.vec")).unwrap();
    let b = fs::read(dir.path().join("b.vec")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn lab_gen_tvp_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = holigram(
        &[
            "lab", "gen", "--seed", "5", "--entities", "10", "--categories", "2",
            "--properties", "3", "--out", "lab",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(dir.path().join("lab/world.txt").exists());
    assert!(dir.path().join("lab/corpus.txt").exists());

    let out = holigram(
        &["lab", "tvp", "--world", "lab/world.txt", "--out", "lab"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let partition = fs::read_to_string(dir.path().join("lab/partition.tsv")).unwrap();
    // 2 designed categories over 10 entity nouns
    let mut classes: Vec<&str> = partition
        .lines()
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(classes.len(), 10);
    classes.sort();
    classes.dedup();
    assert_eq!(classes.len(), 2);
    let witnesses = fs::read_to_string(dir.path().join("lab/witnesses.tsv")).unwrap();
    assert!(witnesses.contains('_'));
}

#[test]
fn lab_corrupt_rate_zero_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = holigram(
        &["lab", "gen", "--seed", "5", "--out", "lab"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let original = fs::read(dir.path().join("lab/corpus.txt")).unwrap();
    // pick a real entity noun from the world file
    let world = fs::read_to_string(dir.path().join("lab/world.txt")).unwrap();
    let target = world
        .lines()
        .skip_while(|l| l.trim() != "[entities]")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .to_string();
    let out = holigram(
        &[
            "lab", "corrupt", "--corpus", "lab/corpus.txt", "--world", "lab/world.txt",
            "--target", &target, "--rate", "0.0", "--out", "lab/same.txt",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let copied = fs::read(dir.path().join("lab/same.txt")).unwrap();
    assert_eq!(original, copied);
}

#[test]
fn lab_recover_missing_word_is_input_error_naming_word() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = small_config(dir.path());
    let out = holigram(
        &["train", "--corpus", &corpus, "--config", &cfg, "--out", "v.vec"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let partition = write(
        dir.path(),
        "p.tsv",
        "0\talpha\n0\tbeta\n1\tgamma\n1\tmissingword\n",
    );
    let out = holigram(
        &["lab", "recover", "--vectors", "v.vec", "--partition", &partition],
        dir.path(),
    );
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("missingword"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn compare_writes_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = small_config(dir.path());
    let suite = write(
        dir.path(),
        "suite.txt",
        ": sem-pairs\nalpha beta gamma delta\n",
    );
    for out_dir in ["cmp1", "cmp2"] {
        let out = holigram(
            &[
                "compare", "--corpus", &corpus, "--config", &cfg, "--seeds", "1,2",
                "--suite", &suite, "--out", out_dir,
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    let a = fs::read(dir.path().join("cmp1/comparison.csv")).unwrap();
    let b = fs::read(dir.path().join("cmp2/comparison.csv")).unwrap();
    assert_eq!(a, b);
    let md = fs::read_to_string(dir.path().join("cmp1/summary.md")).unwrap();
    assert!(md.contains("skipgram") && md.contains("cbow"), "summary: {md}");
}

#[test]
fn lab_correlate_reports_rho() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = small_config(dir.path());
    let out = holigram(
        &["train", "--corpus", &corpus, "--config", &cfg, "--out", "v.vec"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let out = holigram(
        &[
            "lab", "correlate", "--vectors", "v.vec", "--corpus", &corpus,
            "--window", "2", "--topn", "10", "--out", "corr.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("corr.csv")).unwrap();
    assert!(csv.starts_with("rho,p_value,pair_count,degenerate"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rho"), "stdout: {stdout}");
}
