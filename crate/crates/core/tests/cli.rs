use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn zomat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zomat"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn check(args: &[&str], name: &str) {
    let out = zomat(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        golden(name),
        "zomat {}",
        args.join(" ")
    );
}

fn checkpoints() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    let out = zomat(&[
        "classify",
        "--max-order",
        "4",
        "--checkpoint-dir",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    (dir, path)
}

#[test]
fn classify_order_four() {
    check(&["classify", "--max-order", "4"], "classify_4.txt");
    check(
        &[
            "classify",
            "--max-order",
            "4",
            "--threads",
            "3",
            "--no-warm-start",
        ],
        "classify_4.txt",
    );
}

#[test]
fn snf_and_canon() {
    check(&["snf", "3,5,6"], "snf.txt");
    check(&["canon", "5,6,4"], "canon_pi.txt");
    check(&["canon", "--pi", "5,6,4"], "canon_pi.txt");
    check(&["canon", "--phi", "1,3"], "canon_phi.txt");
}

#[test]
fn counts() {
    check(&["count", "--order", "8", "--snf-det", "36"], "count_8.txt");
}

#[test]
fn spectrum_incidence_verify() {
    let (_dir, path) = checkpoints();
    let p = path.to_str().unwrap();
    check(
        &["spectrum", "--order", "4", "--checkpoint-dir", p],
        "spectrum_4.txt",
    );
    check(
        &["incidence", "--order", "2", "--checkpoint-dir", p],
        "incidence_2.txt",
    );
    check(
        &[
            "incidence",
            "--order",
            "2",
            "--ascii",
            "--checkpoint-dir",
            p,
        ],
        "incidence_2_ascii.txt",
    );
    check(&["verify", "--checkpoint-dir", p], "verify.txt");
}

#[test]
fn bound_with_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.tsv");
    let p = dir.path().join("p.txt");
    check(
        &[
            "bound",
            "--order",
            "10",
            "--seeds",
            "tests/fixtures/l9_seeds.txt",
            "--witnesses",
            w.to_str().unwrap(),
            "--promising",
            p.to_str().unwrap(),
        ],
        "bound_10.txt",
    );
    let text = std::fs::read_to_string(&w).unwrap();
    assert_eq!(zomat::bounds::check_witness_file(&text).unwrap(), 259);
    let promising = zomat::bitmat::read_matrix_set(&p).unwrap();
    assert!(promising.iter().all(|m| m.order() == 10));
}

#[test]
fn tampered_checkpoint_fails_verify() {
    let (_dir, path) = checkpoints();
    let summary = path.join("level3.summary.tsv");
    let text = std::fs::read_to_string(&summary)
        .unwrap()
        .replace("\t49\t", "\t50\t");
    std::fs::write(&summary, text).unwrap();
    let out = zomat(&["verify", "--checkpoint-dir", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("order 3:") && !stdout.contains("order 3: ok"),
        "{stdout}"
    );
}

#[test]
fn exit_codes() {
    assert_eq!(zomat(&["snf", "zz"]).status.code(), Some(2));
    assert_eq!(zomat(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        zomat(&["classify", "--max-order", "3", "--threads", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        zomat(&["verify", "--checkpoint-dir", "/nonexistent/zomat"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(zomat(&["spectrum", "--order", "5"]).status.code(), Some(3));
    assert_eq!(zomat(&["--version"]).status.code(), Some(0));
}
