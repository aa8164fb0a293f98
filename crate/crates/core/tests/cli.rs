use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mrsne::io::{load_embedding, load_matrix};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .join("data.toml")
}

fn mrsne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrsne"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn embed_evaluate_cdmca_plot() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("synthetic");
    let emb = dir.path().join("emb.txt");
    let trace = dir.path().join("kl.txt");
    let out = mrsne(&[
        "embed",
        "--data",
        s(&data),
        "--out",
        s(&emb),
        "--perplexity",
        "4",
        "--iters",
        "300",
        "--kl-trace",
        s(&trace),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let e = load_embedding(&emb).unwrap();
    assert_eq!((e.n1(), e.n2(), e.dim()), (45, 15, 2));
    assert_eq!(
        std::fs::read_to_string(&trace).unwrap().lines().count(),
        300
    );

    let roc = dir.path().join("roc.txt");
    let out = mrsne(&[
        "evaluate",
        "--data",
        s(&data),
        "--embedding",
        s(&emb),
        "--roc-out",
        s(&roc),
        "--k",
        "1,3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let auc: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("auc="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(auc > 0.8, "{stdout}");
    for key in [
        "variance_ratio=",
        "metric_I_across_k1=",
        "metric_II_within_k3=",
    ] {
        assert!(stdout.contains(key), "missing {key} in {stdout}");
    }
    // k = 0 .. n1 + n2 - 1
    assert_eq!(std::fs::read_to_string(&roc).unwrap().lines().count(), 60);

    let base = dir.path().join("cdmca.txt");
    let out = mrsne(&["cdmca", "--data", s(&data), "--out", s(&base), "--dim", "2"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(load_embedding(&base).unwrap().len(), 60);

    let svg = dir.path().join("plot.svg");
    let out = mrsne(&[
        "plot",
        "--embedding",
        s(&emb),
        "--out",
        s(&svg),
        "--labels",
        s(&data),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(svg.matches("<circle").count(), 45);
    assert_eq!(svg.matches("<text").count(), 15);
    assert!(svg.contains(">c0_tag0</text>"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = mrsne(&["embed", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn help_flags_the_default_perplexity() {
    let out = mrsne(&["embed", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let help = String::from_utf8(out.stdout).unwrap();
    assert!(help.contains("not a tuned value"), "{help}");
}

#[test]
fn one_hot_tags_need_drop_domain2() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("onehot");
    let emb = dir.path().join("emb.txt");
    let args = [
        "embed",
        "--data",
        s(&data),
        "--out",
        s(&emb),
        "--perplexity",
        "4",
        "--iters",
        "50",
    ];
    let out = mrsne(&args);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("set β₂=0 / --drop-domain2 for degenerate (e.g. one-hot) domains"),
        "{stderr}"
    );
    assert!(!emb.exists());

    let mut args = args.to_vec();
    args.push("--drop-domain2");
    let out = mrsne(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn bad_input_files_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x1.txt"), "2 2\n1 2\n3\n").unwrap();
    std::fs::write(dir.path().join("data.toml"), "domain1 = \"x1.txt\"\n").unwrap();
    let out = mrsne(&[
        "embed",
        "--data",
        s(&dir.path().join("data.toml")),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x1.txt"));
}

#[test]
fn single_domain_manifest_embeds() {
    let dir = tempfile::tempdir().unwrap();
    let x1 = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic/x1.txt");
    std::fs::write(
        dir.path().join("data.toml"),
        format!("domain1 = {:?}\n", s(&x1)),
    )
    .unwrap();
    let emb = dir.path().join("emb.txt");
    let out = mrsne(&[
        "embed",
        "--data",
        s(&dir.path().join("data.toml")),
        "--out",
        s(&emb),
        "--perplexity",
        "5",
        "--iters",
        "50",
        "--dim",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let e = load_embedding(&emb).unwrap();
    assert_eq!(
        (e.n1(), e.n2(), e.dim()),
        (load_matrix(&x1).unwrap().nrows(), 0, 3)
    );
}
