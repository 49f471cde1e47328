use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dotmat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn dotmat")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn ratings_file(dir: &TempDir) -> PathBuf {
    let mut s = String::new();
    for u in 1..=40u64 {
        for i in 1..=30u64 {
            if (u * 7 + i * 3) % 4 == 0 {
                s.push_str(&format!("{u}::{i}::{}::{}\n", 1 + (u + i) % 5, u * 100 + i));
            }
        }
    }
    let path = dir.path().join("ratings.dat");
    fs::write(&path, s).unwrap();
    path
}

#[test]
fn ingest_train_predict_densify() {
    let dir = TempDir::new().unwrap();
    let ratings = ratings_file(&dir);
    let cache = dir.path().join("cache.json");
    let out = run(&[
        "ingest",
        "--format",
        "movielens",
        "--input",
        p(&ratings),
        "--output",
        p(&cache),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("40 users"));

    for algo in ["dotmat", "mf", "rankmat", "glovemat", "dotmat-hybrid"] {
        let model = dir.path().join(format!("{algo}.model"));
        let trace = dir.path().join(format!("{algo}.trace.csv"));
        let out = run(&[
            "train",
            "--algo",
            algo,
            "--input",
            p(&cache),
            "--lr",
            "0.01",
            "--epochs",
            "3",
            "--dim",
            "4",
            "--seed",
            "42",
            "--test-fraction",
            "0.2",
            "--model-out",
            p(&model),
            "--trace-out",
            p(&trace),
        ]);
        assert!(out.status.success(), "{algo}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("test MAE"));
        assert_eq!(fs::read_to_string(&trace).unwrap().lines().count(), 4);
    }

    let preds = dir.path().join("preds.csv");
    let model = dir.path().join("dotmat.model");
    let out = run(&[
        "predict",
        "--model",
        p(&model),
        "--input",
        p(&ratings),
        "--output",
        p(&preds),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&preds).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("user_id,item_id,predicted,actual"));
    let n = fs::read_to_string(&ratings).unwrap().lines().count();
    assert_eq!(lines.count(), n);

    let out = run(&[
        "predict",
        "--model",
        p(&dir.path().join("rankmat.model")),
        "--input",
        p(&ratings),
        "--output",
        p(&preds),
        "--rule",
        "rankmat",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "rankmat rule without rank data is a usage error"
    );

    let dense = dir.path().join("dense.json");
    let out = run(&[
        "densify",
        "--model",
        p(&model),
        "--input",
        p(&ratings),
        "--output",
        p(&dense),
    ]);
    assert!(out.status.success());
    let back = dotmat::InteractionDataset::load_json(&dense).unwrap();
    assert_eq!(back.len(), 40 * 30);
}

#[test]
fn grid_writes_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let ratings = ratings_file(&dir);
    let (csv, json) = (dir.path().join("g.csv"), dir.path().join("g.json"));
    let out = run(&[
        "grid",
        "--input",
        p(&ratings),
        "--algos",
        "dotmat,mf,random",
        "--lrs",
        "0.01,0.05",
        "--samples",
        "20,40",
        "--epochs",
        "2",
        "--dim",
        "4",
        "--out-csv",
        p(&csv),
        "--out-json",
        p(&json),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("algorithm,learning_rate,sample_size,mae,matthew_degree,train_seconds,seed")
    );
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
    let report = dotmat::ExperimentReport::from_json(fs::File::open(&json).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 12);
    assert!(report.rows.iter().all(|r| r.train_seconds == 0.0));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let ratings = ratings_file(&dir);
    let out = dir.path().join("x");

    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["train", "--algo", "dotmat"]).status.code(), Some(1));
    let o = run(&["grid", "--input", p(&ratings), "--algos", "nope", "--out-csv", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["grid", "--input", p(&ratings), "--samples", "500", "--out-csv", p(&out)]);
    assert_eq!(o.status.code(), Some(1));

    let missing = dir.path().join("missing.dat");
    let o = run(&["ingest", "--input", p(&missing), "--output", p(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.dat");
    fs::write(&bad, "1::2::5::0\n1::x::4::0\n").unwrap();
    let o = run(&["ingest", "--input", p(&bad), "--output", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let model = dir.path().join("garbage.model");
    fs::write(&model, "not a model\n").unwrap();
    let o = run(&[
        "predict",
        "--model",
        p(&model),
        "--input",
        p(&ratings),
        "--output",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_controls_training() {
    let dir = TempDir::new().unwrap();
    let ratings = ratings_file(&dir);
    let train = |seed: &str, name: &str| {
        let model = dir.path().join(name);
        let o = run(&[
            "train",
            "--algo",
            "dotmat",
            "--input",
            p(&ratings),
            "--epochs",
            "2",
            "--seed",
            seed,
            "--model-out",
            p(&model),
        ]);
        assert!(o.status.success());
        fs::read(model).unwrap()
    };
    assert_eq!(train("7", "a"), train("7", "b"));
    assert_ne!(train("7", "c"), train("8", "d"));
}
