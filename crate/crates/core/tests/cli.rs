use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data_dir() -> PathBuf {
    std::env::var_os("HYBRIDACT_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn hybridact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridact"))
        .args(args)
        .arg("--data-dir")
        .arg(data_dir())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_rescaled_s4_at_origin() {
    let o = hybridact(&["eval", "--fn", "s4", "--k", "10", "--x", "0", "--variant", "rescaled"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.5");
    // The resolved spec goes to stderr, before the result.
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"command\":\"eval\""));
}

#[test]
fn negative_k_is_a_usage_error() {
    let o = hybridact(&["eval", "--fn", "s4", "--k", "-1", "--x", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_flags_and_names_are_usage_errors() {
    assert_eq!(hybridact(&["eval", "--fn", "s4", "--x", "0", "--bogus"]).status.code(), Some(1));
    assert_eq!(hybridact(&["eval", "--fn", "mystery", "--x", "0"]).status.code(), Some(1));
    assert_eq!(hybridact(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn missing_data_is_a_runtime_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_hybridact"))
        .args(["task", "--task", "multiclass", "--activations", "relu", "--seeds", "1", "--data-dir", "/nonexistent"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_subcommand_documents_its_flags() {
    for sub in ["eval", "gradcheck", "train", "task", "convergence", "gradflow", "ksweep", "rank", "bench"] {
        let o = hybridact(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        let text = stdout(&o);
        assert!(text.contains("--seed") && text.contains("--out"), "{sub}");
    }
}

fn task_report(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "task",
        "--task",
        "multiclass",
        "--activations",
        "s4:k=10,relu,s3",
        "--seeds",
        "1,2,3",
        "--no-timing",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    hybridact(&args)
}

#[test]
fn task_report_shape_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(task_report(&a, &[]).status.code(), Some(0));
    assert_eq!(task_report(&b, &["--jobs", "2"]).status.code(), Some(0));
    let text = std::fs::read_to_string(&a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 9 + 3);
    assert_eq!(lines.iter().filter(|l| l.contains(",mean,")).count(), 3);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    // Ranking straight from the report.
    let r = hybridact(&["rank", "--reports", a.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let table = stdout(&r);
    assert!(table.starts_with("activation,"));
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn json_task_report_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = hybridact(&[
        "task", "--task", "multiclass", "--activations", "relu", "--seeds", "1", "--epochs", "3", "--patience", "2", "--format", "json",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["environment"]["precision"], "f64");
    assert_eq!(v["results"].as_array().unwrap().len(), 1);
}

#[test]
fn bench_emits_json() {
    let o = hybridact(&["bench", "--iterations", "5", "--buffer-len", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["results"]["speedup"].as_f64().unwrap() > 0.0);
    assert_eq!(v["results"]["warning"], "below reliable timing threshold");
    assert_eq!(v["results"]["checksum_rel_diff"].as_f64().unwrap(), 0.0);
}

#[test]
fn gradcheck_reports_every_pair() {
    let o = hybridact(&["gradcheck", "--fns", "s4,relu", "--k-values", "5,10", "--points", "201"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // relu ignores k, so it is checked once.
    assert_eq!(stdout(&o).lines().count(), 1 + 2 + 1);
}
