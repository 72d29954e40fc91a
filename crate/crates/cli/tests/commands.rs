use std::path::Path;
use std::process::Command;

fn gridbench(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_gridbench")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_run_metrics_replay() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    let out = dir.path().join("run");
    gridbench(&["gen", "--game", "maze", "--levels", "easy,hard", "--count", "3", "--seed", "9", "--out", p(&suite)]);
    let manifest = suite.join("manifest.json");
    assert!(manifest.exists());

    let table = gridbench(&["run", "--suite", p(&manifest), "--agents", "bfs,frontier", "--out", p(&out)]);
    assert!(table.starts_with("Model"));
    assert!(table.contains("bfs (all)") && table.contains("frontier (hard)"));
    assert!(out.join("report.csv").exists() && out.join("run_manifest.json").exists());

    let again = gridbench(&["metrics", "--logs", p(&out.join("logs"))]);
    assert_eq!(again, table);

    let logs: Vec<String> = std::fs::read_dir(out.join("logs"))
        .unwrap()
        .map(|e| e.unwrap().path().to_string_lossy().into_owned())
        .collect();
    assert_eq!(logs.len(), 12);
    let mut args = vec!["replay"];
    args.extend(logs.iter().map(String::as_str));
    let replayed = gridbench(&args);
    assert_eq!(replayed.lines().filter(|l| l.starts_with("ok")).count(), 12);
}

#[test]
fn rejects_unknown_agent() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    gridbench(&["gen", "--game", "match2", "--levels", "1", "--count", "1", "--out", p(&suite)]);
    let out = Command::new(env!("CARGO_BIN_EXE_gridbench"))
        .args(["run", "--suite", p(&suite.join("manifest.json")), "--agents", "oracle", "--out", p(dir.path())])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
