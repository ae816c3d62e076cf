use std::path::Path;
use std::process::{Command, Output};

fn guidekit(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_guidekit"))
        .args(args)
        .env("GUIDEKIT_CACHE", cache)
        .output()
        .expect("spawn guidekit")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn run_writes_outputs_and_uses_cache_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let out = tmp.path().join("run");
    let o = guidekit(
        &cache,
        &["run", "--env", "empty", "--strategy", "goal", "--seeds", "2", "--budget", "200", "--out", out.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["aggregate.csv", "summary.json", "se.svg", "traces/seed_0.csv", "traces/seed_1.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let cached = std::fs::read_dir(&cache).unwrap().filter_map(|e| e.ok()).filter(|e| e.path().extension().is_some_and(|x| x == "oracle")).count();
    assert_eq!(cached, 1);

    let o = guidekit(&cache, &["plot", "--in", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let out = out.to_str().unwrap();
    for args in [
        vec!["run", "--env", "nowhere", "--strategy", "voronoi", "--out", out],
        vec!["run", "--env", "empty", "--strategy", "bogus", "--out", out],
        vec!["run", "--env", "empty", "--strategy", "pathdb", "--seeds", "1", "--out", out],
        vec!["run", "--env", "empty", "--strategy", "voronoi", "--seeds", "0", "--out", out],
        vec!["run", "--env", "empty", "--strategy", "voronoi", "--eps", "0.5", "--out", out],
    ] {
        let o = guidekit(tmp.path(), &args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn unsolved_exits_3_only_when_required() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("u");
    let base = ["run", "--env", "simple_passage", "--strategy", "uniform", "--seeds", "1", "--budget", "3", "--out", out.to_str().unwrap()];
    assert_eq!(code(&guidekit(tmp.path(), &base)), 0);
    let mut strict = base.to_vec();
    strict.push("--require-success");
    assert_eq!(code(&guidekit(tmp.path(), &strict)), 3);
}

#[test]
fn oracle_and_dbbuild() {
    let tmp = tempfile::tempdir().unwrap();
    let field = tmp.path().join("trap.oracle");
    let o = guidekit(tmp.path(), &["oracle", "--env", "trap", "--grid", "32x32x8", "--out", field.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(field.is_file());

    let db = tmp.path().join("db.json");
    let o = guidekit(tmp.path(), &["dbbuild", "--size", "2", "--out", db.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = guidekit(
        tmp.path(),
        &["run", "--env", "random_simple_passage:7", "--strategy", "pathdb", "--db", db.to_str().unwrap(), "--seeds", "2", "--budget", "300", "--grid", "32x32x8", "--out", tmp.path().join("p").to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
