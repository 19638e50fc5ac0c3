use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stochmatch"));
    c.env_remove("STOCHMATCH_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn col(o: &Output, name: &str) -> Vec<f64> {
    let text = stdout(o);
    let header: Vec<&str> = text.lines().find(|l| !l.starts_with('#')).unwrap().split(',').collect();
    let i = header.iter().position(|&h| h == name).unwrap();
    rows(o).iter().map(|r| r[i].parse().unwrap()).collect()
}

fn error_json(o: &Output) -> serde_json::Value {
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let line = err.lines().rev().find(|l| l.starts_with('{')).expect("json error line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn single_certain_edge_has_ratio_one() {
    let o = run(&["run", "--family", "single-edge", "--model", "uniform:1.0", "--alg", "adaptive", "--R", "1"]);
    assert!(o.status.success());
    assert_eq!(col(&o, "ratio"), vec![1.0]);
}

#[test]
fn sweep_prints_one_row_per_round_count() {
    let o = run(&[
        "sweep", "--family", "k22", "--model", "uniform:0.5", "--alg", "nonadaptive", "--R", "1..5", "--trials", "400",
    ]);
    assert!(o.status.success());
    let r = col(&o, "R");
    assert_eq!(r, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    let alg = col(&o, "alg_mean");
    // same trial seeds across cells, so more rounds never hurts
    assert!(alg.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{alg:?}");
}

#[test]
fn unknown_algorithm_is_a_config_error() {
    let o = run(&["run", "--family", "k22", "--model", "uniform:0.5", "--alg", "bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let j = error_json(&o);
    assert_eq!(j["error"], "config");
    assert_eq!(j["exit_code"], 1);
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let o = run(&[
        "run", "--family", "k22", "--model", "uniform:0.5", "--alg", "adaptive", "--out", "/nonexistent/dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["exit_code"], 2);
}

#[test]
fn output_is_independent_of_thread_count() {
    let args = [
        "sweep", "--family", "erdos-renyi", "--n", "30", "--d", "3", "--model", "uniform:0.4", "--alg", "adaptive", "--R",
        "1,3", "--trials", "60",
    ];
    let a = run(&args);
    let b = bin().args(args).args(["--threads", "1"]).output().unwrap();
    let c = bin().args(args).args(["--threads", "4"]).output().unwrap();
    assert!(a.status.success());
    assert_eq!(rows(&a), rows(&b));
    assert_eq!(rows(&a), rows(&c));
    assert_eq!(stdout(&a), stdout(&run(&args)));
}

#[test]
fn flags_override_config_and_env_sets_default_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "# test\nfamily = k22\nmodel = uniform:0.5\nalg = adaptive\ntrials = 30\nR = 2\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = run(&["run", "--config", cfg, "--trials", "40"]);
    assert!(o.status.success());
    assert_eq!(col(&o, "trials"), vec![40.0]);
    assert_eq!(col(&o, "R"), vec![2.0]);

    let base = run(&["run", "--config", cfg, "--seed", "9"]);
    let env = bin().args(["run", "--config", cfg]).env("STOCHMATCH_SEED", "9").output().unwrap();
    assert_eq!(rows(&base), rows(&env));
    let flag_wins = bin().args(["run", "--config", cfg, "--seed", "9"]).env("STOCHMATCH_SEED", "3").output().unwrap();
    assert_eq!(rows(&base), rows(&flag_wins));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "colour = blue\n").unwrap();
    let o = run(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generated_graph_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let path = path.to_str().unwrap();
    let o = run(&["generate", "--family", "erdos-renyi", "--n", "14", "--d", "3", "--model", "uniform:0.4", "--out", path]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let from_file = run(&["run", "--input", path, "--alg", "adaptive", "--R", "3", "--trials", "50"]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    let direct = run(&[
        "run", "--family", "erdos-renyi", "--n", "14", "--d", "3", "--model", "uniform:0.4", "--alg", "adaptive", "--R",
        "3", "--trials", "50",
    ]);
    assert_eq!(col(&from_file, "alg_mean"), col(&direct, "alg_mean"));
    assert_eq!(col(&from_file, "omni_mean"), col(&direct, "omni_mean"));
}

#[test]
fn kidney_instance_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.txt");
    let path = path.to_str().unwrap();
    let o = run(&["generate", "--family", "kidney", "--n", "30", "--k-max", "2", "--out", path]);
    assert!(o.status.success());
    let o = run(&["run", "--instance", path, "--alg", "kset-adaptive", "--R", "2", "--trials", "20"]);
    assert!(o.status.success());
    let r = col(&o, "ratio")[0];
    assert!((0.0..=1.0 + 1e-9).contains(&r));

    let o = run(&["sweep", "--family", "kidney", "--n", "40", "--f", "0.3,0.6", "--R", "0..2", "--trials", "10"]);
    assert!(o.status.success());
    assert_eq!(rows(&o).len(), 6);
    assert_eq!(col(&o, "f"), vec![0.3, 0.3, 0.3, 0.6, 0.6, 0.6]);
}

#[test]
fn replicate_small_suite() {
    let o = run(&["replicate", "--suite", "theorem1", "--trials", "20"]);
    assert!(o.status.success());
    let ratios = col(&o, "ratio");
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().all(|&r| r > 0.5));
    let o = run(&["replicate", "--suite", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn kset_run_rejects_large_structure_cap() {
    let o = run(&["run", "--family", "kidney", "--n", "20", "--alg", "kset-adaptive", "--s", "9"]);
    assert_eq!(o.status.code(), Some(1));
}
