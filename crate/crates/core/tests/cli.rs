use std::process::{Command, Output};

use serde_json::Value;

fn crs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crs"))
        .args(args)
        .env_remove("CRS_DEFAULT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// JSON lines with the wall-clock field removed.
fn records(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            if let Some(obj) = v.as_object_mut() {
                obj.remove("wall_time_ms");
            }
            v
        })
        .collect()
}

#[test]
fn beta_and_gamma_print_constants() {
    let o = crs(&["beta", "--b", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("0.4762"));
    let o = crs(&["gamma", "--b", "1", "--json"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let g = v["mean"].as_f64().unwrap();
    assert!((g - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-12);
}

#[test]
fn estimate_replays_from_seed() {
    let args = [
        "estimate",
        "--scheme",
        "alg4",
        "--instance",
        "path3:0.1",
        "--trials",
        "20000",
        "--seed",
        "42",
    ];
    let a = crs(&args);
    let b = crs(&args);
    assert!(a.status.success());
    let (ra, rb) = (records(&a), records(&b));
    assert_eq!(ra, rb);
    assert_eq!(ra.len(), 4);
    for r in &ra[..3] {
        for key in ["scheme", "instance", "edge", "mean", "ci", "trials", "seed"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert_eq!(r["seed"], 42);
    }
    let c = crs(&[
        "estimate",
        "--scheme",
        "alg4",
        "--instance",
        "path3:0.1",
        "--trials",
        "20000",
        "--seed",
        "43",
    ]);
    assert_ne!(records(&c)[..3], ra[..3]);
}

#[test]
fn default_seed_comes_from_environment() {
    let base = [
        "estimate",
        "--scheme",
        "alg1",
        "--instance",
        "knn:3,1",
        "--trials",
        "5000",
    ];
    let with_env = Command::new(env!("CARGO_BIN_EXE_crs"))
        .args(base)
        .env("CRS_DEFAULT_SEED", "7")
        .output()
        .unwrap();
    let mut explicit: Vec<&str> = base.to_vec();
    explicit.extend(["--seed", "7"]);
    assert_eq!(records(&with_env), records(&crs(&explicit)));
}

#[test]
fn results_do_not_depend_on_jobs() {
    let base = [
        "estimate",
        "--scheme",
        "alg6",
        "--instance",
        "randgen:6,0.6,1,3",
        "--trials",
        "30000",
    ];
    let mut one = base.to_vec();
    one.extend(["--jobs", "1"]);
    let mut four = base.to_vec();
    four.extend(["--jobs", "4"]);
    assert_eq!(records(&crs(&one)), records(&crs(&four)));
}

#[test]
fn exit_codes() {
    assert_eq!(crs(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(crs(&["beta", "--nope"]).status.code(), Some(64));
    assert_eq!(
        crs(&["estimate", "--scheme", "alg9", "--instance", "knn:3,1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(crs(&["beta", "--b=-1"]).status.code(), Some(1));
    // Bipartite-only scheme on a triangle-bearing instance.
    let dir = tempfile::tempdir().unwrap();
    let tri = dir.path().join("tri.json");
    std::fs::write(
        &tri,
        r#"{"vertices":3,"edges":[{"id":0,"u":0,"v":1,"x":0.3},{"id":1,"u":1,"v":2,"x":0.3},{"id":2,"u":0,"v":2,"x":0.3}]}"#,
    )
    .unwrap();
    let o = crs(&[
        "estimate",
        "--scheme",
        "ex2.2",
        "--graph",
        tri.to_str().unwrap(),
        "--trials",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = crs(&[
        "estimate",
        "--scheme",
        "alg4",
        "--graph",
        tri.to_str().unwrap(),
        "--estimator",
        "exact",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csv_outputs_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("path3.json");
    let o = crs(&[
        "generate",
        "--instance",
        "path3:0.1",
        "--out",
        inst.to_str().unwrap(),
    ]);
    assert!(o.status.success());

    let table = dir.path().join("r.csv");
    let o = crs(&[
        "estimate",
        "--scheme",
        "ex4.1",
        "--graph",
        inst.to_str().unwrap(),
        "--estimator",
        "exact",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,instance,edge,mean,ci_low,ci_high,trials,seed"
    );
    let middle: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    assert!((middle[3].parse::<f64>().unwrap() - 0.37).abs() < 1e-12);

    let checks = dir.path().join("verify.csv");
    let o = crs(&[
        "verify",
        "--graph",
        inst.to_str().unwrap(),
        "--max-edges",
        "8",
        "--trials",
        "5000",
        "--out",
        checks.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&checks).unwrap();
    assert!(text.starts_with("check,scheme,status,detail"));
    assert!(!text.lines().any(|l| l.contains(",fail,")));

    let marg = dir.path().join("y.json");
    std::fs::write(&marg, r#"["1/2", "1/2", "1/2"]"#).unwrap();
    let o = crs(&[
        "decompose",
        "--graph",
        inst.to_str().unwrap(),
        "--marginals",
        marg.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("weight,edges"));
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn verify_rejects_large_instances() {
    let o = crs(&["verify", "--instance", "knn:3,1", "--max-edges", "8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_reports_a_record() {
    let o = crs(&[
        "pipeline",
        "--instance",
        "randbip:4,0.7,1,5",
        "--function",
        "modular",
        "--steps",
        "10",
        "--trials",
        "2000",
        "--seed",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = records(&o);
    assert_eq!(
        recs,
        records(&crs(&[
            "pipeline",
            "--instance",
            "randbip:4,0.7,1,5",
            "--function",
            "modular",
            "--steps",
            "10",
            "--trials",
            "2000",
            "--seed",
            "3",
        ]))
    );
}
