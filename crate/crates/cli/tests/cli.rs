use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cyclelab(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_cyclelab"))
        .current_dir(dir)
        .env_remove("CYCLELAB_BUDGET")
        .args(args)
        .output()
        .expect("binary runs");
    eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn g_exponent_for_triangles_over_f2() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyclelab(dir.path(), &["exponent", "g", "--k", "3", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("13.239"), "{}", stdout(&o));

    let o = cyclelab(
        dir.path(),
        &["--format", "json", "exponent", "g", "--k", "3", "--p", "2"],
    );
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["g"].as_f64().unwrap() - 13.2393).abs() < 1e-3);
}

#[test]
fn sunflower_to_pmf_pipeline_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("s.json"), r#"{"D":4,"n":2,"vectors":[[0,0],[0,1],[1,0],[1,1]]}"#).unwrap();
    let o = cyclelab(d, &["sunflower", "find", "--in", "s.json", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = cyclelab(
        d,
        &[
            "pmf",
            "transform",
            "--in",
            "s.json",
            "--p",
            "2",
            "--k",
            "3",
            "--out",
            "p.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let pmf = json(&d.join("p.json"));
    assert_eq!(pmf["tuples"].as_array().unwrap().len(), 4);
    assert_eq!(pmf["n"], 4);

    let o = cyclelab(d, &["pmf", "verify", "--in", "p.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("ok"));

    let o = cyclelab(d, &["tester", "from-pmf", "--in", "p.json", "--out", "i.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = cyclelab(d, &["--format", "json", "tester", "count", "--in", "i.json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cycles"], 4);
}

#[test]
fn violations_exit_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("s.json"), r#"{"D":4,"n":1,"vectors":[[0],[1],[2]]}"#).unwrap();
    let o = cyclelab(d, &["--format", "json", "sunflower", "find", "--in", "s.json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ok"], false);
    assert_eq!(v["witness"], serde_json::json!([[0], [1], [2]]));

    fs::write(d.join("b.json"), r#"{"elements":[1,2,3]}"#).unwrap();
    let o = cyclelab(d, &["behrend", "verify", "--in", "b.json", "--r", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[1, 3, 2]"), "{}", stdout(&o));

    // Transform precondition failure is a violation too.
    let o = cyclelab(d, &["pmf", "transform", "--in", "s.json", "--p", "2", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_and_budget_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(cyclelab(d, &["exponent", "g", "--k", "3"]).status.code(), Some(2));
    assert_eq!(
        cyclelab(d, &["gadget", "verify", "--in", "missing.json"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cyclelab(d, &["gadget", "construct", "--p", "4", "--k", "2"])
            .status
            .code(),
        Some(2)
    );

    let o = cyclelab(d, &["behrend", "build", "--r", "2", "--m", "200", "--out", "b.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = cyclelab(d, &["--budget", "10", "behrend", "verify", "--in", "b.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn manifest_records_digests_and_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = cyclelab(
        d,
        &[
            "--seed", "7", "cw", "build", "--k", "3", "--n", "1", "--c-k", "1", "--out", "cw.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let m = json(&d.join("cw.json.manifest.json"));
    assert_eq!(m["seed"], 7);
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["outputs"][0]["path"], "cw.json");
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["parameters"]["command"]["Cw"]["Build"]["cfg"]["c_k"], 1.0);

    // Same seed, same bytes.
    let first = fs::read(d.join("cw.json")).unwrap();
    cyclelab(
        d,
        &[
            "--seed",
            "7",
            "--threads",
            "1",
            "cw",
            "build",
            "--k",
            "3",
            "--n",
            "1",
            "--c-k",
            "1",
            "--out",
            "cw.json",
        ],
    );
    assert_eq!(first, fs::read(d.join("cw.json")).unwrap());

    let o = cyclelab(
        d,
        &["--manifest", "run.json", "cw", "verify", "--in", "cw.json", "--k", "3"],
    );
    assert_eq!(o.status.code(), Some(0));
    let m = json(&d.join("run.json"));
    assert_eq!(m["inputs"][0]["path"], "cw.json");
    assert!(o.stderr.is_empty());
}

#[test]
fn search_checkpoint_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = cyclelab(
        d,
        &[
            "--budget",
            "3",
            "--format",
            "json",
            "sunflower",
            "search",
            "--D",
            "3",
            "--n",
            "2",
            "--checkpoint",
            "ck.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let partial: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(partial["optimal"], false);

    let o = cyclelab(
        d,
        &[
            "--format",
            "json",
            "sunflower",
            "search",
            "--resume",
            "ck.json",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = json(&d.join("r.json"));
    assert_eq!(r["optimal"], true);
    assert_eq!(r["best"]["vectors"].as_array().unwrap().len(), 4);
}

#[test]
fn artifacts_feed_their_consumers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let steps: &[&[&str]] = &[
        &["sunflower", "search", "--D", "4", "--n", "2", "--out", "best.json"],
        &["pmf", "transform", "--in", "best.json", "--p", "2", "--k", "3", "--out", "p.json"],
        &["pmf", "verify", "--in", "p.json"],
        &["pmf", "concat", "--a", "p.json", "--b", "p.json", "--out", "pp.json"],
        &["pmf", "verify", "--in", "pp.json"],
        &["tester", "from-pmf", "--in", "p.json", "--out", "i.json"],
        &["tester", "extend", "--in", "i.json", "--n-target", "5", "--out", "e.json"],
        &["tester", "reduce", "--in", "i.json", "--out", "r.json"],
        &["tester", "count", "--in", "r.json", "--unordered"],
        &["cw", "build", "--k", "3", "--n", "2", "--c-k", "1", "--out", "cw.json"],
        &["cw", "verify", "--in", "cw.json"],
        &["pmf", "transform", "--in", "cw.json", "--mode", "balanced", "--out", "b.json"],
        &["pmf", "verify", "--in", "b.json"],
        &["behrend", "build", "--r", "3", "--m", "500", "--out", "s.json"],
        &["behrend", "verify", "--in", "s.json"],
    ];
    for step in steps {
        let o = cyclelab(d, step);
        assert_eq!(o.status.code(), Some(0), "{step:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    // the reduced function is nonzero on 12 of 64 points; seed 0 finds one
    let zero = cyclelab(d, &["--format", "json", "tester", "zero", "--in", "r.json", "--eps", "0.25"]);
    assert_eq!(zero.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&zero)).unwrap();
    assert_eq!(v["accept"], false);

    let count = cyclelab(d, &["--format", "json", "tester", "count", "--in", "r.json", "--unordered"]);
    let pmf = json(&d.join("p.json"));
    let v: Value = serde_json::from_str(&stdout(&count)).unwrap();
    assert_eq!(v["cycles"].as_u64().unwrap() as usize, pmf["tuples"].as_array().unwrap().len());
}
