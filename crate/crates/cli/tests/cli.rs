use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use rigidlab::constructions::tight_single_block_instance;
use rigidlab_cli::format::GraphFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rigidlab"))
}

fn run(args: &[&str]) -> (i32, Output) {
    let out = bin().args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), out)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn verdict(report: &Value, check: &str) -> String {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == check)
        .map(|c| c["verdict"].as_str().unwrap().to_string())
        .unwrap_or_default()
}

fn fixture(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let (code, _) = run(&["gen", "fixture", name, "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn four_cycle_passes_everything() {
    let dir = TempDir::new().unwrap();
    let f = fixture(dir.path(), "four-cycle");
    let (code, out) = run(&["check", p(&f), "--oracle"]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["verdict"], "pass");
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["verdict"], "pass", "{}", c["check"]);
    }
    let rank = r["checks"].as_array().unwrap().iter().find(|c| c["check"] == "rank").unwrap();
    assert_eq!(rank["detail"]["verdict"], "isostatic");
    assert_eq!(r["config"]["seed"], 0);
    assert!(r["input_digest"].as_str().unwrap().len() == 64);
}

#[test]
fn chorded_fixture_reports_violating_cycle() {
    let dir = TempDir::new().unwrap();
    let f = fixture(dir.path(), "chorded-hexagon");
    let (code, out) = run(&["check", p(&f), "--checks", "girth"]);
    assert_eq!(code, 2);
    let r = json(&out);
    assert_eq!(r["checks"].as_array().unwrap().len(), 1);
    let girth = &r["checks"][0];
    assert_eq!(girth["verdict"], "fail");
    assert!(girth["detail"]["violating"]["cycle"].as_array().is_some());
}

#[test]
fn counterexample_is_out_of_scope() {
    let dir = TempDir::new().unwrap();
    let f = fixture(dir.path(), "counterexample");
    let (code, out) = run(&["check", p(&f)]);
    assert_eq!(code, 2);
    let r = json(&out);
    assert_eq!(r["scope"], "outside theorem scope (m,n)=(2,2)");
    for c in ["maxwell", "sparsity", "girth", "separation"] {
        assert_eq!(verdict(&r, c), "pass", "{c}");
    }
    assert_eq!(verdict(&r, "rank"), "fail");
    assert!(r["faults"].as_array().unwrap().is_empty());
}

#[test]
fn multigraph_double_disc_is_reported_verbatim() {
    let dir = TempDir::new().unwrap();
    let f = fixture(dir.path(), "double-banana");
    let (_, out) = run(&["check", p(&f), "--checks", "maxwell"]);
    let r = json(&out);
    let dd = &r["result"]["double_disc"];
    assert_eq!(dd["simple"], false);
    assert!(dd["error"].as_str().unwrap().contains("not simple"));
}

#[test]
fn gen_is_deterministic_and_spheres_pass() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let (code, _) = run(&["gen", "sphere", "--vertices", "20", "--seed", "7", "--out", p(path)]);
        assert_eq!(code, 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let (code, out) = run(&["check", p(&a)]);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn gen_facegraph_has_requested_type() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("fg.json");
    let (code, _) = run(&["gen", "facegraph", "--blocks", "1", "--holes", "3", "--vertices", "14", "--out", p(&f)]);
    assert_eq!(code, 0);
    let (_, out) = run(&["check", p(&f), "--checks", "maxwell"]);
    assert_eq!(json(&out)["face_type"], serde_json::json!([1, 3]));
}

#[test]
fn block_hole_files_use_their_blocks() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("bh.json");
    let (code, _) = run(&["gen", "block-hole", "--blocks", "1", "--holes", "2", "--vertices", "12", "--out", p(&f)]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&f).unwrap();
    assert!(GraphFile::parse(&text).unwrap().load().unwrap().block_hole.is_some());
    let (code, out) = run(&["check", p(&f)]);
    assert_ne!(code, 4, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["checks"][0]["detail"]["explicit_blocks"], true);
}

#[test]
fn invalid_inputs_exit_3() {
    let dir = TempDir::new().unwrap();
    let garbage = dir.path().join("g.json");
    fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(run(&["check", p(&garbage)]).0, 3);
    let f = fixture(dir.path(), "four-cycle");
    let text = fs::read_to_string(&f).unwrap().replace("rigidlab/1", "rigidlab/9");
    fs::write(&garbage, text).unwrap();
    let (code, out) = run(&["check", p(&garbage)]);
    assert_eq!(code, 3);
    assert!(json(&out)["error"].as_str().unwrap().contains("unsupported format"));
    assert_eq!(run(&["check", p(&dir.path().join("missing.json"))]).0, 3);
    assert_eq!(run(&["check"]).0, 3);
    assert_eq!(run(&["gen", "fixture", "nope"]).0, 3);
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = fixture(dir.path(), "pentagon-two-holes");
    let a = run(&["check", p(&f), "--seed", "5", "--trials", "2"]).1.stdout;
    let b = run(&["check", p(&f), "--seed", "5", "--trials", "2"]).1.stdout;
    assert_eq!(a, b);
    let r: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(r["config"]["seed"], 5);
    assert_eq!(r["config"]["trials"], 2);
    assert!(r.get("timing_ms").is_none());
    let (_, timed) = run(&["check", p(&f), "--timing"]);
    assert!(json(&timed)["timing_ms"].is_object());
}

#[test]
fn reduce_then_replay_round_trips() {
    let dir = TempDir::new().unwrap();
    let mut done = 0;
    for k in 0..6 {
        let Some(fg) = tight_single_block_instance(21, k, 14) else { continue };
        let input = dir.path().join(format!("in{k}.json"));
        let cert = dir.path().join(format!("in{k}.cert"));
        for g in [fg.clone(), fg.transpose_labels()] {
            fs::write(&input, GraphFile::from_face_graph(&g).to_pretty()).unwrap();
            let (code, _) = run(&["reduce", p(&input), "--cert", p(&cert)]);
            assert_eq!(code, 0);
            let (code, out) = run(&["replay", p(&input), "--cert", p(&cert)]);
            assert_eq!(code, 0);
            let r = json(&out);
            assert_eq!(r["result"]["accepted"], true);
            assert_eq!(r["result"]["isomorphic_to_dagger"], true);
        }
        done += 1;
    }
    assert!(done >= 3);
}

#[test]
fn sphere_certificate_is_a_single_contraction_chain() {
    let dir = TempDir::new().unwrap();
    let s = dir.path().join("s.json");
    let cert = dir.path().join("s.cert");
    run(&["gen", "sphere", "--vertices", "15", "--seed", "3", "--out", p(&s)]);
    let (code, _) = run(&["certify", p(&s), "--cert", p(&cert)]);
    assert_eq!(code, 0);
    let c: Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["format"], "rigidlab-cert/1");
    assert!(c["steps"].as_array().unwrap().is_empty());
    assert_eq!(c["leaves"][0]["gluck"].as_array().unwrap().len(), 12);
}

#[test]
fn tampered_certificate_rejected_at_that_step() {
    let dir = TempDir::new().unwrap();
    let f = fixture(dir.path(), "pentagon-two-holes");
    let cert = dir.path().join("p.cert");
    assert_eq!(run(&["reduce", p(&f), "--cert", p(&cert)]).0, 0);
    let mut c: Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    let steps = c["steps"].as_array_mut().unwrap();
    let (k, step) = steps.iter_mut().enumerate().find(|(_, s)| s.get("edge").is_some()).expect("contraction step");
    let node = step["node"].clone();
    let v = step["edge"][1].as_u64().unwrap();
    step["edge"][1] = Value::from(v + 1);
    let bad = dir.path().join("bad.cert");
    fs::write(&bad, serde_json::to_string(&c).unwrap()).unwrap();
    let (code, out) = run(&["replay", p(&f), "--cert", p(&bad)]);
    assert_eq!(code, 2, "step {k}");
    let r = json(&out);
    assert_eq!(r["result"]["accepted"], false);
    assert_eq!(r["result"]["rejected_at"], node);

    let wrong_root = fixture(dir.path(), "four-cycle");
    let (code, out) = run(&["replay", p(&wrong_root), "--cert", p(&cert)]);
    assert_eq!(code, 2);
    assert!(json(&out)["result"]["reason"].as_str().unwrap().contains("root digest"));
}

#[test]
fn refused_reduction_carries_sparsity_witness() {
    let dir = TempDir::new().unwrap();
    let f = fixture(dir.path(), "chorded-hexagon");
    let (code, out) = run(&["reduce", p(&f)]);
    assert_eq!(code, 2);
    let r = json(&out);
    assert_eq!(r["result"]["refused"], true);
    assert!(r["result"]["sparsity"]["witness"]["vertices"].is_array());
    let cx = fixture(dir.path(), "counterexample");
    assert_eq!(run(&["reduce", p(&cx)]).0, 3);
}

#[test]
fn single_block_mining_finds_nothing() {
    let dir = TempDir::new().unwrap();
    let (code, out) = run(&[
        "mine",
        "--target",
        "counterexample",
        "--blocks",
        "1",
        "--holes",
        "2",
        "--budget",
        "300",
        "--max-vertices",
        "12",
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["result"]["exhausted"], true);
    assert_eq!(r["result"]["examined"], 300);
    assert!(r["result"]["funnel"]["tight"].as_u64().unwrap() > 0);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}
