use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn aspmtqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aspmtqs")).args(args).env_remove("ASPMTQS_SOLVER").output().unwrap()
}

fn text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verdicts_map_to_exit_codes() {
    let sat = aspmtqs(&[corpus("example1.aspmtqs").to_str().unwrap()]);
    assert_eq!(sat.status.code(), Some(10), "{}", text(&sat));
    assert!(text(&sat).contains("SAT"));
    assert!(text(&sat).contains("Time: parse"));
    let unsat = aspmtqs(&[corpus("example1_radius.aspmtqs").to_str().unwrap()]);
    assert_eq!(unsat.status.code(), Some(20), "{}", text(&unsat));
}

#[test]
fn entailment_mode_answers_queries() {
    let growth = corpus("growth.aspmtqs");
    let yes = aspmtqs(&[growth.to_str().unwrap(), "--entails", "rccEC(a,c,1)"]);
    assert_eq!(yes.status.code(), Some(20), "{}", text(&yes));
    let motion = corpus("motion.aspmtqs");
    let no = aspmtqs(&[motion.to_str().unwrap(), "--entails", "rccDC(a,c,1)"]);
    assert_eq!(no.status.code(), Some(10), "{}", text(&no));
}

#[test]
fn structured_output_is_json_with_the_human_fields() {
    let out = aspmtqs(&[corpus("example1.aspmtqs").to_str().unwrap(), "--format", "structured"]);
    assert_eq!(out.status.code(), Some(10));
    let v: serde_json::Value = serde_json::from_str(&text(&out)).unwrap();
    assert_eq!(v["verdict"], "sat");
    for phase in ["parse", "transform", "emit", "solve", "total"] {
        assert!(v["timings"][phase].as_f64().unwrap() >= 0.0, "{phase}");
    }
    assert!(v["timings"]["total"].as_f64() >= v["timings"]["solve"].as_f64());
    let model = &v["model"];
    assert!(model["objects"].as_array().unwrap().len() == 3);
    assert!(model["relations"].as_array().unwrap().iter().any(|r| r[0] == "rccPP(a,c)" && r[1] == true));
}

#[test]
fn relation_catalog_is_listed() {
    let out = aspmtqs(&["--list-relations"]);
    assert_eq!(out.status.code(), Some(0));
    let t = text(&out);
    for name in ["rccEC(circle, circle)", "left_of(point, segment)", "nearer_than(point, point, point)"] {
        assert!(t.contains(name), "{name} missing from\n{t}");
    }
}

#[test]
fn parse_errors_report_stage_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.aspmtqs", "objects a :: circle.\nrccEC(a, .\n");
    let out = aspmtqs(&[&path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("parse error at 2:"), "{}", text(&out));
}

#[test]
fn non_tight_programs_are_rejected_with_a_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "loop.aspmtqs", "constants p :: boolean. q :: boolean.\np <- q.\nq <- p.\n");
    let out = aspmtqs(&[&path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("not tight"), "{}", text(&out));
}

#[test]
fn oracle_check_compares_model_sets() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "choice.aspmtqs", "constants p :: boolean. q :: boolean.\n{p}.\nq <- not p.\n");
    let out = aspmtqs(&[&path, "--oracle-check", "--format", "structured"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let v: serde_json::Value = serde_json::from_str(&text(&out)).unwrap();
    assert_eq!(v["oracle"]["stable_models"], v["oracle"]["completion_models"]);
    assert_eq!(v["oracle"]["stable_models"].as_array().unwrap().len(), 2);
}

#[test]
fn dumps_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let smt = dir.path().join("out.smt2");
    let out = aspmtqs(&[corpus("growth.aspmtqs").to_str().unwrap(), "--dump-ground", "--dump-completion", "--dump-smt", smt.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(10));
    let written = std::fs::read_to_string(&smt).unwrap();
    assert!(written.starts_with("(set-logic "));
    assert!(written.contains("(check-sat)"));
    let t = text(&out);
    assert!(t.contains("% ground program") && t.contains("% completion"), "{t}");
    assert!(t.contains("concentric(a,b,0) <->"), "{t}");
}

#[test]
fn abduction_reports_forced_actions() {
    let out = aspmtqs(&[corpus("abduction.aspmtqs").to_str().unwrap(), "--abduce", "--format", "structured"]);
    assert_eq!(out.status.code(), Some(10), "{}", text(&out));
    let v: serde_json::Value = serde_json::from_str(&text(&out)).unwrap();
    let mut got: Vec<String> = v["abduced"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect();
    got.sort();
    assert_eq!(got, ["move(b,1)", "resize(a,0)"]);
}

#[test]
fn missing_solver_is_an_error() {
    let out = aspmtqs(&[corpus("example1.aspmtqs").to_str().unwrap(), "--solver", "/nonexistent/z3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("cannot run solver"), "{}", text(&out));
}

#[test]
fn nonpositive_timeout_is_rejected() {
    let out = aspmtqs(&[corpus("example1.aspmtqs").to_str().unwrap(), "--timeout", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_corpus_directory_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = aspmtqs(&[dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
}

#[test]
fn corpus_rows_fail_independently_and_missing_sidecars_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let good = std::fs::read_to_string(corpus("example1.aspmtqs")).unwrap();
    write(dir.path(), "a_good.aspmtqs", &good);
    write(dir.path(), "a_good.expected", "verdict = \"sat\"\n");
    write(dir.path(), "b_broken.aspmtqs", "objects a :: circle.\nrccEC(a,\n");
    write(dir.path(), "b_broken.expected", "verdict = \"sat\"\n");
    write(dir.path(), "c_orphan.aspmtqs", &good);
    let out = aspmtqs(&[dir.path().to_str().unwrap(), "--format", "structured", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out));
    let v: serde_json::Value = serde_json::from_str(&text(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["file"], "a_good.aspmtqs");
    assert_eq!(rows[0]["pass"], true);
    assert_eq!(rows[1]["pass"], false);
    assert!(rows[1]["diagnostics"][0].as_str().unwrap().contains("parse error"));
    let skipped = v["skipped"].as_array().unwrap();
    assert_eq!(skipped.len(), 1);
    assert!(skipped[0].as_str().unwrap().contains("c_orphan"));
}

#[test]
fn repeated_runs_give_the_same_verdict() {
    let file = corpus("example2_leftof.aspmtqs");
    let a = aspmtqs(&[file.to_str().unwrap()]);
    let b = aspmtqs(&[file.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(20));
    assert_eq!(a.status.code(), b.status.code());
}
