use std::os::unix::fs::PermissionsExt;
use std::time::Duration;

use aspmtqs::pipeline::{self, Entailment};
use aspmtqs::smt::{self, SmtError, SolverConfig, Status, Symmetry};

const EXAMPLE1: &str = "objects a, b, c :: circle.\nrccDR(a, b).\nrccDR(b, c).\nrccPP(a, c).\n";

fn z3() -> SolverConfig {
    SolverConfig::new("z3", Duration::from_secs(30))
}

fn status(src: &str) -> Status {
    let solved = pipeline::solve_program(&pipeline::parse(src).unwrap(), &z3()).unwrap();
    assert!(solved.unsound.is_none(), "{:?}", solved.unsound);
    solved.verdict.status
}

fn entails(src: &str, query: &str) -> Entailment {
    let program = pipeline::parse(src).unwrap();
    let q = pipeline::parse_query(query, &program).unwrap();
    pipeline::check_entailed(&program, &q, &z3()).unwrap().0
}

#[test]
fn three_circles_are_satisfiable_with_a_sound_model() {
    let solved = pipeline::solve_program(&pipeline::parse(EXAMPLE1).unwrap(), &z3()).unwrap();
    assert_eq!(solved.verdict.status, Status::Sat);
    let model = solved.verdict.model.as_ref().unwrap();
    smt::check_model(&solved.compiled.instance, model).unwrap();
    for r in ["rccDR(a,b)", "rccDR(b,c)", "rccPP(a,c)"] {
        assert_eq!(model.relations.get(r), Some(&true), "{r} in {:?}", model.relations);
    }
}

#[test]
fn equal_radii_make_the_three_circles_unsatisfiable() {
    assert_eq!(status(&format!("{EXAMPLE1}r(a) = r(b) & r(b) = r(c).\n")), Status::Unsat);
}

#[test]
fn further_facts_keep_an_unsatisfiable_program_unsatisfiable() {
    let base = format!("{EXAMPLE1}r(a) = r(b) & r(b) = r(c).\n");
    assert_eq!(status(&format!("{base}rccDC(a, b).\n")), Status::Unsat);
    assert_eq!(status(&format!("{base}x(a) = 0.\n")), Status::Unsat);
}

#[test]
fn disjoint_base_relations_cannot_both_hold() {
    assert_eq!(status("objects a, b :: circle.\nrccEC(a, b).\nrccNTPP(a, b).\n"), Status::Unsat);
}

#[test]
fn nearer_than_cannot_hold_both_ways() {
    assert_eq!(status("objects a, b, c :: point.\nnearer_than(a, b, c).\nnearer_than(b, a, c).\n"), Status::Unsat);
}

#[test]
fn an_empty_program_entails_no_contact() {
    assert_eq!(entails("objects a, b :: circle.\n", "rccEC(a, b)"), Entailment::NotEntailed);
}

#[test]
fn a_proper_part_of_a_discrete_circle_is_discrete() {
    let src = "objects a, b, c :: circle.\nrccPP(a, b).\nrccDC(b, c).\n";
    assert_eq!(entails(src, "rccDC(a, c)"), Entailment::Entailed);
    assert_eq!(entails(src, "rccEC(a, c)"), Entailment::NotEntailed);
}

#[test]
fn defaults_are_solved_through_the_completion() {
    let src = "objects a, b :: circle.\nconstants touch :: boolean.\n{touch}.\nrccEC(a, b) <- touch.\nrccDC(a, b) <- not touch.\n";
    assert_eq!(entails(src, "rccDC(a, b) | rccEC(a, b)"), Entailment::Entailed);
    assert_eq!(entails(src, "touch"), Entailment::NotEntailed);
    assert_eq!(entails(&format!("{src}<- not touch.\n"), "rccEC(a, b)"), Entailment::Entailed);
}

#[test]
fn emission_is_byte_identical_across_runs() {
    let a = pipeline::compile_source(EXAMPLE1).unwrap().instance.text();
    let b = pipeline::compile_source(EXAMPLE1).unwrap().instance.text();
    assert_eq!(a, b);
    assert!(a.starts_with("(set-logic QF_NRA)"));
    assert!(a.ends_with("(check-sat)\n(get-model)\n"));
}

#[test]
fn symmetry_follows_the_relations_in_use() {
    let sym = |src: &str| pipeline::compile_source(src).unwrap().instance.symmetry;
    assert_eq!(sym(EXAMPLE1), Symmetry::Rigid);
    assert_eq!(sym("objects a, b :: point.\ncdc_ne(a, b).\n"), Symmetry::Translation);
    assert_eq!(sym(&format!("{EXAMPLE1}x(a) = 1.\n")), Symmetry::None);
}

#[test]
fn symmetry_breaking_preserves_satisfiability_of_cardinal_constraints() {
    assert_eq!(status("objects a, b, c :: point.\ncdc_ne(a, b).\ncdc_ne(b, c).\n"), Status::Sat);
    assert_eq!(status("objects a, b, c :: point.\ncdc_ne(a, b).\ncdc_ne(b, c).\ncdc_sw(a, c).\n"), Status::Unsat);
}

fn script(dir: &tempfile::TempDir, body: &str) -> String {
    let path = dir.path().join("fake-solver");
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn slow_solver_times_out_as_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let config = SolverConfig::new(&script(&dir, "sleep 5"), Duration::from_millis(200));
    let compiled = pipeline::compile_source(EXAMPLE1).unwrap();
    let verdict = smt::solve(&compiled.instance, &config).unwrap();
    assert_eq!(verdict.status, Status::Unknown);
    assert!(verdict.timed_out);
    assert!(verdict.elapsed < Duration::from_secs(4));
}

#[test]
fn malformed_solver_output_is_a_protocol_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = SolverConfig::new(&script(&dir, "echo banana"), Duration::from_secs(5));
    let compiled = pipeline::compile_source(EXAMPLE1).unwrap();
    assert!(matches!(smt::solve(&compiled.instance, &config), Err(SmtError::Protocol(_))));
}

#[test]
fn missing_solver_is_a_launch_error() {
    let config = SolverConfig::new("/nonexistent/solver", Duration::from_secs(5));
    let compiled = pipeline::compile_source(EXAMPLE1).unwrap();
    assert!(matches!(smt::solve(&compiled.instance, &config), Err(SmtError::SolverLaunch { .. })));
}
