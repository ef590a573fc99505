//! Command-line driver: single runs, queries, oracle cross-checks and the
//! scenario corpus.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use aspmtqs::model::{Formula, Program};
use aspmtqs::numeric::format_significant;
use aspmtqs::oracle::{self, FiniteInterpretation};
use aspmtqs::parser::ModelValue;
use aspmtqs::pipeline::{self, Compiled, Entailment, PipelineError, RunError, Solved};
use aspmtqs::smt::{SolverConfig, SpatialModel, Status};
use aspmtqs::transform;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Entail(String),
    OracleCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Human,
    Structured,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: PathBuf,
    pub solver: String,
    pub solver_args: Vec<String>,
    pub timeout: Duration,
    pub mode: Mode,
    pub dump_ground: bool,
    pub dump_completion: bool,
    pub dump_smt: Option<PathBuf>,
    pub format: Format,
    /// Report choice atoms true in every stable model.
    pub abduce: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, solver: &str) -> Self {
        RunConfig {
            input: input.into(),
            solver: solver.into(),
            solver_args: aspmtqs::smt::default_solver_args(solver),
            timeout: Duration::from_secs(60),
            mode: Mode::Solve,
            dump_ground: false,
            dump_completion: false,
            dump_smt: None,
            format: Format::Human,
            abduce: false,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.timeout.is_zero() {
            return Err("timeout must be positive".into());
        }
        Ok(())
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig { solver: self.solver.clone(), args: self.solver_args.clone(), timeout: self.timeout }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
    Entailed,
    NotEntailed,
    EntailmentUnknown,
    OracleAgrees,
    OracleDisagrees,
    Error,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Sat | Verdict::NotEntailed => 10,
            Verdict::Unsat | Verdict::Entailed => 20,
            Verdict::Unknown | Verdict::EntailmentUnknown => 30,
            Verdict::OracleAgrees => 0,
            Verdict::OracleDisagrees => 40,
            Verdict::Error => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Unknown => "UNKNOWN",
            Verdict::Entailed => "ENTAILED",
            Verdict::NotEntailed => "NOT ENTAILED",
            Verdict::EntailmentUnknown => "UNKNOWN",
            Verdict::OracleAgrees => "ORACLE AGREES",
            Verdict::OracleDisagrees => "ORACLE DISAGREES",
            Verdict::Error => "ERROR",
        }
    }
}

fn status_verdict(s: Status) -> Verdict {
    match s {
        Status::Sat => Verdict::Sat,
        Status::Unsat => Verdict::Unsat,
        Status::Unknown => Verdict::Unknown,
    }
}

fn seconds<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// Phase durations, serialized as seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Timings {
    #[serde(serialize_with = "seconds")]
    pub parse: Duration,
    #[serde(serialize_with = "seconds")]
    pub transform: Duration,
    #[serde(serialize_with = "seconds")]
    pub emit: Duration,
    #[serde(serialize_with = "seconds")]
    pub solve: Duration,
    #[serde(serialize_with = "seconds")]
    pub total: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub stable_models: Vec<String>,
    pub completion_models: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValueReport {
    /// Six significant digits.
    pub value: String,
    /// As printed by the solver.
    pub raw: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObjectReport {
    pub object: String,
    pub kind: String,
    pub step: Option<i64>,
    pub values: Vec<(String, ValueReport)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelReport {
    pub objects: Vec<ObjectReport>,
    pub atoms: Vec<(String, bool)>,
    pub relations: Vec<(String, bool)>,
    pub functions: Vec<(String, String)>,
    pub reals: Vec<(String, ValueReport)>,
}

fn value_report(v: &ModelValue) -> ValueReport {
    let value = match v.as_rational() {
        Some(q) => format_significant(&q, 6),
        None => v.to_string(),
    };
    ValueReport { value, raw: v.to_string() }
}

impl ModelReport {
    pub fn from_model(m: &SpatialModel) -> Self {
        ModelReport {
            objects: m
                .objects
                .iter()
                .map(|o| ObjectReport {
                    object: o.object.clone(),
                    kind: o.kind.to_string(),
                    step: o.step,
                    values: o.values.iter().map(|(s, v)| (s.clone(), value_report(v))).collect(),
                })
                .collect(),
            atoms: m.atoms.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            relations: m.relations.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            functions: m.functions.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            reals: m.reals.iter().map(|(k, v)| (k.clone(), value_report(v))).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub input: String,
    pub verdict: Verdict,
    pub model: Option<ModelReport>,
    pub timings: Timings,
    pub timed_out: bool,
    pub diagnostics: Vec<String>,
    pub ground: Option<String>,
    pub completion: Option<String>,
    pub abduced: Option<Vec<String>>,
    pub oracle: Option<OracleReport>,
    #[serde(skip)]
    pub spatial_model: Option<SpatialModel>,
}

impl RunReport {
    fn new(input: &Path) -> Self {
        RunReport {
            input: input.display().to_string(),
            verdict: Verdict::Error,
            model: None,
            timings: Timings::default(),
            timed_out: false,
            diagnostics: Vec::new(),
            ground: None,
            completion: None,
            abduced: None,
            oracle: None,
            spatial_model: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.render_human(),
            Format::Structured => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
        }
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        if let Some(g) = &self.ground {
            writeln!(out, "% ground program\n{g}").unwrap();
        }
        if let Some(c) = &self.completion {
            writeln!(out, "% completion\n{c}").unwrap();
        }
        for d in &self.diagnostics {
            writeln!(out, "{d}").unwrap();
        }
        let mut label = self.verdict.label().to_string();
        if self.timed_out {
            label.push_str(" (timeout)");
        }
        writeln!(out, "{label}").unwrap();
        if let Some(m) = &self.model {
            if self.verdict == Verdict::NotEntailed {
                writeln!(out, "Countermodel:").unwrap();
            }
            for o in &m.objects {
                let name = match o.step {
                    Some(s) => format!("{}@{s}", o.object),
                    None => o.object.clone(),
                };
                let vals: Vec<String> = o.values.iter().map(|(s, v)| format!("{s} = {}", v.value)).collect();
                writeln!(out, "  {name} ({}): {}", o.kind, vals.join(", ")).unwrap();
            }
            let true_atoms: Vec<&str> = m.atoms.iter().filter(|(_, v)| *v).map(|(k, _)| k.as_str()).collect();
            if !true_atoms.is_empty() {
                writeln!(out, "  true: {}", true_atoms.join(" ")).unwrap();
            }
            let rels: Vec<&str> = m.relations.iter().filter(|(_, v)| *v).map(|(k, _)| k.as_str()).collect();
            if !rels.is_empty() {
                writeln!(out, "  relations: {}", rels.join(" ")).unwrap();
            }
            for (k, v) in &m.functions {
                writeln!(out, "  {k} = {v}").unwrap();
            }
            for (k, v) in &m.reals {
                writeln!(out, "  {k} = {}", v.value).unwrap();
            }
        }
        if let Some(a) = &self.abduced {
            writeln!(out, "Abduced: {}", if a.is_empty() { "none".to_string() } else { a.join(" ") }).unwrap();
        }
        if let Some(o) = &self.oracle {
            writeln!(out, "Stable models ({}):", o.stable_models.len()).unwrap();
            o.stable_models.iter().for_each(|m| writeln!(out, "  {m}").unwrap());
            writeln!(out, "Completion models ({}):", o.completion_models.len()).unwrap();
            o.completion_models.iter().for_each(|m| writeln!(out, "  {m}").unwrap());
        }
        let t = &self.timings;
        writeln!(
            out,
            "Time: parse {:.3}s, transform {:.3}s, emit {:.3}s, solve {:.3}s, total {:.3}s",
            t.parse.as_secs_f64(),
            t.transform.as_secs_f64(),
            t.emit.as_secs_f64(),
            t.solve.as_secs_f64(),
            t.total.as_secs_f64()
        )
        .unwrap();
        out
    }

    fn fail(&mut self, e: impl ToString) {
        self.verdict = Verdict::Error;
        self.diagnostics.push(e.to_string());
    }

    fn record(&mut self, solved: &Solved) {
        self.timings.transform += solved.compiled.transform_time;
        self.timings.emit += solved.compiled.emit_time;
        self.timings.solve += solved.verdict.elapsed;
        self.timed_out |= solved.verdict.timed_out;
        if let Some(u) = &solved.unsound {
            self.diagnostics.push(format!("warning: unsound model: {u}"));
        }
    }
}

/// Ground choice-rule heads: the candidate actions for abduction.
pub fn choice_atoms(program: &Program) -> Result<Vec<Formula>, PipelineError> {
    let mut choices = program.clone();
    choices.rules.retain(|r| r.choice);
    choices.rules.iter_mut().for_each(|r| r.choice = false);
    let (_, ground) = pipeline::prepare(&choices)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for r in &ground.rules {
        if r.head.is_atomic() && seen.insert(r.head.to_string()) {
            out.push(r.head.clone());
        }
    }
    out.sort_by_key(|f| f.to_string());
    Ok(out)
}

/// Choice atoms entailed by the program, one entailment query each.
pub fn abduce(program: &Program, config: &SolverConfig, report: &mut RunReport) -> Result<Vec<String>, RunError> {
    let mut found = Vec::new();
    for atom in choice_atoms(program)? {
        let (e, solved) = pipeline::check_entailed(program, &atom, config)?;
        report.record(&solved);
        if e == Entailment::Entailed {
            found.push(atom.to_string().replace(' ', ""));
        }
    }
    Ok(found)
}

fn oracle_check(program: &Program, report: &mut RunReport) -> Result<(), String> {
    let start = Instant::now();
    let (_, ground) = pipeline::prepare(program).map_err(|e| e.to_string())?;
    let t = transform::is_tight(&transform::dependency_graph(&ground));
    if !t.tight {
        let cycle: Vec<String> = t.cycle.unwrap_or_default().iter().map(|k| k.to_string()).collect();
        return Err(format!("not tight: positive dependency cycle {}", cycle.join(" -> ")));
    }
    let completed = transform::clark_completion(&ground);
    report.timings.transform = start.elapsed();
    let start = Instant::now();
    let stable = oracle::enumerate_stable_models(&ground, oracle::DEFAULT_BOUND).map_err(|e| e.to_string())?;
    let classical = oracle::enumerate_completion_models(&completed, oracle::DEFAULT_BOUND).map_err(|e| e.to_string())?;
    report.timings.solve = start.elapsed();
    let render = |ms: &[FiniteInterpretation]| ms.iter().map(|m| m.to_string()).collect::<Vec<_>>();
    report.verdict = if stable == classical { Verdict::OracleAgrees } else { Verdict::OracleDisagrees };
    report.oracle = Some(OracleReport { stable_models: render(&stable), completion_models: render(&classical) });
    Ok(())
}

fn dump(report: &mut RunReport, config: &RunConfig, compiled: &Compiled) -> Result<(), String> {
    if config.dump_ground {
        report.ground = Some(compiled.ground.to_string());
    }
    if config.dump_completion {
        report.completion = Some(compiled.completed.to_string());
    }
    if let Some(path) = &config.dump_smt {
        std::fs::write(path, compiled.instance.text()).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

/// Run one program end to end.
pub fn run(config: &RunConfig) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new(&config.input);
    run_inner(config, &mut report);
    report.timings.total = start.elapsed().max(report.timings.solve);
    report
}

fn run_inner(config: &RunConfig, report: &mut RunReport) {
    if let Err(e) = config.check() {
        return report.fail(e);
    }
    let source = match std::fs::read_to_string(&config.input) {
        Ok(s) => s,
        Err(e) => return report.fail(format!("cannot read {}: {e}", config.input.display())),
    };
    let t = Instant::now();
    let program = match pipeline::parse(&source) {
        Ok(p) => p,
        Err(e) => return report.fail(e),
    };
    report.timings.parse = t.elapsed();
    if config.mode == Mode::OracleCheck {
        if let Err(e) = oracle_check(&program, report) {
            report.fail(e);
        }
        return;
    }
    let solver = config.solver_config();
    let target = match &config.mode {
        Mode::Entail(q) => match pipeline::parse_query(q, &program) {
            Ok(f) => pipeline::with_constraint(&program, f),
            Err(e) => return report.fail(e),
        },
        _ => program.clone(),
    };
    let compiled = match pipeline::compile(&target) {
        Ok(c) => c,
        Err(e) => return report.fail(e),
    };
    if let Err(e) = dump(report, config, &compiled) {
        return report.fail(e);
    }
    let solved = match pipeline::solve_compiled(compiled, &solver) {
        Ok(s) => s,
        Err(e) => return report.fail(e),
    };
    report.record(&solved);
    let status = solved.verdict.status;
    report.verdict = match &config.mode {
        Mode::Entail(_) => match status {
            Status::Unsat => Verdict::Entailed,
            Status::Sat => Verdict::NotEntailed,
            Status::Unknown => Verdict::EntailmentUnknown,
        },
        _ => status_verdict(status),
    };
    if let Some(m) = &solved.verdict.model {
        report.model = Some(ModelReport::from_model(m));
        report.spatial_model = Some(m.clone());
    }
    if config.abduce && config.mode == Mode::Solve && status == Status::Sat {
        match abduce(&program, &solver, report) {
            Ok(a) => report.abduced = Some(a),
            Err(e) => report.diagnostics.push(format!("abduction failed: {e}")),
        }
    }
}

// ---------------------------------------------------------------------------
// Corpus

/// Contents of a `<name>.expected` file next to `<name>.aspmtqs`.
#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    /// `sat`, `unsat` or `unknown`.
    pub verdict: String,
    #[serde(default)]
    pub entailed: Vec<String>,
    #[serde(default)]
    pub not_entailed: Vec<String>,
    /// Queries satisfied by some stable model.
    #[serde(default)]
    pub consistent: Vec<String>,
    /// Queries satisfied by no stable model.
    #[serde(default)]
    pub inconsistent: Vec<String>,
    /// Relation atoms true in the returned model.
    #[serde(default)]
    pub relations_true: Vec<String>,
    #[serde(default)]
    pub atoms_true: Vec<String>,
    pub abduced: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusRow {
    pub file: String,
    pub expected: String,
    pub actual: String,
    #[serde(serialize_with = "seconds")]
    pub elapsed: Duration,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorpusSummary {
    pub rows: Vec<CorpusRow>,
    pub skipped: Vec<String>,
}

impl CorpusSummary {
    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.rows.len() - self.passed()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed() == 0 {
            0
        } else {
            2
        }
    }

    pub fn render(&self, format: Format) -> String {
        if format == Format::Structured {
            return serde_json::to_string_pretty(self).expect("summary serializes") + "\n";
        }
        let mut out = String::new();
        for s in &self.skipped {
            writeln!(out, "warning: {s}").unwrap();
        }
        let width = self.rows.iter().map(|r| r.file.len()).max().unwrap_or(4).max(4);
        writeln!(out, "{:width$}  {:8}  {:8}  {:>7}  {:>9}  result", "file", "expected", "actual", "checks", "time").unwrap();
        for r in &self.rows {
            let ok = r.checks.iter().filter(|c| c.pass).count();
            writeln!(
                out,
                "{:width$}  {:8}  {:8}  {:>7}  {:>8.3}s  {}",
                r.file,
                r.expected,
                r.actual,
                format!("{ok}/{}", r.checks.len()),
                r.elapsed.as_secs_f64(),
                if r.pass { "pass" } else { "FAIL" }
            )
            .unwrap();
            for c in r.checks.iter().filter(|c| !c.pass) {
                writeln!(out, "    failed {}: {}", c.check, c.detail).unwrap();
            }
            for d in &r.diagnostics {
                writeln!(out, "    {d}").unwrap();
            }
        }
        writeln!(out, "{} passed, {} failed, {} skipped", self.passed(), self.failed(), self.skipped.len()).unwrap();
        out
    }
}

fn outcome(status: Status) -> &'static str {
    match status {
        Status::Sat => "sat",
        Status::Unsat => "unsat",
        Status::Unknown => "unknown",
    }
}

fn soundness(solved: &Solved, what: &str, checks: &mut Vec<CheckResult>) {
    if solved.verdict.model.is_some() {
        checks.push(CheckResult {
            check: format!("sound model ({what})"),
            pass: solved.unsound.is_none(),
            detail: solved.unsound.as_ref().map(|u| u.to_string()).unwrap_or_default(),
        });
    }
}

/// Evaluate one corpus file against its expectation.
pub fn check_file(path: &Path, expected: &Expectation, solver: &SolverConfig) -> CorpusRow {
    let start = Instant::now();
    let mut row = CorpusRow {
        file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        expected: expected.verdict.clone(),
        actual: "error".into(),
        elapsed: Duration::ZERO,
        checks: Vec::new(),
        pass: false,
        diagnostics: Vec::new(),
    };
    if let Err(e) = check_file_inner(path, expected, solver, &mut row) {
        row.diagnostics.push(e);
    }
    row.elapsed = start.elapsed();
    row.pass = row.actual == row.expected && row.checks.iter().all(|c| c.pass) && row.diagnostics.is_empty();
    row
}

fn check_file_inner(path: &Path, expected: &Expectation, solver: &SolverConfig, row: &mut CorpusRow) -> Result<(), String> {
    let source = std::fs::read_to_string(path).map_err(|e| format!("cannot read: {e}"))?;
    let program = pipeline::parse(&source).map_err(|e| e.to_string())?;
    let solved = pipeline::solve_program(&program, solver).map_err(|e| e.to_string())?;
    row.actual = outcome(solved.verdict.status).into();
    soundness(&solved, "base", &mut row.checks);
    if let Some(m) = &solved.verdict.model {
        for (list, map, what) in [(&expected.relations_true, &m.relations, "relation"), (&expected.atoms_true, &m.atoms, "atom")] {
            for a in list {
                let v = map.get(a).copied();
                row.checks.push(CheckResult {
                    check: format!("{what} {a} true"),
                    pass: v == Some(true),
                    detail: format!("model has {v:?}"),
                });
            }
        }
    }
    let query = |q: &str| pipeline::parse_query(q, &program).map_err(|e| e.to_string());
    for (list, want) in [(&expected.entailed, Entailment::Entailed), (&expected.not_entailed, Entailment::NotEntailed)] {
        for q in list {
            let (e, s) = pipeline::check_entailed(&program, &query(q)?, solver).map_err(|e| e.to_string())?;
            soundness(&s, q, &mut row.checks);
            let label = if want == Entailment::Entailed { "entails" } else { "does not entail" };
            row.checks.push(CheckResult { check: format!("{label} {q}"), pass: e == want, detail: format!("got {e:?}") });
        }
    }
    for (list, want) in [(&expected.consistent, Status::Sat), (&expected.inconsistent, Status::Unsat)] {
        for q in list {
            let (st, s) = pipeline::check_consistent(&program, &query(q)?, solver).map_err(|e| e.to_string())?;
            soundness(&s, q, &mut row.checks);
            let label = if want == Status::Sat { "consistent with" } else { "inconsistent with" };
            row.checks.push(CheckResult { check: format!("{label} {q}"), pass: st == want, detail: format!("got {}", outcome(st)) });
        }
    }
    if let Some(want) = &expected.abduced {
        let mut scratch = RunReport::new(path);
        let mut got = abduce(&program, solver, &mut scratch).map_err(|e| e.to_string())?;
        got.sort();
        let mut want = want.clone();
        want.sort();
        row.checks.push(CheckResult { check: "abduced actions".into(), pass: got == want, detail: format!("got {got:?}") });
    }
    Ok(())
}

/// Every `.aspmtqs` file in `dir` with its sidecar, checked on up to
/// `jobs` threads. Rows come back in file-name order.
pub fn run_corpus(dir: &Path, solver: &SolverConfig, jobs: usize) -> Result<CorpusSummary, String> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("cannot read {}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "aspmtqs"))
        .collect();
    files.sort();
    let mut summary = CorpusSummary::default();
    let mut work = Vec::new();
    for f in files {
        let sidecar = f.with_extension("expected");
        match std::fs::read_to_string(&sidecar) {
            Err(_) => summary.skipped.push(format!("{}: no {} sidecar, skipped", f.display(), sidecar.display())),
            Ok(text) => match toml::from_str::<Expectation>(&text) {
                Ok(e) => work.push((f, e)),
                Err(e) => summary.skipped.push(format!("{}: bad sidecar: {e}", sidecar.display())),
            },
        }
    }
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<CorpusRow>>> = Mutex::new(vec![None; work.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, work.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((f, e)) = work.get(i) else { break };
                let row = check_file(f, e, solver);
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });
    summary.rows = rows.into_inner().unwrap().into_iter().flatten().collect();
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_depend_on_verdict_only() {
        assert_eq!(Verdict::Sat.exit_code(), 10);
        assert_eq!(Verdict::Unsat.exit_code(), 20);
        assert_eq!(Verdict::Unknown.exit_code(), 30);
        assert_eq!(Verdict::Error.exit_code(), 1);
        assert_eq!(Verdict::Entailed.exit_code(), 20);
    }

    #[test]
    fn sidecar_parses() {
        let e: Expectation = toml::from_str("verdict = \"sat\"\nentailed = [\"p\"]\n").unwrap();
        assert_eq!(e.entailed, vec!["p".to_string()]);
        assert!(toml::from_str::<Expectation>("verdict = \"sat\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn zero_timeout_is_rejected() {
        let mut c = RunConfig::new("x.aspmtqs", "z3");
        c.timeout = Duration::ZERO;
        assert!(c.check().is_err());
    }
}
