//! End-to-end compilation: source text to solver instance, and solving.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::*;
use crate::parser::{parse_formula, parse_program, SourceSpan};
use crate::smt::{self, SmtError, SmtInstance, SolverConfig, SolverVerdict, SoundnessError, Status};
use crate::transform::{self, CompletedTheory, DependencyGraph, GroundTheory, TransformError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Validate,
    Preconditions,
    Ground,
    Tightness,
    Emit,
    Solve,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Parse => "parse error",
            Stage::Validate => "invalid program",
            Stage::Preconditions => "unsupported program",
            Stage::Ground => "grounding error",
            Stage::Tightness => "not tight",
            Stage::Emit => "encoding error",
            Stage::Solve => "solver error",
        })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct PipelineError {
    pub stage: Stage,
    pub messages: Vec<String>,
    pub span: Option<SourceSpan>,
    /// Set for tightness failures.
    pub cycle: Option<Vec<transform::GroundKey>>,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.stage)?;
        if let Some(s) = self.span {
            write!(f, " at {}:{}", s.line, s.column)?;
        }
        write!(f, ": {}", self.messages.join("; "))
    }
}

impl PipelineError {
    fn new(stage: Stage, message: impl Into<String>) -> Self {
        PipelineError { stage, messages: vec![message.into()], span: None, cycle: None }
    }

    fn from_transform(e: TransformError) -> Self {
        let stage = match &e {
            TransformError::Grounding { .. } => Stage::Ground,
            TransformError::NotTight { .. } => Stage::Tightness,
            _ => Stage::Preconditions,
        };
        let span = match &e {
            TransformError::Grounding { span, .. } | TransformError::InvalidHead { span, .. } => Some(*span),
            _ => None,
        };
        let cycle = match &e {
            TransformError::NotTight { cycle } => Some(cycle.clone()),
            _ => None,
        };
        let message = match &e {
            TransformError::Grounding { message, .. } | TransformError::InvalidHead { message, .. } => message.clone(),
            other => other.to_string(),
        };
        PipelineError { stage, messages: vec![message], span, cycle }
    }
}

#[derive(Clone, Debug)]
pub struct Compiled {
    /// The program after default desugaring and spatial-head rewriting.
    pub program: Program,
    pub ground: GroundTheory,
    pub graph: DependencyGraph,
    pub completed: CompletedTheory,
    pub instance: SmtInstance,
    pub transform_time: Duration,
    pub emit_time: Duration,
}

/// Everything up to grounding; also the entry point for the oracle.
pub fn prepare(program: &Program) -> Result<(Program, GroundTheory), PipelineError> {
    let report = validate_program(program);
    if !report.is_empty() {
        return Err(PipelineError {
            stage: Stage::Validate,
            span: report.issues.first().map(|i| i.span),
            messages: report.issues.iter().map(|i| i.to_string()).collect(),
            cycle: None,
        });
    }
    for c in program.constants.iter().filter(|c| c.is_intensional() && !c.is_predicate()) {
        let r = transform::check_f_plain(program, &c.name);
        if !r.plain {
            return Err(PipelineError::from_transform(TransformError::NotFPlain { function: c.name.clone(), offending: r.offending }));
        }
    }
    let av = transform::check_av_separated(program);
    if !av.separated {
        return Err(PipelineError::from_transform(TransformError::NotAvSeparated { pairs: av.pairs }));
    }
    let desugared = transform::desugar_defaults(program);
    let rewritten = transform::assert_spatial_heads(&desugared).map_err(PipelineError::from_transform)?;
    let ground = transform::ground(&rewritten).map_err(PipelineError::from_transform)?;
    Ok((rewritten, ground))
}

pub fn compile(program: &Program) -> Result<Compiled, PipelineError> {
    let start = Instant::now();
    let (program, ground) = prepare(program)?;
    let graph = transform::dependency_graph(&ground);
    let t = transform::is_tight(&graph);
    if !t.tight {
        return Err(PipelineError::from_transform(TransformError::NotTight { cycle: t.cycle.unwrap_or_default() }));
    }
    let completed = transform::clark_completion(&ground);
    let transform_time = start.elapsed();
    let start = Instant::now();
    let instance = smt::emit(&completed).map_err(|e| PipelineError::new(Stage::Emit, e.to_string()))?;
    Ok(Compiled { program, ground, graph, completed, instance, transform_time, emit_time: start.elapsed() })
}

pub fn parse(source: &str) -> Result<Program, PipelineError> {
    parse_program(source).map_err(|e| PipelineError { stage: Stage::Parse, messages: vec![e.to_string()], span: Some(e.span), cycle: None })
}

pub fn compile_source(source: &str) -> Result<Compiled, PipelineError> {
    compile(&parse(source)?)
}

pub fn parse_query(query: &str, program: &Program) -> Result<Formula, PipelineError> {
    parse_formula(query, program).map_err(|e| PipelineError { stage: Stage::Parse, messages: vec![e.to_string()], span: Some(e.span), cycle: None })
}

/// The program extended with the constraint `<- body`.
pub fn with_constraint(program: &Program, body: Formula) -> Program {
    let mut p = program.clone();
    p.rules.push(Rule::constraint(body));
    p
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub compiled: Compiled,
    pub verdict: SolverVerdict,
    /// Set when a returned model fails re-evaluation.
    pub unsound: Option<SoundnessError>,
}

#[derive(Clone, Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Solver(#[from] SmtError),
}

pub fn solve_compiled(compiled: Compiled, config: &SolverConfig) -> Result<Solved, SmtError> {
    let verdict = smt::solve(&compiled.instance, config)?;
    let unsound = verdict.model.as_ref().and_then(|m| smt::check_model(&compiled.instance, m).err());
    Ok(Solved { compiled, verdict, unsound })
}

pub fn solve_program(program: &Program, config: &SolverConfig) -> Result<Solved, RunError> {
    Ok(solve_compiled(compile(program)?, config)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entailment {
    /// Every stable model satisfies the query.
    Entailed,
    /// Some stable model violates it.
    NotEntailed,
    Unknown,
}

/// Queries are answered by refutation: the query is entailed iff adding
/// the constraint `<- query` leaves no stable model.
pub fn check_entailed(program: &Program, query: &Formula, config: &SolverConfig) -> Result<(Entailment, Solved), RunError> {
    let solved = solve_program(&with_constraint(program, query.clone()), config)?;
    let e = match solved.verdict.status {
        Status::Unsat => Entailment::Entailed,
        Status::Sat => Entailment::NotEntailed,
        Status::Unknown => Entailment::Unknown,
    };
    Ok((e, solved))
}

/// Whether some stable model satisfies the query.
pub fn check_consistent(program: &Program, query: &Formula, config: &SolverConfig) -> Result<(Status, Solved), RunError> {
    let solved = solve_program(&with_constraint(program, Formula::not(query.clone())), config)?;
    Ok((solved.verdict.status, solved))
}
