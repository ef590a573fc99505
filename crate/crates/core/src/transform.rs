//! From a validated program to a completed ground theory: syntactic
//! preconditions, default desugaring, grounding over finite sorts, Clark
//! normal form, completion, and the tightness check licensing it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::*;
use crate::parser::SourceSpan;
use crate::qs::{self, SpatialKind};

/// A ground argument: an object name (or enumeration member) or an integer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Obj(String),
}

impl Value {
    pub fn from_term(t: &Term) -> Option<Value> {
        match t {
            Term::Int(i) => Some(Value::Int(*i)),
            Term::Sym(s) => Some(Value::Obj(s.clone())),
            _ => t.eval_int().map(Value::Int),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Value::Int(i) => Term::Int(*i),
            Value::Obj(s) => Term::Sym(s.clone()),
        }
    }

    pub fn mangle(&self) -> String {
        match self {
            Value::Int(i) => qs::mangle_int(*i),
            Value::Obj(s) => s.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Obj(s) => f.write_str(s),
        }
    }
}

/// Identity of a ground atom `p(v1,..)` or ground function term `f(v1,..)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundKey {
    pub name: String,
    pub args: Vec<Value>,
}

impl GroundKey {
    pub fn new(name: &str, args: Vec<Value>) -> Self {
        GroundKey { name: name.to_string(), args }
    }

    pub fn from_args(name: &str, args: &[Term]) -> Option<Self> {
        Some(GroundKey { name: name.to_string(), args: args.iter().map(Value::from_term).collect::<Option<Vec<_>>>()? })
    }

    pub fn as_atom(&self) -> Formula {
        Formula::atom(&self.name, self.args.iter().map(Value::to_term).collect())
    }

    pub fn as_term(&self) -> Term {
        Term::App(self.name.clone(), self.args.iter().map(Value::to_term).collect())
    }

    /// `name_arg1_arg2...`
    pub fn mangle(&self) -> String {
        let mut s = self.name.clone();
        for a in &self.args {
            s.push('_');
            s.push_str(&a.mangle());
        }
        s
    }
}

impl fmt::Display for GroundKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("{}:{}: {message}", span.line, span.column)]
    Grounding { message: String, span: SourceSpan },
    #[error("{}:{}: {message}", span.line, span.column)]
    InvalidHead { message: String, span: SourceSpan },
    #[error("constant `{function}` is not f-plain: {}", offending.iter().map(|f| format!("`{f}`")).collect::<Vec<_>>().join(", "))]
    NotFPlain { function: String, offending: Vec<Formula> },
    #[error("program is not av-separated: {}", pairs.iter().map(|(a, v)| format!("{a}~{v}")).collect::<Vec<_>>().join(", "))]
    NotAvSeparated { pairs: Vec<(String, String)> },
    #[error("program is not tight: positive dependency cycle {}", cycle.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" -> "))]
    NotTight { cycle: Vec<GroundKey> },
}

// ---------------------------------------------------------------------------
// Syntactic preconditions

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FPlainReport {
    pub plain: bool,
    pub offending: Vec<Formula>,
}

/// Every atomic formula either omits `f` or is `f(t) = u` with `t`, `u`
/// free of `f`.
pub fn check_f_plain(program: &Program, f: &str) -> FPlainReport {
    let mut offending = Vec::new();
    let mut visit = |a: &Formula| {
        let ok = match a {
            Formula::Atom { args, .. } => !args.iter().any(|t| t.mentions_function(f)),
            Formula::FnEq { func, value } => {
                if !func.mentions_function(f) && !value.mentions_function(f) {
                    true
                } else {
                    match func {
                        Term::App(name, args) => name == f && !args.iter().any(|t| t.mentions_function(f)) && !value.mentions_function(f),
                        _ => false,
                    }
                }
            }
            Formula::Cmp { lhs, rhs, .. } => !lhs.mentions_function(f) && !rhs.mentions_function(f),
            _ => true,
        };
        if !ok && !offending.contains(a) {
            offending.push(a.clone());
        }
    };
    for r in &program.rules {
        r.head.for_each_atomic(&mut visit);
        r.body.for_each_atomic(&mut visit);
    }
    FPlainReport { plain: offending.is_empty(), offending }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AvReport {
    pub separated: bool,
    /// (argument variable, value variable) pairs linked by equality.
    pub pairs: Vec<(String, String)>,
}

/// No variable in an argument of one function is equal (syntactically or
/// through a chain of variable equalities) to the value variable of a
/// different function within the same rule.
pub fn check_av_separated(program: &Program) -> AvReport {
    let mut pairs = Vec::new();
    for r in &program.rules {
        let formula = r.as_formula();
        let mut values: Vec<(String, String)> = Vec::new();
        let mut arguments: Vec<(String, String)> = Vec::new();
        let mut links: Vec<(String, String)> = Vec::new();
        formula.for_each_atomic(&mut |a| {
            if let Formula::FnEq { func: Term::App(f, _), value: Term::Var(v) } = a {
                values.push((f.clone(), v.clone()));
            }
            if let Formula::Cmp { lhs: Term::Var(a), op: CmpOp::Eq, rhs: Term::Var(b) } = a {
                links.push((a.clone(), b.clone()));
            }
        });
        formula.for_each_term(&mut |t| {
            t.for_each_app(&mut |g, args| {
                let mut vars = BTreeSet::new();
                args.iter().for_each(|a| a.collect_vars(&mut vars));
                for v in vars {
                    arguments.push((g.to_string(), v));
                }
            })
        });
        // Equality classes over variables.
        let mut class: BTreeMap<String, String> = BTreeMap::new();
        fn find(class: &BTreeMap<String, String>, v: &str) -> String {
            let mut cur = v.to_string();
            while let Some(next) = class.get(&cur) {
                if *next == cur {
                    break;
                }
                cur = next.clone();
            }
            cur
        }
        for (a, b) in &links {
            let (ra, rb) = (find(&class, a), find(&class, b));
            if ra != rb {
                class.insert(ra, rb);
            }
        }
        for (g, x) in &arguments {
            for (f, y) in &values {
                if f != g && find(&class, x) == find(&class, y) {
                    let pair = (x.clone(), y.clone());
                    if !pairs.contains(&pair) {
                        pairs.push(pair);
                    }
                }
            }
        }
    }
    AvReport { separated: pairs.is_empty(), pairs }
}

// ---------------------------------------------------------------------------
// Rule rewriting

/// `{H} <- B` becomes `H <- B & not not H`.
pub fn desugar_defaults(program: &Program) -> Program {
    let mut out = program.clone();
    for r in &mut out.rules {
        if r.choice {
            let guard = Formula::not(Formula::not(r.head.clone()));
            r.body = match std::mem::replace(&mut r.body, Formula::Top) {
                Formula::Top => guard,
                Formula::And(mut xs) => {
                    xs.push(guard);
                    Formula::And(xs)
                }
                b => Formula::And(vec![b, guard]),
            };
            r.choice = false;
        }
    }
    out
}

fn is_intensional_head(head: &Formula, sig: &IntensionalSignature) -> bool {
    match head {
        Formula::Atom { pred, .. } => sig.predicates.contains(pred),
        Formula::FnEq { func: Term::App(f, _), .. } => sig.functions.contains(f),
        _ => false,
    }
}

/// Rules whose head speaks only about spatial symbols become constraints
/// `<- B & not H`; any other non-intensional head is rejected.
pub fn assert_spatial_heads(program: &Program) -> Result<Program, TransformError> {
    let sig = program.signature();
    let mut out = program.clone();
    for r in &mut out.rules {
        if r.head == Formula::Bottom || is_intensional_head(&r.head, &sig) {
            continue;
        }
        if !is_spatial_formula(program, &sig, &r.head) {
            return Err(TransformError::InvalidHead {
                message: format!("head `{}` is neither an intensional atom nor purely spatial", r.head),
                span: r.span,
            });
        }
        let negated = Formula::not(std::mem::replace(&mut r.head, Formula::Bottom));
        r.body = match std::mem::replace(&mut r.body, Formula::Top) {
            Formula::Top => negated,
            Formula::And(mut xs) => {
                xs.push(negated);
                Formula::And(xs)
            }
            b => Formula::And(vec![b, negated]),
        };
        r.choice = false;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Grounding

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTheory {
    pub rules: Vec<Rule>,
    pub signature: IntensionalSignature,
    /// Every ground instance of an intensional predicate.
    pub atoms: BTreeSet<GroundKey>,
    /// Every ground intensional function term with its value domain.
    pub functions: BTreeMap<GroundKey, Vec<Value>>,
    /// Declarations of the source program (rules removed).
    pub declarations: Program,
}

impl GroundTheory {
    /// Propositional theory over the given atoms with no declarations; used
    /// by tests and the oracle.
    pub fn propositional(rules: Vec<Rule>, atoms: &[&str]) -> GroundTheory {
        let keys: BTreeSet<GroundKey> = atoms.iter().map(|a| GroundKey::new(a, vec![])).collect();
        let mut decls = Program::default();
        for a in atoms {
            decls.constants.push(ConstantDecl { name: a.to_string(), args: vec![], result: SortRef::Boolean, span: SourceSpan::default() });
        }
        GroundTheory {
            rules,
            signature: IntensionalSignature { predicates: atoms.iter().map(|s| s.to_string()).collect(), functions: BTreeSet::new() },
            atoms: keys,
            functions: BTreeMap::new(),
            declarations: decls,
        }
    }

    pub fn as_formula(&self) -> Formula {
        Formula::and(self.rules.iter().map(Rule::as_formula).collect())
    }

    /// Whether a ground term names an intensional function.
    pub fn function_key(&self, t: &Term) -> Option<GroundKey> {
        match t {
            Term::App(f, args) if self.signature.functions.contains(f) => GroundKey::from_args(f, args),
            _ => None,
        }
    }
}

impl fmt::Display for GroundTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

fn grounding_error(message: String, span: SourceSpan) -> TransformError {
    TransformError::Grounding { message, span }
}

/// Members of a sort, in declaration order (objects) or numeric order.
pub fn sort_values(program: &Program, sort: &SortRef) -> Result<Vec<Value>, String> {
    match sort {
        SortRef::Real => Err("variables of sort `real` cannot be grounded".into()),
        SortRef::Boolean => Err("sort `boolean` has no members to ground over".into()),
        s => {
            if let Some(kind) = s.spatial_kind() {
                return Ok(program
                    .objects
                    .iter()
                    .filter(|o| o.sort.spatial_kind() == Some(kind))
                    .map(|o| Value::Obj(o.name.clone()))
                    .collect());
            }
            let SortRef::Named(name) = s else { unreachable!() };
            match program.sort(name).map(|d| &d.kind) {
                Some(SortKind::Range { lo, hi }) => Ok((*lo..=*hi).map(Value::Int).collect()),
                Some(SortKind::Enumerated(_)) => Ok(program.enum_members(name).into_iter().map(Value::Obj).collect()),
                None => Err(format!("undeclared sort `{name}`")),
            }
        }
    }
}

fn range_of(program: &Program, sort: &SortRef) -> Option<(i64, i64)> {
    match sort {
        SortRef::Named(n) => match program.sort(n).map(|d| &d.kind) {
            Some(SortKind::Range { lo, hi }) => Some((*lo, *hi)),
            _ => None,
        },
        _ => None,
    }
}

struct Grounder<'a> {
    program: &'a Program,
    sig: IntensionalSignature,
    functions: BTreeMap<String, Vec<Value>>,
}

impl<'a> Grounder<'a> {
    /// Declared argument sorts of a symbol, when it has any.
    fn arg_sorts(&self, name: &str) -> Option<&'a [SortRef]> {
        self.program.constant(name).map(|c| c.args.as_slice())
    }

    /// False when some argument of the instance leaves its sort.
    fn in_range(&self, f: &Formula, binding: &BTreeMap<String, Term>) -> bool {
        let mut ok = true;
        let mut check_args = |name: &str, args: &[Term]| {
            let declared = self.arg_sorts(name);
            for (i, a) in args.iter().enumerate() {
                let value = a.substitute(binding).eval_int();
                let Some(v) = value else { continue };
                if let Some(sort) = declared.and_then(|d| d.get(i)) {
                    if let Some((lo, hi)) = range_of(self.program, sort) {
                        ok &= lo <= v && v <= hi;
                    }
                }
                if a.is_arith() {
                    let mut vars = BTreeSet::new();
                    a.collect_vars(&mut vars);
                    for var in vars {
                        if let Some(d) = self.program.variable(&var) {
                            if let Some((lo, hi)) = range_of(self.program, &d.sort) {
                                ok &= lo <= v && v <= hi;
                            }
                        }
                    }
                }
            }
        };
        f.for_each_atomic(&mut |a| {
            if let Formula::Atom { pred, args } = a {
                check_args(pred, args);
            }
        });
        f.for_each_term(&mut |t| t.for_each_app(&mut |name, args| check_args(name, args)));
        ok
    }

    fn ground_instance(&self, rule: &Rule, binding: &BTreeMap<String, Term>) -> Result<Option<Rule>, TransformError> {
        let head = self.fold(&rule.head.substitute(binding), rule.span)?;
        let body = self.fold(&rule.body.substitute(binding), rule.span)?.simplify();
        let head = head.simplify();
        if body == Formula::Bottom || head == Formula::Top {
            return Ok(None);
        }
        let head_ok = head == Formula::Bottom || is_intensional_head(&head, &self.sig);
        if !head_ok {
            return Err(TransformError::InvalidHead { message: format!("ground head `{head}` is not an intensional atom"), span: rule.span });
        }
        Ok(Some(Rule { head, body, choice: false, span: rule.span }))
    }

    fn fold_term(&self, t: &Term, span: SourceSpan) -> Result<Term, TransformError> {
        if let Some(v) = t.eval_int() {
            return Ok(Term::Int(v));
        }
        Ok(match t {
            Term::App(name, args) => {
                let args = args.iter().map(|a| self.fold_term(a, span)).collect::<Result<Vec<_>, _>>()?;
                if let Some(inner) = args.iter().find(|a| !matches!(a, Term::Int(_) | Term::Sym(_))) {
                    return Err(grounding_error(format!("argument `{inner}` of `{name}` must be an object or an integer"), span));
                }
                Term::App(name.clone(), args)
            }
            Term::Add(a, b) => Term::Add(Box::new(self.fold_term(a, span)?), Box::new(self.fold_term(b, span)?)),
            Term::Sub(a, b) => Term::Sub(Box::new(self.fold_term(a, span)?), Box::new(self.fold_term(b, span)?)),
            Term::Mul(a, b) => Term::Mul(Box::new(self.fold_term(a, span)?), Box::new(self.fold_term(b, span)?)),
            Term::Neg(a) => Term::Neg(Box::new(self.fold_term(a, span)?)),
            Term::Var(v) => return Err(grounding_error(format!("unbound variable `{v}`"), span)),
            t => t.clone(),
        })
    }

    fn fold(&self, f: &Formula, span: SourceSpan) -> Result<Formula, TransformError> {
        Ok(match f {
            Formula::Atom { pred, args } => {
                let args = args.iter().map(|a| self.fold_term(a, span)).collect::<Result<Vec<_>, _>>()?;
                if let Some(bad) = args.iter().find(|a| !matches!(a, Term::Int(_) | Term::Sym(_))) {
                    return Err(grounding_error(format!("argument `{bad}` of `{pred}` must be an object or an integer"), span));
                }
                Formula::Atom { pred: pred.clone(), args }
            }
            Formula::FnEq { func, value } => {
                let func = self.fold_term(func, span)?;
                let value = self.fold_term(value, span)?;
                fold_fn_eq(&self.functions, func, value)
            }
            Formula::Cmp { lhs, op, rhs } => fold_cmp(self.fold_term(lhs, span)?, *op, self.fold_term(rhs, span)?),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| self.fold(x, span)).collect::<Result<_, _>>()?),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| self.fold(x, span)).collect::<Result<_, _>>()?),
            Formula::Implies(a, b) => Formula::implies(self.fold(a, span)?, self.fold(b, span)?),
            Formula::Top | Formula::Bottom => f.clone(),
        })
    }
}

/// A finite function equality whose value lies outside the function's
/// range is false; an equality between two ground values is decided.
fn fold_fn_eq(functions: &BTreeMap<String, Vec<Value>>, func: Term, value: Term) -> Formula {
    if let (Term::App(f, _), Some(v)) = (&func, Value::from_term(&value)) {
        if let Some(domain) = functions.get(f) {
            if !domain.contains(&v) {
                return Formula::Bottom;
            }
        }
    }
    Formula::FnEq { func, value }
}

fn fold_cmp(lhs: Term, op: CmpOp, rhs: Term) -> Formula {
    match (&lhs, &rhs) {
        (Term::Int(a), Term::Int(b)) => {
            if op.holds(a.cmp(b)) {
                Formula::Top
            } else {
                Formula::Bottom
            }
        }
        (Term::Sym(a), Term::Sym(b)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
            if (a == b) == (op == CmpOp::Eq) {
                Formula::Top
            } else {
                Formula::Bottom
            }
        }
        _ => Formula::Cmp { lhs, op, rhs },
    }
}

fn cartesian(domains: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out = vec![vec![]];
    for d in domains {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for v in d {
                let mut p = prefix.clone();
                p.push(v.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Instantiate every rule over the finite sorts of its variables.
pub fn ground(program: &Program) -> Result<GroundTheory, TransformError> {
    let sig = program.signature();
    let mut atoms = BTreeSet::new();
    let mut functions = BTreeMap::new();
    let mut function_ranges = BTreeMap::new();
    for c in program.constants.iter().filter(|c| c.is_intensional()) {
        let domains = c
            .args
            .iter()
            .map(|s| sort_values(program, s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|m| grounding_error(format!("constant `{}`: {m}", c.name), c.span))?;
        let tuples = cartesian(&domains);
        if c.is_predicate() {
            atoms.extend(tuples.into_iter().map(|args| GroundKey::new(&c.name, args)));
        } else {
            let range = sort_values(program, &c.result).map_err(|m| grounding_error(format!("constant `{}`: {m}", c.name), c.span))?;
            if range.len() < 2 {
                return Err(grounding_error(
                    format!("function `{}` ranges over {} value(s); at least two are required", c.name, range.len()),
                    c.span,
                ));
            }
            function_ranges.insert(c.name.clone(), range.clone());
            for args in tuples {
                functions.insert(GroundKey::new(&c.name, args), range.clone());
            }
        }
    }
    let g = Grounder { program, sig: sig.clone(), functions: function_ranges };
    let mut rules = Vec::new();
    for rule in &program.rules {
        let vars: Vec<String> = rule.vars().into_iter().collect();
        let mut domains = Vec::new();
        for v in &vars {
            let decl = program.variable(v).ok_or_else(|| grounding_error(format!("undeclared variable `{v}`"), rule.span))?;
            domains.push(sort_values(program, &decl.sort).map_err(|m| grounding_error(format!("variable `{v}`: {m}"), rule.span))?);
        }
        for tuple in cartesian(&domains) {
            let binding: BTreeMap<String, Term> = vars.iter().cloned().zip(tuple.iter().map(Value::to_term)).collect();
            if !g.in_range(&rule.as_formula(), &binding) {
                continue;
            }
            if let Some(r) = g.ground_instance(rule, &binding)? {
                rules.push(r);
            }
        }
    }
    let mut declarations = program.clone();
    declarations.rules.clear();
    Ok(GroundTheory { rules, signature: sig, atoms, functions, declarations })
}

// ---------------------------------------------------------------------------
// Clark normal form and completion

fn value_condition(value: &Term) -> Formula {
    match value {
        Term::App(..) => Formula::FnEq { func: value.clone(), value: Term::Placeholder },
        v => Formula::Cmp { lhs: Term::Placeholder, op: CmpOp::Eq, rhs: v.clone() },
    }
}

/// One definition per intensional ground atom and function term, bodies
/// joined by disjunction; constraints follow unchanged.
pub fn to_clark_normal_form(theory: &GroundTheory) -> GroundTheory {
    let mut atom_bodies: BTreeMap<GroundKey, Vec<Formula>> = BTreeMap::new();
    let mut fn_bodies: BTreeMap<GroundKey, Vec<Formula>> = BTreeMap::new();
    let mut constraints = Vec::new();
    for r in &theory.rules {
        match &r.head {
            Formula::Atom { pred, args } if theory.signature.predicates.contains(pred) => {
                let key = GroundKey::from_args(pred, args).expect("ground head");
                atom_bodies.entry(key).or_default().push(r.body.clone());
            }
            Formula::FnEq { func, value } if theory.function_key(func).is_some() => {
                let key = theory.function_key(func).unwrap();
                let body = if *value == Term::Placeholder {
                    r.body.clone()
                } else {
                    let cond = value_condition(value);
                    match &r.body {
                        Formula::Top => cond,
                        Formula::And(xs) => {
                            let mut xs = xs.clone();
                            xs.push(cond);
                            Formula::And(xs)
                        }
                        b => Formula::And(vec![b.clone(), cond]),
                    }
                };
                fn_bodies.entry(key).or_default().push(body);
            }
            _ => constraints.push(r.clone()),
        }
    }
    let mut rules = Vec::new();
    for key in &theory.atoms {
        let body = Formula::or(atom_bodies.remove(key).unwrap_or_default());
        rules.push(Rule::new(key.as_atom(), body));
    }
    for key in theory.functions.keys() {
        let body = Formula::or(fn_bodies.remove(key).unwrap_or_default());
        rules.push(Rule::new(Formula::FnEq { func: key.as_term(), value: Term::Placeholder }, body));
    }
    rules.extend(constraints);
    GroundTheory { rules, ..theory.clone() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sentence {
    /// `lhs <-> rhs` with `lhs` an atom or a function equality `f(t) = v`.
    Equivalence { lhs: Formula, rhs: Formula },
    /// `not body`.
    Constraint(Formula),
}

impl Sentence {
    pub fn as_formula(&self) -> Formula {
        match self {
            Sentence::Equivalence { lhs, rhs } => {
                Formula::And(vec![Formula::implies(lhs.clone(), rhs.clone()), Formula::implies(rhs.clone(), lhs.clone())])
            }
            Sentence::Constraint(b) => Formula::not(b.clone()),
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sentence::Equivalence { lhs, rhs } => write!(f, "{lhs} <-> {rhs}."),
            Sentence::Constraint(b) => write!(f, "<- {b}."),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletedTheory {
    pub sentences: Vec<Sentence>,
    pub signature: IntensionalSignature,
    pub atoms: BTreeSet<GroundKey>,
    pub functions: BTreeMap<GroundKey, Vec<Value>>,
    pub declarations: Program,
}

impl fmt::Display for CompletedTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sentences {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

fn resolve_placeholder(f: &Formula, v: &Value, domains: &BTreeMap<String, Vec<Value>>) -> Formula {
    let t = v.to_term();
    match f {
        Formula::FnEq { func, value } => fold_fn_eq(domains, func.replace_placeholder(&t), value.replace_placeholder(&t)),
        Formula::Cmp { lhs, op, rhs } => {
            let l = lhs.replace_placeholder(&t);
            let r = rhs.replace_placeholder(&t);
            let l = l.eval_int().map(Term::Int).unwrap_or(l);
            let r = r.eval_int().map(Term::Int).unwrap_or(r);
            fold_cmp(l, *op, r)
        }
        Formula::And(xs) => Formula::And(xs.iter().map(|x| resolve_placeholder(x, v, domains)).collect()),
        Formula::Or(xs) => Formula::Or(xs.iter().map(|x| resolve_placeholder(x, v, domains)).collect()),
        Formula::Implies(a, b) => Formula::implies(resolve_placeholder(a, v, domains), resolve_placeholder(b, v, domains)),
        other => other.clone(),
    }
}

/// Definitions become equivalences; function definitions are expanded over
/// each value of the function's finite range.
pub fn clark_completion(theory: &GroundTheory) -> CompletedTheory {
    let nf = to_clark_normal_form(theory);
    let mut domains: BTreeMap<String, Vec<Value>> = BTreeMap::new();
    for (k, d) in &nf.functions {
        domains.entry(k.name.clone()).or_insert_with(|| d.clone());
    }
    let mut sentences = Vec::new();
    for r in &nf.rules {
        match &r.head {
            Formula::Bottom => sentences.push(Sentence::Constraint(r.body.clone())),
            Formula::FnEq { func, value: Term::Placeholder } => {
                let key = nf.function_key(func).expect("intensional function head");
                for v in &nf.functions[&key] {
                    let rhs = resolve_placeholder(&r.body, v, &domains).simplify();
                    sentences.push(Sentence::Equivalence { lhs: Formula::FnEq { func: func.clone(), value: v.to_term() }, rhs });
                }
            }
            head => sentences.push(Sentence::Equivalence { lhs: head.clone(), rhs: r.body.clone() }),
        }
    }
    CompletedTheory {
        sentences,
        signature: nf.signature,
        atoms: nf.atoms,
        functions: nf.functions,
        declarations: nf.declarations,
    }
}

// ---------------------------------------------------------------------------
// Dependency graph

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    pub vertices: BTreeSet<GroundKey>,
    /// `(c, d)`: `c` occurs strictly positively in a head whose body has `d`
    /// strictly positive.
    pub edges: BTreeSet<(GroundKey, GroundKey)>,
}

impl DependencyGraph {
    pub fn successors<'a>(&'a self, v: &GroundKey) -> impl Iterator<Item = &'a GroundKey> + 'a {
        let v = v.clone();
        self.edges.range((v.clone(), GroundKey::new("", vec![]))..).take_while(move |(a, _)| *a == v).map(|(_, b)| b)
    }
}

fn intensional_keys(f: &Formula, sig: &IntensionalSignature, out: &mut BTreeSet<GroundKey>) {
    match f {
        Formula::Atom { pred, args } => {
            if sig.predicates.contains(pred) {
                if let Some(k) = GroundKey::from_args(pred, args) {
                    out.insert(k);
                }
            }
            args.iter().for_each(|t| term_keys(t, sig, out));
        }
        Formula::FnEq { func: a, value: b } | Formula::Cmp { lhs: a, rhs: b, .. } => {
            term_keys(a, sig, out);
            term_keys(b, sig, out);
        }
        _ => {}
    }
}

fn term_keys(t: &Term, sig: &IntensionalSignature, out: &mut BTreeSet<GroundKey>) {
    t.for_each_app(&mut |name, args| {
        if sig.functions.contains(name) {
            if let Some(k) = GroundKey::from_args(name, args) {
                out.insert(k);
            }
        }
    });
}

/// Intensional constants with a strictly positive occurrence (not inside
/// the antecedent of any implication).
fn strictly_positive(f: &Formula, sig: &IntensionalSignature, out: &mut BTreeSet<GroundKey>) {
    match f {
        Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| strictly_positive(x, sig, out)),
        Formula::Implies(_, h) => strictly_positive(h, sig, out),
        Formula::Top | Formula::Bottom => {}
        atomic => intensional_keys(atomic, sig, out),
    }
}

fn collect_edges(f: &Formula, sig: &IntensionalSignature, edges: &mut BTreeSet<(GroundKey, GroundKey)>) {
    match f {
        Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| collect_edges(x, sig, edges)),
        Formula::Implies(g, h) => {
            let mut heads = BTreeSet::new();
            let mut bodies = BTreeSet::new();
            strictly_positive(h, sig, &mut heads);
            strictly_positive(g, sig, &mut bodies);
            for c in &heads {
                for d in &bodies {
                    edges.insert((c.clone(), d.clone()));
                }
            }
            collect_edges(h, sig, edges);
        }
        _ => {}
    }
}

pub fn dependency_graph(theory: &GroundTheory) -> DependencyGraph {
    let mut edges = BTreeSet::new();
    for r in &theory.rules {
        collect_edges(&r.as_formula(), &theory.signature, &mut edges);
    }
    let mut vertices: BTreeSet<GroundKey> = theory.atoms.iter().cloned().collect();
    vertices.extend(theory.functions.keys().cloned());
    for (a, b) in &edges {
        vertices.insert(a.clone());
        vertices.insert(b.clone());
    }
    DependencyGraph { vertices, edges }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tightness {
    pub tight: bool,
    /// `[v1, .., vk]` with edges `v1 -> v2 -> .. -> vk -> v1`.
    pub cycle: Option<Vec<GroundKey>>,
}

pub fn is_tight(graph: &DependencyGraph) -> Tightness {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Open,
        Done,
    }
    let mut mark: BTreeMap<&GroundKey, Mark> = graph.vertices.iter().map(|v| (v, Mark::Fresh)).collect();
    for root in &graph.vertices {
        if mark[root] != Mark::Fresh {
            continue;
        }
        let mut stack: Vec<(&GroundKey, Vec<&GroundKey>)> = vec![(root, graph.successors(root).collect())];
        mark.insert(root, Mark::Open);
        while let Some((v, pending)) = stack.last_mut() {
            let v = *v;
            match pending.pop() {
                Some(w) => match mark.get(w).copied().unwrap_or(Mark::Fresh) {
                    Mark::Open => {
                        let start = stack.iter().position(|(u, _)| *u == w).unwrap();
                        let cycle = stack[start..].iter().map(|(u, _)| (*u).clone()).collect();
                        return Tightness { tight: false, cycle: Some(cycle) };
                    }
                    Mark::Fresh => {
                        mark.insert(w, Mark::Open);
                        let mut succ: Vec<&GroundKey> = graph.successors(w).collect();
                        succ.reverse();
                        stack.push((w, succ));
                    }
                    Mark::Done => {}
                },
                None => {
                    mark.insert(v, Mark::Done);
                    stack.pop();
                }
            }
        }
    }
    Tightness { tight: true, cycle: None }
}

/// Kind of every declared spatial object.
pub fn object_kinds(program: &Program) -> BTreeMap<String, SpatialKind> {
    program.objects.iter().filter_map(|o| o.sort.spatial_kind().map(|k| (o.name.clone(), k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn p(name: &str) -> Formula {
        Formula::atom(name, vec![])
    }

    fn key(name: &str) -> GroundKey {
        GroundKey::new(name, vec![])
    }

    fn prop(rules: Vec<Rule>, atoms: &[&str]) -> GroundTheory {
        GroundTheory::propositional(rules, atoms)
    }

    #[test]
    fn f_plain_examples() {
        let prog = parse_program("objects a, b :: circle. x(a) = 1.23. x(a) = x(b). rccEC(a, b).").unwrap();
        let r = check_f_plain(&prog, "x");
        assert!(!r.plain);
        assert_eq!(r.offending.len(), 1);
        assert_eq!(r.offending[0].to_string(), "x(a) = x(b)");
        let ok = parse_program("objects a, b :: circle. x(a) = 1.23. rccEC(a, b).").unwrap();
        assert!(check_f_plain(&ok, "x").plain);
    }

    #[test]
    fn av_separated_examples() {
        let decls = "sorts s :: 0..1. constants f(s) :: s. g(s) :: s. variables X, Y, Z :: s.";
        let bad = parse_program(&format!("{decls} <- f(X) = Y & g(Y) = Z.")).unwrap();
        let r = check_av_separated(&bad);
        assert!(!r.separated);
        assert_eq!(r.pairs, vec![("Y".to_string(), "Y".to_string())]);
        let good = parse_program(&format!("{decls} <- f(X) = Y & g(X) = Z.")).unwrap();
        assert!(check_av_separated(&good).separated);
        let linked = parse_program(&format!("{decls} <- f(X) = Y & g(Z) = X & Z = Y.")).unwrap();
        assert!(!check_av_separated(&linked).separated);
    }

    #[test]
    fn desugar_choice() {
        let prog = parse_program("constants p :: boolean. q :: boolean. {p} <- q. q.").unwrap();
        let d = desugar_defaults(&prog);
        assert!(d.rules.iter().all(|r| !r.choice));
        assert_eq!(d.rules[0].body.to_string(), "q & not not p");
        let plain = parse_program("constants p :: boolean. p.").unwrap();
        assert_eq!(desugar_defaults(&plain), plain);
    }

    #[test]
    fn spatial_heads_become_constraints() {
        let prog = parse_program("constants g :: boolean. objects a, b :: circle. rccEQ(a, b) <- g. g.").unwrap();
        let out = assert_spatial_heads(&prog).unwrap();
        assert!(out.rules[0].is_constraint());
        assert_eq!(out.rules[0].body.to_string(), "g & not rccEQ(a,b)");
        let bad = parse_program("constants p :: boolean. q :: boolean. p | q.").unwrap();
        assert!(matches!(assert_spatial_heads(&bad), Err(TransformError::InvalidHead { .. })));
    }

    #[test]
    fn grounding_counts_instances() {
        let prog = parse_program("objects a, b, c :: circle. constants big(circle) :: boolean. variables C :: circle. big(C).").unwrap();
        assert_eq!(ground(&prog).unwrap().rules.len(), 3);
    }

    #[test]
    fn grounding_drops_out_of_range_steps() {
        let src = "sorts step :: 0..1. constants p(step) :: boolean. variables T :: step. p(T + 1) <- p(T).";
        let g = ground(&parse_program(src).unwrap()).unwrap();
        assert_eq!(g.rules.len(), 1);
        assert_eq!(g.rules[0].to_string(), "p(1) <- p(0).");
    }

    #[test]
    fn grounding_rejects_real_variables() {
        let src = "objects a :: circle. variables V :: real. x(a) = V <- x(a) = V.";
        let prog = assert_spatial_heads(&parse_program(src).unwrap()).unwrap();
        assert!(matches!(ground(&prog), Err(TransformError::Grounding { .. })));
    }

    #[test]
    fn grounding_universe_contains_all_instances() {
        let src = "sorts step :: 0..1. objects a, b, c :: circle. constants moved(circle, step) :: boolean.";
        let g = ground(&parse_program(src).unwrap()).unwrap();
        assert_eq!(g.atoms.len(), 6);
        assert!(g.atoms.contains(&GroundKey::new("moved", vec![Value::Obj("c".into()), Value::Int(1)])));
    }

    #[test]
    fn single_value_function_is_rejected() {
        let src = "sorts one :: 0..0. constants f :: one.";
        assert!(matches!(ground(&parse_program(src).unwrap()), Err(TransformError::Grounding { .. })));
    }

    #[test]
    fn clark_groups_bodies() {
        let t = prop(vec![Rule::new(p("p"), p("q")), Rule::new(p("p"), p("r"))], &["p", "q", "r", "s"]);
        let nf = to_clark_normal_form(&t);
        let p_rule = nf.rules.iter().find(|r| r.head == p("p")).unwrap();
        assert_eq!(p_rule.body, Formula::Or(vec![p("q"), p("r")]));
        let s_rule = nf.rules.iter().find(|r| r.head == p("s")).unwrap();
        assert_eq!(s_rule.body, Formula::Bottom);
        assert_eq!(to_clark_normal_form(&nf), nf);
    }

    #[test]
    fn completion_shapes() {
        let t = prop(vec![Rule::new(p("p"), p("q")), Rule::new(p("p"), p("r")), Rule::constraint(p("q"))], &["p", "q", "r", "s"]);
        let c = clark_completion(&t);
        let text = c.to_string();
        assert!(text.contains("p <-> q | r."), "{text}");
        assert!(text.contains("s <-> false."), "{text}");
        assert!(text.contains("<- q."), "{text}");
    }

    #[test]
    fn function_completion_is_pointwise() {
        let src = "sorts v :: 0..2. constants f :: v. q :: boolean. f = 1 <- q. f = 2 <- not q.";
        let g = ground(&parse_program(src).unwrap()).unwrap();
        let c = clark_completion(&g);
        let text = c.to_string();
        assert!(text.contains("f = 0 <-> false."), "{text}");
        assert!(text.contains("f = 1 <-> q."), "{text}");
        assert!(text.contains("f = 2 <-> not q."), "{text}");
    }

    #[test]
    fn graph_examples() {
        let one = prop(vec![Rule::new(p("q"), p("p"))], &["p", "q"]);
        let g = dependency_graph(&one);
        assert_eq!(g.edges, BTreeSet::from([(key("q"), key("p"))]));
        assert!(is_tight(&g).tight);

        let two = prop(vec![Rule::new(p("q"), p("p")), Rule::new(p("p"), p("q"))], &["p", "q"]);
        let g = dependency_graph(&two);
        assert_eq!(g.edges.len(), 2);
        let t = is_tight(&g);
        assert!(!t.tight);
        assert_eq!(t.cycle, Some(vec![key("p"), key("q")]));

        let guard = prop(vec![Rule::new(p("h"), Formula::And(vec![p("b"), Formula::not(Formula::not(p("h")))]))], &["h", "b"]);
        let g = dependency_graph(&guard);
        assert_eq!(g.edges, BTreeSet::from([(key("h"), key("b"))]));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let t = prop(vec![Rule::new(p("p"), p("p"))], &["p"]);
        assert_eq!(is_tight(&dependency_graph(&t)).cycle, Some(vec![key("p")]));
    }
}
