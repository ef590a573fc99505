//! SMT-LIB 2 emission, solver invocation and model decoding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::model::*;
use crate::parser::{parse_solver_model, ModelValue};
use crate::qs::{self, Constraint, Polynomial, RelationAtom, SpatialKind};
use crate::transform::{CompletedTheory, GroundKey, Sentence, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SmtSort {
    Bool,
    Int,
    Real,
}

impl fmt::Display for SmtSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmtSort::Bool => "Bool",
            SmtSort::Int => "Int",
            SmtSort::Real => "Real",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Bool(bool),
    Int(BigInt),
    Real(BigRational),
    Sym(String),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    /// `<`, `<=`, `>=`, `>`, or `!=` rendered as a negated equality.
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    ToReal(Box<Expr>),
}

impl Expr {
    fn not(e: Expr) -> Expr {
        match e {
            Expr::Not(inner) => *inner,
            Expr::Bool(b) => Expr::Bool(!b),
            e => Expr::Not(Box::new(e)),
        }
    }

    pub fn for_each_symbol<'a>(&'a self, f: &mut dyn FnMut(&'a str)) {
        match self {
            Expr::Sym(s) => f(s),
            Expr::Not(a) | Expr::Neg(a) | Expr::ToReal(a) => a.for_each_symbol(f),
            Expr::And(xs) | Expr::Or(xs) | Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.for_each_symbol(f)),
            Expr::Implies(a, b) | Expr::Eq(a, b) | Expr::Cmp(_, a, b) | Expr::Sub(a, b) => {
                a.for_each_symbol(f);
                b.for_each_symbol(f);
            }
            Expr::Bool(_) | Expr::Int(_) | Expr::Real(_) => {}
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, op: &str, xs: &[&Expr]) -> fmt::Result {
    write!(f, "({op}")?;
    for x in xs {
        write!(f, " {x}")?;
    }
    f.write_str(")")
}

fn real_literal(q: &BigRational) -> String {
    let abs = q.abs();
    let body = match format_decimal(&abs) {
        s if s.contains('/') => format!("(/ {}.0 {}.0)", abs.numer(), abs.denom()),
        s => s,
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Int(i) if i.is_negative() => write!(f, "(- {})", -i),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Real(q) => f.write_str(&real_literal(q)),
            Expr::Sym(s) => f.write_str(s),
            Expr::Not(a) => write_list(f, "not", &[a]),
            Expr::And(xs) => write_list(f, "and", &xs.iter().collect::<Vec<_>>()),
            Expr::Or(xs) => write_list(f, "or", &xs.iter().collect::<Vec<_>>()),
            Expr::Implies(a, b) => write_list(f, "=>", &[a, b]),
            Expr::Eq(a, b) => write_list(f, "=", &[a, b]),
            Expr::Cmp(CmpOp::Ne, a, b) => write!(f, "(not (= {a} {b}))"),
            Expr::Cmp(op, a, b) => write_list(f, op.symbol(), &[a, b]),
            Expr::Add(xs) => write_list(f, "+", &xs.iter().collect::<Vec<_>>()),
            Expr::Sub(a, b) => write_list(f, "-", &[a, b]),
            Expr::Mul(xs) => write_list(f, "*", &xs.iter().collect::<Vec<_>>()),
            Expr::Neg(a) => write_list(f, "-", &[a]),
            Expr::ToReal(a) => write_list(f, "to_real", &[a]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Origin {
    DomainAxiom,
    FunctionBound,
    Completion,
    RelationDefinition,
    Constraint,
    SymmetryBreaking,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub origin: Origin,
    pub expr: Expr,
}

/// Parameters of one object at one step (or unstepped).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectFrame {
    pub object: String,
    pub kind: SpatialKind,
    pub step: Option<i64>,
    /// `(slot, symbol)` in slot order.
    pub slots: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtInstance {
    pub logic: String,
    pub declarations: BTreeMap<String, SmtSort>,
    pub assertions: Vec<Assertion>,
    pub frames: Vec<ObjectFrame>,
    /// Intensional ground atoms by symbol.
    pub atoms: BTreeMap<String, GroundKey>,
    /// Spatial relation atoms by symbol.
    pub relations: BTreeMap<String, (GroundKey, RelationAtom)>,
    /// Finite function terms by symbol, with their ordered value domains.
    pub functions: BTreeMap<String, (GroundKey, Vec<Value>)>,
    /// Declared real-valued constants by symbol.
    pub reals: BTreeMap<String, GroundKey>,
    pub symmetry: Symmetry,
}

impl SmtInstance {
    pub fn text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "(set-logic {})", self.logic).unwrap();
        for (name, sort) in &self.declarations {
            writeln!(out, "(declare-fun {name} () {sort})").unwrap();
        }
        let mut last = None;
        for a in &self.assertions {
            if last != Some(a.origin) {
                let label = match a.origin {
                    Origin::DomainAxiom => "object well-formedness",
                    Origin::FunctionBound => "finite function ranges",
                    Origin::Completion => "completion",
                    Origin::RelationDefinition => "spatial relations",
                    Origin::Constraint => "constraints",
                    Origin::SymmetryBreaking => "symmetry breaking",
                };
                writeln!(out, "; {label}").unwrap();
                last = Some(a.origin);
            }
            writeln!(out, "(assert {})", a.expr).unwrap();
        }
        out.push_str("(check-sat)\n(get-model)\n");
        out
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("symbol `{symbol}` is used for both {first} and {second}")]
    NameCollision { symbol: String, first: String, second: String },
    #[error("assertion references undeclared symbol `{0}`")]
    Undeclared(String),
    #[error("cannot encode `{0}`")]
    Unsupported(String),
    #[error("{0}")]
    Relation(#[from] qs::QsError),
}

struct Emitter<'a> {
    theory: &'a CompletedTheory,
    kinds: BTreeMap<String, SpatialKind>,
    declarations: BTreeMap<String, (SmtSort, String)>,
    frames: BTreeSet<(String, Option<i64>)>,
    atoms: BTreeMap<String, GroundKey>,
    relations: BTreeMap<String, (GroundKey, RelationAtom)>,
    functions: BTreeMap<String, (GroundKey, Vec<Value>)>,
    reals: BTreeMap<String, GroundKey>,
}

fn code_of(domain: &[Value], v: &Value) -> Option<BigInt> {
    if domain.iter().all(|d| matches!(d, Value::Int(_))) {
        match v {
            Value::Int(i) => Some(BigInt::from(*i)),
            _ => None,
        }
    } else {
        domain.iter().position(|d| d == v).map(BigInt::from)
    }
}

impl<'a> Emitter<'a> {
    fn declare(&mut self, symbol: &str, sort: SmtSort, origin: String) -> Result<(), EmitError> {
        match self.declarations.get(symbol) {
            Some((s, o)) if *s == sort && *o == origin => Ok(()),
            Some((_, o)) => Err(EmitError::NameCollision { symbol: symbol.into(), first: o.clone(), second: origin }),
            None => {
                self.declarations.insert(symbol.into(), (sort, origin));
                Ok(())
            }
        }
    }

    fn ground_values(&self, t: &[Term]) -> Result<Vec<Value>, EmitError> {
        t.iter().map(|a| Value::from_term(a).ok_or_else(|| EmitError::Unsupported(a.to_string()))).collect()
    }

    fn function_domain(&self, t: &Term) -> Option<&'a [Value]> {
        match t {
            Term::App(..) => self.theory.functions.get(&self.theory_key(t)?).map(|d| d.as_slice()),
            _ => None,
        }
    }

    fn theory_key(&self, t: &Term) -> Option<GroundKey> {
        match t {
            Term::App(f, args) if self.theory.signature.functions.contains(f) => GroundKey::from_args(f, args),
            _ => None,
        }
    }

    fn term_is_real(&self, t: &Term) -> bool {
        match t {
            Term::Num(_) => true,
            Term::App(name, _) => !self.theory.signature.functions.contains(name),
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => self.term_is_real(a) || self.term_is_real(b),
            Term::Neg(a) => self.term_is_real(a),
            _ => false,
        }
    }

    /// Translate an arithmetic or finite-valued term. `domain` codes bare
    /// enumeration members; `real` forces real sort.
    fn term(&mut self, t: &Term, real: bool, domain: Option<&[Value]>) -> Result<Expr, EmitError> {
        Ok(match t {
            Term::Int(i) if real => Expr::Real(BigRational::from_integer(BigInt::from(*i))),
            Term::Int(i) => Expr::Int(BigInt::from(*i)),
            Term::Num(q) => Expr::Real(q.clone()),
            Term::Sym(s) => {
                let code = domain.and_then(|d| code_of(d, &Value::Obj(s.clone()))).ok_or_else(|| EmitError::Unsupported(t.to_string()))?;
                Expr::Int(code)
            }
            Term::App(name, args) => {
                let args_v = self.ground_values(args)?;
                if self.theory.signature.functions.contains(name) {
                    let key = GroundKey::new(name, args_v);
                    let symbol = key.mangle();
                    let dom = self.theory.functions.get(&key).cloned().ok_or_else(|| EmitError::Unsupported(t.to_string()))?;
                    self.declare(&symbol, SmtSort::Int, format!("function term {key}"))?;
                    self.functions.insert(symbol.clone(), (key, dom));
                    let e = Expr::Sym(symbol);
                    if real {
                        Expr::ToReal(Box::new(e))
                    } else {
                        e
                    }
                } else if self.theory.declarations.constant(name).is_some() {
                    let key = GroundKey::new(name, args_v);
                    let symbol = key.mangle();
                    self.declare(&symbol, SmtSort::Real, format!("real constant {key}"))?;
                    self.reals.insert(symbol.clone(), key);
                    Expr::Sym(symbol)
                } else if qs::is_parametric_function(name) {
                    let (object, step) = match args_v.as_slice() {
                        [Value::Obj(o)] => (o.clone(), None),
                        [Value::Obj(o), Value::Int(s)] => (o.clone(), Some(*s)),
                        _ => return Err(EmitError::Unsupported(t.to_string())),
                    };
                    let kind = *self.kinds.get(&object).ok_or_else(|| EmitError::Unsupported(t.to_string()))?;
                    if !kind.slots().iter().any(|s| s == name) {
                        return Err(EmitError::Unsupported(t.to_string()));
                    }
                    self.frames.insert((object.clone(), step));
                    Expr::Sym(qs::slot_symbol(name, &object, step))
                } else {
                    return Err(EmitError::Unsupported(t.to_string()));
                }
            }
            Term::Add(a, b) => Expr::Add(vec![self.term(a, real, None)?, self.term(b, real, None)?]),
            Term::Sub(a, b) => Expr::Sub(Box::new(self.term(a, real, None)?), Box::new(self.term(b, real, None)?)),
            Term::Mul(a, b) => Expr::Mul(vec![self.term(a, real, None)?, self.term(b, real, None)?]),
            Term::Neg(a) => Expr::Neg(Box::new(self.term(a, real, None)?)),
            Term::Var(_) | Term::Placeholder => return Err(EmitError::Unsupported(t.to_string())),
        })
    }

    fn relation(&mut self, pred: &str, args: &[Term]) -> Result<Expr, EmitError> {
        let schema = qs::catalog().get(pred).ok_or_else(|| qs::QsError::UnknownRelation(pred.into()))?;
        let values = self.ground_values(args)?;
        let n = schema.args.len();
        let step = match values.len() {
            l if l == n => None,
            l if l == n + 1 => match values[n] {
                Value::Int(s) => Some(s),
                _ => return Err(EmitError::Unsupported(format!("{pred}({})", values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))),
            },
            _ => return Err(EmitError::Unsupported(pred.into())),
        };
        let mut objects = Vec::new();
        for v in &values[..n] {
            let Value::Obj(o) = v else { return Err(EmitError::Unsupported(format!("{pred} argument {v}"))) };
            let kind = *self.kinds.get(o).ok_or_else(|| EmitError::Unsupported(format!("{pred} argument {o}")))?;
            objects.push((o.clone(), kind));
            self.frames.insert((o.clone(), step));
        }
        let atom = RelationAtom { relation: pred.into(), objects, step };
        qs::encode_relation(&atom)?;
        let key = GroundKey::new(pred, values);
        let symbol = format!("holds_{}", key.mangle());
        self.declare(&symbol, SmtSort::Bool, format!("relation {key}"))?;
        self.relations.insert(symbol.clone(), (key, atom));
        Ok(Expr::Sym(symbol))
    }

    fn formula(&mut self, f: &Formula) -> Result<Expr, EmitError> {
        Ok(match f {
            Formula::Top => Expr::Bool(true),
            Formula::Bottom => Expr::Bool(false),
            Formula::And(xs) => Expr::And(xs.iter().map(|x| self.formula(x)).collect::<Result<_, _>>()?),
            Formula::Or(xs) => Expr::Or(xs.iter().map(|x| self.formula(x)).collect::<Result<_, _>>()?),
            Formula::Implies(a, b) if **b == Formula::Bottom => Expr::not(self.formula(a)?),
            Formula::Implies(a, b) => Expr::Implies(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
            Formula::Atom { pred, args } => {
                if self.theory.signature.predicates.contains(pred) {
                    let key = GroundKey::new(pred, self.ground_values(args)?);
                    let symbol = format!("holds_{}", key.mangle());
                    self.declare(&symbol, SmtSort::Bool, format!("atom {key}"))?;
                    self.atoms.insert(symbol.clone(), key);
                    Expr::Sym(symbol)
                } else {
                    self.relation(pred, args)?
                }
            }
            Formula::FnEq { func, value } => self.comparison(func, CmpOp::Eq, value)?,
            Formula::Cmp { lhs, op, rhs } => self.comparison(lhs, *op, rhs)?,
        })
    }

    fn comparison(&mut self, lhs: &Term, op: CmpOp, rhs: &Term) -> Result<Expr, EmitError> {
        let domain = self.function_domain(lhs).or_else(|| self.function_domain(rhs));
        let real = self.term_is_real(lhs) || self.term_is_real(rhs);
        let l = self.term(lhs, real, domain)?;
        let r = self.term(rhs, real, domain)?;
        Ok(match op {
            CmpOp::Eq => Expr::Eq(Box::new(l), Box::new(r)),
            op => Expr::Cmp(op, Box::new(l), Box::new(r)),
        })
    }
}

fn polynomial_expr(p: &Polynomial<String>) -> Expr {
    match p {
        Polynomial::Const(c) => Expr::Real(c.clone()),
        Polynomial::Var(v) => Expr::Sym(v.clone()),
        Polynomial::Add(xs) => Expr::Add(xs.iter().map(polynomial_expr).collect()),
        Polynomial::Mul(xs) => Expr::Mul(xs.iter().map(polynomial_expr).collect()),
        Polynomial::Sub(a, b) => Expr::Sub(Box::new(polynomial_expr(a)), Box::new(polynomial_expr(b))),
        Polynomial::Neg(a) => Expr::Neg(Box::new(polynomial_expr(a))),
    }
}

pub fn constraint_expr(c: &Constraint<String>) -> Expr {
    match c {
        Constraint::True => Expr::Bool(true),
        Constraint::False => Expr::Bool(false),
        Constraint::Cmp(a, CmpOp::Eq, b) => Expr::Eq(Box::new(polynomial_expr(a)), Box::new(polynomial_expr(b))),
        Constraint::Cmp(a, op, b) => Expr::Cmp(*op, Box::new(polynomial_expr(a)), Box::new(polynomial_expr(b))),
        Constraint::And(xs) => Expr::And(xs.iter().map(constraint_expr).collect()),
        Constraint::Or(xs) => Expr::Or(xs.iter().map(constraint_expr).collect()),
    }
}

/// Build the solver instance for a completed theory. Spatial relation
/// atoms are defined by their polynomial constraints; every object gets its
/// well-formedness axioms at each step it is mentioned.
pub fn emit(theory: &CompletedTheory) -> Result<SmtInstance, EmitError> {
    let mut em = Emitter {
        theory,
        kinds: crate::transform::object_kinds(&theory.declarations),
        declarations: BTreeMap::new(),
        frames: BTreeSet::new(),
        atoms: BTreeMap::new(),
        relations: BTreeMap::new(),
        functions: BTreeMap::new(),
        reals: BTreeMap::new(),
    };
    let mut completion = Vec::new();
    let mut constraints = Vec::new();
    for key in &theory.atoms {
        let symbol = format!("holds_{}", key.mangle());
        em.declare(&symbol, SmtSort::Bool, format!("atom {key}"))?;
        em.atoms.insert(symbol, key.clone());
    }
    for (key, dom) in &theory.functions {
        em.declare(&key.mangle(), SmtSort::Int, format!("function term {key}"))?;
        em.functions.insert(key.mangle(), (key.clone(), dom.clone()));
    }
    for s in &theory.sentences {
        match s {
            Sentence::Equivalence { lhs, rhs } => {
                let l = em.formula(lhs)?;
                let r = em.formula(rhs)?;
                completion.push(Expr::Eq(Box::new(l), Box::new(r)));
            }
            Sentence::Constraint(body) => {
                let b = em.formula(body)?;
                constraints.push(Expr::not(b));
            }
        }
    }
    // Objects never mentioned still get unstepped parameters.
    let mentioned: BTreeSet<String> = em.frames.iter().map(|(o, _)| o.clone()).collect();
    for o in em.kinds.keys() {
        if !mentioned.contains(o) {
            em.frames.insert((o.clone(), None));
        }
    }
    let mut assertions = Vec::new();
    let mut frames = Vec::new();
    for (object, step) in em.frames.clone() {
        let kind = em.kinds[&object];
        let mut slots = Vec::new();
        for slot in kind.slots() {
            let symbol = qs::slot_symbol(&slot, &object, step);
            let at = step.map(|s| format!(" at step {s}")).unwrap_or_default();
            em.declare(&symbol, SmtSort::Real, format!("parameter {slot} of {object}{at}"))?;
            slots.push((slot, symbol));
        }
        for c in qs::domain_axioms(&object, kind, step) {
            assertions.push(Assertion { origin: Origin::DomainAxiom, expr: constraint_expr(&c) });
        }
        frames.push(ObjectFrame { object, kind, step, slots });
    }
    for (symbol, (_, dom)) in &em.functions {
        let (lo, hi) = match dom.iter().all(|d| matches!(d, Value::Int(_))) {
            true => {
                let ints: Vec<i64> = dom.iter().map(|d| if let Value::Int(i) = d { *i } else { 0 }).collect();
                (*ints.iter().min().unwrap(), *ints.iter().max().unwrap())
            }
            false => (0, dom.len() as i64 - 1),
        };
        let s = Expr::Sym(symbol.clone());
        assertions.push(Assertion {
            origin: Origin::FunctionBound,
            expr: Expr::And(vec![
                Expr::Cmp(CmpOp::Le, Box::new(Expr::Int(lo.into())), Box::new(s.clone())),
                Expr::Cmp(CmpOp::Le, Box::new(s), Box::new(Expr::Int(hi.into()))),
            ]),
        });
    }
    assertions.extend(completion.into_iter().map(|expr| Assertion { origin: Origin::Completion, expr }));
    for (symbol, (_, atom)) in &em.relations {
        let c = qs::encode_relation(atom)?;
        assertions.push(Assertion {
            origin: Origin::RelationDefinition,
            expr: Expr::Eq(Box::new(Expr::Sym(symbol.clone())), Box::new(constraint_expr(&c))),
        });
    }
    assertions.extend(constraints.into_iter().map(|expr| Assertion { origin: Origin::Constraint, expr }));
    let declarations: BTreeMap<String, SmtSort> = em.declarations.iter().map(|(k, (s, _))| (k.clone(), *s)).collect();
    let symmetry = symmetry_of(&assertions, &frames, &em.relations, &declarations);
    assertions.extend(break_symmetry(symmetry, &assertions, &frames, &em.relations).into_iter().map(|expr| Assertion { origin: Origin::SymmetryBreaking, expr }));
    for a in &assertions {
        let mut missing = None;
        a.expr.for_each_symbol(&mut |s| {
            if missing.is_none() && !declarations.contains_key(s) {
                missing = Some(s.to_string());
            }
        });
        if let Some(s) = missing {
            return Err(EmitError::Undeclared(s));
        }
    }
    let logic = if declarations.values().any(|s| *s == SmtSort::Int) { "QF_NIRA" } else { "QF_NRA" };
    Ok(SmtInstance {
        logic: logic.into(),
        declarations,
        assertions,
        frames,
        atoms: em.atoms,
        relations: em.relations,
        functions: em.functions,
        reals: em.reals,
        symmetry,
    })
}

// ---------------------------------------------------------------------------
// Symmetry breaking

/// Motions of the plane that preserve every assertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symmetry {
    None,
    Translation,
    /// Translations and rotations.
    Rigid,
}

type PointId = (usize, String);

fn coordinate_slots(frames: &[ObjectFrame]) -> BTreeMap<&str, (char, PointId)> {
    let mut out = BTreeMap::new();
    for (i, f) in frames.iter().enumerate() {
        for (slot, sym) in &f.slots {
            if let Some(axis @ ('x' | 'y')) = slot.chars().next() {
                out.insert(sym.as_str(), (axis, (i, slot[1..].to_string())));
            }
        }
    }
    out
}

fn family_symmetry(f: qs::Family) -> Symmetry {
    use qs::Family::*;
    match f {
        Rcc8 | Rcc5 | Orientation | Distance | LeftRight => Symmetry::Rigid,
        IntervalAlgebra | RectangleAlgebra | CardinalDirection => Symmetry::Translation,
    }
}

struct SymmetryCheck<'a> {
    coords: BTreeMap<&'a str, (char, PointId)>,
    sorts: &'a BTreeMap<String, SmtSort>,
}

impl SymmetryCheck<'_> {
    fn numeric(&self, e: &Expr) -> bool {
        match e {
            Expr::Int(_) | Expr::Real(_) | Expr::Add(_) | Expr::Sub(..) | Expr::Mul(_) | Expr::Neg(_) | Expr::ToReal(_) => true,
            Expr::Sym(s) => self.sorts.get(s).is_some_and(|s| *s != SmtSort::Bool),
            _ => false,
        }
    }

    fn mentions_coordinate(&self, e: &Expr) -> bool {
        let mut found = false;
        e.for_each_symbol(&mut |s| found |= self.coords.contains_key(s));
        found
    }

    fn comparison(&self, a: &Expr, b: &Expr) -> Symmetry {
        if !self.mentions_coordinate(a) && !self.mentions_coordinate(b) {
            return Symmetry::Rigid;
        }
        match (a, b) {
            (Expr::Sym(p), Expr::Sym(q)) if self.coords.get(p.as_str()).map(|c| c.0) == self.coords.get(q.as_str()).map(|c| c.0) => Symmetry::Translation,
            _ => Symmetry::None,
        }
    }

    fn formula(&self, e: &Expr) -> Symmetry {
        match e {
            Expr::Not(a) => self.formula(a),
            Expr::And(xs) | Expr::Or(xs) => xs.iter().map(|x| self.formula(x)).min().unwrap_or(Symmetry::Rigid),
            Expr::Implies(a, b) => self.formula(a).min(self.formula(b)),
            Expr::Eq(a, b) if self.numeric(a) || self.numeric(b) => self.comparison(a, b),
            Expr::Eq(a, b) => self.formula(a).min(self.formula(b)),
            Expr::Cmp(_, a, b) => self.comparison(a, b),
            _ => Symmetry::Rigid,
        }
    }

    /// `p = q` or `not (G & not (p = q))` with `p`, `q` coordinates on
    /// the same axis.
    fn guarded_equality(&self, e: &Expr) -> Option<(Option<Expr>, char, PointId, PointId)> {
        let (guard, eq) = match e {
            Expr::Eq(..) => (None, e),
            Expr::Not(inner) => match inner.as_ref() {
                Expr::And(xs) if xs.len() >= 2 => match xs.last() {
                    Some(Expr::Not(eq)) => (Some(Expr::And(xs[..xs.len() - 1].to_vec())), eq.as_ref()),
                    _ => return None,
                },
                _ => return None,
            },
            _ => return None,
        };
        let Expr::Eq(a, b) = eq else { return None };
        let (Expr::Sym(a), Expr::Sym(b)) = (a.as_ref(), b.as_ref()) else { return None };
        let (ax, p) = self.coords.get(a.as_str())?.clone();
        let (bx, q) = self.coords.get(b.as_str())?.clone();
        (ax == bx).then(|| if p <= q { (guard, ax, p, q) } else { (guard, ax, q, p) })
    }
}

/// The largest group of rigid motions under which the instance is
/// invariant, judged syntactically. Coordinate equalities are rotation
/// invariant only when the matching equality on the other axis occurs
/// under the same guard, so together they equate two points.
pub fn symmetry_of(
    assertions: &[Assertion],
    frames: &[ObjectFrame],
    relations: &BTreeMap<String, (GroundKey, RelationAtom)>,
    sorts: &BTreeMap<String, SmtSort>,
) -> Symmetry {
    let check = SymmetryCheck { coords: coordinate_slots(frames), sorts };
    let mut level = Symmetry::Rigid;
    let mut halves: BTreeMap<(String, PointId, PointId), BTreeSet<char>> = BTreeMap::new();
    for a in assertions {
        match a.origin {
            Origin::DomainAxiom | Origin::FunctionBound | Origin::SymmetryBreaking => {}
            Origin::RelationDefinition => {
                if let Expr::Eq(lhs, _) = &a.expr {
                    if let Expr::Sym(s) = lhs.as_ref() {
                        let family = relations.get(s).and_then(|(_, atom)| qs::catalog().get(&atom.relation)).map(|r| r.family);
                        level = level.min(family.map(family_symmetry).unwrap_or(Symmetry::None));
                    }
                }
            }
            Origin::Completion | Origin::Constraint => match check.guarded_equality(&a.expr) {
                Some((guard, axis, p, q)) => {
                    level = level.min(guard.as_ref().map(|g| check.formula(g)).unwrap_or(Symmetry::Rigid));
                    let key = (guard.map(|g| g.to_string()).unwrap_or_default(), p, q);
                    halves.entry(key).or_default().insert(axis);
                }
                None => level = level.min(check.formula(&a.expr)),
            },
        }
    }
    if level == Symmetry::Rigid && halves.values().any(|axes| axes.len() < 2) {
        level = Symmetry::Translation;
    }
    level
}

/// Pin one point to the origin and, under rotations, a second point to
/// the non-negative x axis. The two objects of the first asserted
/// relation fact are preferred; otherwise points are taken in frame order.
fn break_symmetry(symmetry: Symmetry, assertions: &[Assertion], frames: &[ObjectFrame], relations: &BTreeMap<String, (GroundKey, RelationAtom)>) -> Vec<Expr> {
    let frame_points = |f: &ObjectFrame| {
        let mut pts = Vec::new();
        for (slot, sym) in &f.slots {
            if let Some(rest) = slot.strip_prefix('x') {
                if let Some((_, ysym)) = f.slots.iter().find(|(s, _)| s.strip_prefix('y') == Some(rest)) {
                    pts.push((sym.clone(), ysym.clone()));
                }
            }
        }
        pts
    };
    let mut points: Vec<(String, String)> = Vec::new();
    let fact = assertions.iter().filter(|a| a.origin == Origin::Constraint).find_map(|a| match &a.expr {
        Expr::Sym(s) => relations.get(s).filter(|(_, atom)| atom.objects.len() >= 2).map(|(_, atom)| atom),
        _ => None,
    });
    if let Some(atom) = fact {
        for (o, _) in &atom.objects {
            if let Some(f) = frames.iter().find(|f| f.object == *o && f.step == atom.step) {
                points.extend(frame_points(f).into_iter().take(1));
            }
        }
    }
    for f in frames {
        points.extend(frame_points(f));
    }
    let mut seen = BTreeSet::new();
    points.retain(|p| seen.insert(p.clone()));
    let zero = || Box::new(Expr::Real(BigRational::zero()));
    let sym = |s: &str| Box::new(Expr::Sym(s.to_string()));
    let mut out = Vec::new();
    if symmetry >= Symmetry::Translation {
        if let Some((x, y)) = points.first() {
            out.push(Expr::Eq(sym(x), zero()));
            out.push(Expr::Eq(sym(y), zero()));
        }
    }
    if symmetry == Symmetry::Rigid {
        if let Some((x, y)) = points.get(1) {
            out.push(Expr::Eq(sym(y), zero()));
            out.push(Expr::Cmp(CmpOp::Ge, sym(x), zero()));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Solving

/// z3's default strategy stalls on the Boolean structure of completions
/// over nonlinear constraints; preprocessing followed by nlsat does not.
pub const Z3_TACTIC: &str = "tactic.default_tactic=(then simplify propagate-values solve-eqs ctx-simplify (or-else qfnra-nlsat smt))";

/// Extra arguments placed before the instance path for known solvers.
pub fn default_solver_args(solver: &str) -> Vec<String> {
    let name = std::path::Path::new(solver).file_stem().and_then(|s| s.to_str()).unwrap_or("");
    if name == "z3" {
        vec![Z3_TACTIC.to_string()]
    } else {
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub solver: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    /// `solver` with its default arguments.
    pub fn new(solver: &str, timeout: Duration) -> Self {
        SolverConfig { solver: solver.into(), args: default_solver_args(solver), timeout }
    }

    /// `$ASPMTQS_SOLVER` if set, else `z3`, with a 60 s timeout.
    pub fn from_env() -> Self {
        let solver = std::env::var("ASPMTQS_SOLVER").unwrap_or_else(|_| "z3".into());
        SolverConfig::new(&solver, Duration::from_secs(60))
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SmtError {
    #[error("cannot run solver `{solver}`: {message}")]
    SolverLaunch { solver: String, message: String },
    #[error("unexpected solver output: {0}")]
    Protocol(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Unknown => "UNKNOWN",
        })
    }
}

/// The solver's answer before decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawVerdict {
    pub status: Status,
    pub bindings: BTreeMap<String, ModelValue>,
    pub timed_out: bool,
    pub elapsed: Duration,
}

/// Run the solver on SMT-LIB text written to a temporary file.
pub fn solve_text(text: &str, config: &SolverConfig) -> Result<RawVerdict, SmtError> {
    let mut file = tempfile::Builder::new().suffix(".smt2").tempfile().map_err(|e| SmtError::Io(e.to_string()))?;
    file.write_all(text.as_bytes()).map_err(|e| SmtError::Io(e.to_string()))?;
    file.flush().map_err(|e| SmtError::Io(e.to_string()))?;
    let start = Instant::now();
    let mut child = Command::new(&config.solver)
        .args(&config.args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SmtError::SolverLaunch { solver: config.solver.clone(), message: e.to_string() })?;
    let mut stdout = child.stdout.take().unwrap();
    let mut stderr = child.stderr.take().unwrap();
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let mut timed_out = false;
    let status = loop {
        match child.try_wait().map_err(|e| SmtError::Io(e.to_string()))? {
            Some(status) => break Some(status),
            None if start.elapsed() >= config.timeout => {
                let _ = child.kill();
                let _ = child.wait();
                timed_out = true;
                break None;
            }
            None => std::thread::sleep(Duration::from_millis(2)),
        }
    };
    let elapsed = start.elapsed();
    let output = reader.join().unwrap_or_default();
    let errors = err_reader.join().unwrap_or_default();
    if timed_out {
        return Ok(RawVerdict { status: Status::Unknown, bindings: BTreeMap::new(), timed_out, elapsed });
    }
    let trimmed = output.trim_start();
    let (first, rest) = trimmed.split_once('\n').unwrap_or((trimmed, ""));
    let verdict = match first.trim() {
        "sat" => Status::Sat,
        "unsat" => Status::Unsat,
        "unknown" => Status::Unknown,
        other => {
            let ok = status.map(|s| s.success()).unwrap_or(false);
            if output.trim().is_empty() && !ok {
                return Err(SmtError::SolverLaunch { solver: config.solver.clone(), message: errors.trim().to_string() });
            }
            let shown = if other.is_empty() { errors.trim() } else { other };
            return Err(SmtError::Protocol(shown.to_string()));
        }
    };
    let bindings = if verdict == Status::Sat {
        parse_solver_model(rest).map_err(|e| SmtError::Protocol(e.message))?.into_iter().map(|b| (b.symbol, b.value)).collect()
    } else {
        BTreeMap::new()
    };
    Ok(RawVerdict { status: verdict, bindings, timed_out: false, elapsed })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectValues {
    pub object: String,
    pub kind: SpatialKind,
    pub step: Option<i64>,
    pub values: Vec<(String, ModelValue)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpatialModel {
    pub objects: Vec<ObjectValues>,
    /// Intensional ground atoms, rendered in input syntax.
    pub atoms: BTreeMap<String, bool>,
    /// Spatial relation atoms mentioned by the program.
    pub relations: BTreeMap<String, bool>,
    pub functions: BTreeMap<String, String>,
    pub reals: BTreeMap<String, ModelValue>,
    /// Every solver binding by symbol.
    pub raw: BTreeMap<String, ModelValue>,
}

impl SpatialModel {
    pub fn true_atoms(&self) -> Vec<&str> {
        self.atoms.iter().filter(|(_, v)| **v).map(|(k, _)| k.as_str()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverVerdict {
    pub status: Status,
    pub model: Option<SpatialModel>,
    pub timed_out: bool,
    pub elapsed: Duration,
}

fn default_for(sort: SmtSort) -> ModelValue {
    match sort {
        SmtSort::Bool => ModelValue::Bool(false),
        SmtSort::Int => ModelValue::Int(BigInt::zero()),
        SmtSort::Real => ModelValue::Rational(BigRational::zero()),
    }
}

/// Rebuild the spatial model from the solver's bindings; symbols the
/// solver left out take the default value of their sort.
pub fn decode(instance: &SmtInstance, bindings: &BTreeMap<String, ModelValue>) -> SpatialModel {
    let get = |s: &str| bindings.get(s).cloned().unwrap_or_else(|| default_for(instance.declarations[s]));
    let is_true = |s: &str| get(s) == ModelValue::Bool(true);
    let objects = instance
        .frames
        .iter()
        .map(|f| ObjectValues {
            object: f.object.clone(),
            kind: f.kind,
            step: f.step,
            values: f.slots.iter().map(|(slot, sym)| (slot.clone(), get(sym))).collect(),
        })
        .collect();
    let atoms = instance.atoms.iter().map(|(s, k)| (k.to_string(), is_true(s))).collect();
    let relations = instance.relations.iter().map(|(s, (k, _))| (k.to_string(), is_true(s))).collect();
    let functions = instance
        .functions
        .iter()
        .map(|(s, (k, dom))| {
            let shown = match get(s) {
                ModelValue::Int(code) => {
                    if dom.iter().all(|d| matches!(d, Value::Int(_))) {
                        code.to_string()
                    } else {
                        usize::try_from(&code).ok().and_then(|i| dom.get(i)).map(|v| v.to_string()).unwrap_or_else(|| code.to_string())
                    }
                }
                other => other.to_string(),
            };
            (k.to_string(), shown)
        })
        .collect();
    let reals = instance.reals.iter().map(|(s, k)| (k.to_string(), get(s))).collect();
    let mut raw = BTreeMap::new();
    for s in instance.declarations.keys() {
        raw.insert(s.clone(), get(s));
    }
    SpatialModel { objects, atoms, relations, functions, reals, raw }
}

pub fn solve(instance: &SmtInstance, config: &SolverConfig) -> Result<SolverVerdict, SmtError> {
    let raw = solve_text(&instance.text(), config)?;
    let model = (raw.status == Status::Sat).then(|| decode(instance, &raw.bindings));
    Ok(SolverVerdict { status: raw.status, model, timed_out: raw.timed_out, elapsed: raw.elapsed })
}

// ---------------------------------------------------------------------------
// Model soundness

#[derive(Clone, Debug)]
struct Num {
    value: BigRational,
    exact: bool,
}

#[derive(Clone, Debug)]
enum EVal {
    B(bool),
    N(Num),
}

fn tolerance(a: &BigRational, b: &BigRational) -> BigRational {
    let one = BigRational::one();
    let m = [one.clone(), a.abs(), b.abs()].into_iter().max().unwrap();
    m * BigRational::new(BigInt::one(), BigInt::from(1_000_000_000u64))
}

fn compare(op: CmpOp, a: &Num, b: &Num) -> bool {
    if a.exact && b.exact {
        return op.holds(a.value.cmp(&b.value));
    }
    let tol = tolerance(&a.value, &b.value);
    let diff = &a.value - &b.value;
    match op {
        CmpOp::Eq => diff.abs() <= tol,
        CmpOp::Ne => true,
        CmpOp::Lt | CmpOp::Le => diff <= tol,
        CmpOp::Gt | CmpOp::Ge => diff >= -tol,
    }
}

fn eval_expr(e: &Expr, values: &BTreeMap<String, ModelValue>) -> Option<EVal> {
    let num = |e: &Expr| match eval_expr(e, values)? {
        EVal::N(n) => Some(n),
        EVal::B(_) => None,
    };
    let boolean = |e: &Expr| match eval_expr(e, values)? {
        EVal::B(b) => Some(b),
        EVal::N(_) => None,
    };
    Some(match e {
        Expr::Bool(b) => EVal::B(*b),
        Expr::Int(i) => EVal::N(Num { value: BigRational::from_integer(i.clone()), exact: true }),
        Expr::Real(q) => EVal::N(Num { value: q.clone(), exact: true }),
        Expr::Sym(s) => match values.get(s)? {
            ModelValue::Bool(b) => EVal::B(*b),
            v => EVal::N(Num { value: v.as_rational()?, exact: v.is_exact() }),
        },
        Expr::Not(a) => EVal::B(!boolean(a)?),
        Expr::And(xs) => EVal::B(xs.iter().map(&boolean).collect::<Option<Vec<_>>>()?.into_iter().all(|b| b)),
        Expr::Or(xs) => EVal::B(xs.iter().map(&boolean).collect::<Option<Vec<_>>>()?.into_iter().any(|b| b)),
        Expr::Implies(a, b) => EVal::B(!boolean(a)? || boolean(b)?),
        Expr::Eq(a, b) => match (eval_expr(a, values)?, eval_expr(b, values)?) {
            (EVal::B(x), EVal::B(y)) => EVal::B(x == y),
            (EVal::N(x), EVal::N(y)) => EVal::B(compare(CmpOp::Eq, &x, &y)),
            _ => return None,
        },
        Expr::Cmp(op, a, b) => EVal::B(compare(*op, &num(a)?, &num(b)?)),
        Expr::Add(xs) | Expr::Mul(xs) => {
            let add = matches!(e, Expr::Add(_));
            let mut acc = Num { value: if add { BigRational::zero() } else { BigRational::one() }, exact: true };
            for x in xs {
                let n = num(x)?;
                acc.value = if add { acc.value + n.value } else { acc.value * n.value };
                acc.exact &= n.exact;
            }
            EVal::N(acc)
        }
        Expr::Sub(a, b) => {
            let (x, y) = (num(a)?, num(b)?);
            EVal::N(Num { value: x.value - y.value, exact: x.exact && y.exact })
        }
        Expr::Neg(a) => {
            let x = num(a)?;
            EVal::N(Num { value: -x.value, exact: x.exact })
        }
        Expr::ToReal(a) => EVal::N(num(a)?),
    })
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("assertion {index} fails under the returned model: {assertion}")]
pub struct SoundnessError {
    pub index: usize,
    pub assertion: String,
}

/// Re-evaluate every assertion at the model's values: exactly for rational
/// values, within a relative 1e-9 when algebraic approximations occur.
/// Relation atoms marked true are also checked against a direct exact
/// evaluation of their encodings when all their parameters are rational.
pub fn check_model(instance: &SmtInstance, model: &SpatialModel) -> Result<(), SoundnessError> {
    for (index, a) in instance.assertions.iter().enumerate() {
        match eval_expr(&a.expr, &model.raw) {
            Some(EVal::B(true)) => {}
            _ => return Err(SoundnessError { index, assertion: a.expr.to_string() }),
        }
    }
    for (symbol, (key, atom)) in &instance.relations {
        if model.raw.get(symbol) != Some(&ModelValue::Bool(true)) {
            continue;
        }
        let mut assignment = BTreeMap::new();
        let mut exact = true;
        for f in instance.frames.iter().filter(|f| atom.objects.iter().any(|(o, _)| *o == f.object) && f.step == atom.step) {
            for (_, sym) in &f.slots {
                match model.raw.get(sym) {
                    Some(v) if v.is_exact() => {
                        assignment.insert(sym.clone(), v.as_rational().unwrap());
                    }
                    _ => exact = false,
                }
            }
        }
        if exact && qs::evaluate_relation(atom, &assignment) != Ok(true) {
            return Err(SoundnessError { index: usize::MAX, assertion: format!("relation {key}") });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::compile_source;

    fn instance(src: &str) -> SmtInstance {
        compile_source(src).unwrap().instance
    }

    #[test]
    fn lone_circle_gets_parameters_and_radius_axiom() {
        let i = instance("objects a :: circle.");
        let text = i.text();
        for s in ["(declare-fun x_a () Real)", "(declare-fun y_a () Real)", "(declare-fun r_a () Real)", "(assert (> r_a 0.0))"] {
            assert!(text.contains(s), "{text}");
        }
        assert!(text.starts_with("(set-logic QF_NRA)\n"));
        assert!(text.ends_with("(check-sat)\n(get-model)\n"));
    }

    #[test]
    fn facts_define_and_assert_relations() {
        let text = instance("objects a, b, c :: circle. rccDR(a,b). rccDR(b,c). rccPP(a,c).").text();
        assert!(text.contains("(assert (= holds_rccDR_a_b (>= (+ (* (- x_a x_b) (- x_a x_b)) (* (- y_a y_b) (- y_a y_b))) (* (+ r_a r_b) (+ r_a r_b)))))"), "{text}");
        assert!(text.contains("(assert holds_rccDR_a_b)"));
        assert!(text.contains("(assert holds_rccPP_a_c)"));
    }

    #[test]
    fn undefined_atom_is_false() {
        let text = instance("constants s :: boolean.").text();
        assert!(text.contains("(assert (= holds_s false))"), "{text}");
    }

    #[test]
    fn finite_functions_are_bounded_ints() {
        let i = instance("sorts v :: 0..2. constants f :: v.");
        assert_eq!(i.logic, "QF_NIRA");
        assert!(i.text().contains("(assert (and (<= 0 f) (<= f 2)))"));
    }

    #[test]
    fn literals_render_in_smtlib() {
        assert_eq!(Expr::Real(BigRational::new((-1).into(), 3.into())).to_string(), "(- (/ 1.0 3.0))");
        assert_eq!(Expr::Real(BigRational::new(5.into(), 4.into())).to_string(), "1.25");
        assert_eq!(Expr::Int((-2).into()).to_string(), "(- 2)");
    }

    #[test]
    fn soundness_flags_wrong_values() {
        let i = instance("objects a :: circle.");
        let mut raw = BTreeMap::new();
        raw.insert("r_a".to_string(), ModelValue::Rational(BigRational::one()));
        let good = decode(&i, &raw);
        assert!(check_model(&i, &good).is_ok());
        raw.insert("r_a".to_string(), ModelValue::Rational(-BigRational::one()));
        let bad = decode(&i, &raw);
        assert!(check_model(&i, &bad).is_err());
    }

    #[test]
    fn missing_solver_is_a_launch_error() {
        let cfg = SolverConfig::new("/nonexistent/solver-binary", Duration::from_secs(5));
        assert!(matches!(solve_text("(check-sat)", &cfg), Err(SmtError::SolverLaunch { .. })));
    }
}
