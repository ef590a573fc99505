//! Abstract syntax shared by every stage of the pipeline.
//!
//! A [`Program`] is four declaration blocks (sorts, objects, constants,
//! variables) followed by rules. Formulas are connective trees over atoms,
//! function equalities and arithmetic comparisons; negation is stored as an
//! implication into `false`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::parser::SourceSpan;
use crate::qs::{self, SpatialKind};

/// Reference to a sort at a use site (argument, result or variable type).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SortRef {
    Named(String),
    /// `polygon(n)`; the vertex count is fixed where the sort is written.
    Polygon(usize),
    Boolean,
    Real,
}

impl SortRef {
    pub fn named(name: &str) -> Self {
        SortRef::Named(name.to_string())
    }

    /// Built-in spatial kind denoted by this reference, if any.
    pub fn spatial_kind(&self) -> Option<SpatialKind> {
        match self {
            SortRef::Polygon(n) => Some(SpatialKind::Polygon(*n)),
            SortRef::Named(name) => SpatialKind::from_name(name),
            _ => None,
        }
    }
}

impl fmt::Display for SortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortRef::Named(n) => f.write_str(n),
            SortRef::Polygon(n) => write!(f, "polygon({n})"),
            SortRef::Boolean => f.write_str("boolean"),
            SortRef::Real => f.write_str("real"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SortKind {
    /// Bounded integer sort `lo..hi` (inclusive).
    Range { lo: i64, hi: i64 },
    /// Finite sort with the members listed inline; `objects` may add more.
    Enumerated(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortDecl {
    pub name: String,
    pub kind: SortKind,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectDecl {
    pub name: String,
    pub sort: SortRef,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantDecl {
    pub name: String,
    pub args: Vec<SortRef>,
    pub result: SortRef,
    pub span: SourceSpan,
}

impl ConstantDecl {
    pub fn is_predicate(&self) -> bool {
        self.result == SortRef::Boolean
    }

    /// Real-valued constants are free solver unknowns; everything else is
    /// part of the intensional signature.
    pub fn is_intensional(&self) -> bool {
        self.result != SortRef::Real
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub sort: SortRef,
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Ge => ord != Less,
            CmpOp::Gt => ord == Greater,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    /// Bare lowercase identifier: an object name.
    Sym(String),
    Int(i64),
    /// Exact decimal literal.
    Num(BigRational),
    /// Function application; zero-argument applications are 0-ary constants.
    App(String, Vec<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    /// The value variable `y` of a Clark normal form function definition.
    Placeholder,
}

impl Term {
    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.to_string(), args)
    }

    pub fn sym(name: &str) -> Term {
        Term::Sym(name.to_string())
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn is_ground(&self) -> bool {
        let mut vars = BTreeSet::new();
        self.collect_vars(&mut vars);
        vars.is_empty()
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Neg(a) => a.collect_vars(out),
            Term::Sym(_) | Term::Int(_) | Term::Num(_) | Term::Placeholder => {}
        }
    }

    /// Visit every function application (outermost first).
    pub fn for_each_app<'a>(&'a self, f: &mut dyn FnMut(&'a str, &'a [Term])) {
        match self {
            Term::App(name, args) => {
                f(name, args);
                args.iter().for_each(|a| a.for_each_app(f));
            }
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                a.for_each_app(f);
                b.for_each_app(f);
            }
            Term::Neg(a) => a.for_each_app(f),
            _ => {}
        }
    }

    pub fn mentions_function(&self, name: &str) -> bool {
        let mut found = false;
        self.for_each_app(&mut |n, _| found |= n == name);
        found
    }

    pub fn substitute(&self, binding: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => binding.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| a.substitute(binding)).collect()),
            Term::Add(a, b) => Term::Add(Box::new(a.substitute(binding)), Box::new(b.substitute(binding))),
            Term::Sub(a, b) => Term::Sub(Box::new(a.substitute(binding)), Box::new(b.substitute(binding))),
            Term::Mul(a, b) => Term::Mul(Box::new(a.substitute(binding)), Box::new(b.substitute(binding))),
            Term::Neg(a) => Term::Neg(Box::new(a.substitute(binding))),
            _ => self.clone(),
        }
    }

    pub fn replace_placeholder(&self, with: &Term) -> Term {
        match self {
            Term::Placeholder => with.clone(),
            Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| a.replace_placeholder(with)).collect()),
            Term::Add(a, b) => Term::Add(Box::new(a.replace_placeholder(with)), Box::new(b.replace_placeholder(with))),
            Term::Sub(a, b) => Term::Sub(Box::new(a.replace_placeholder(with)), Box::new(b.replace_placeholder(with))),
            Term::Mul(a, b) => Term::Mul(Box::new(a.replace_placeholder(with)), Box::new(b.replace_placeholder(with))),
            Term::Neg(a) => Term::Neg(Box::new(a.replace_placeholder(with))),
            _ => self.clone(),
        }
    }

    /// Evaluate a closed integer expression (literals and `+ - *` only).
    pub fn eval_int(&self) -> Option<i64> {
        match self {
            Term::Int(i) => Some(*i),
            Term::Add(a, b) => a.eval_int()?.checked_add(b.eval_int()?),
            Term::Sub(a, b) => a.eval_int()?.checked_sub(b.eval_int()?),
            Term::Mul(a, b) => a.eval_int()?.checked_mul(b.eval_int()?),
            Term::Neg(a) => a.eval_int()?.checked_neg(),
            _ => None,
        }
    }

    pub fn is_arith(&self) -> bool {
        matches!(self, Term::Add(..) | Term::Sub(..) | Term::Mul(..) | Term::Neg(..))
    }

    fn precedence(&self) -> u8 {
        match self {
            Term::Add(..) | Term::Sub(..) => 1,
            Term::Mul(..) => 2,
            Term::Neg(..) => 3,
            Term::Int(i) if *i < 0 => 3,
            Term::Num(n) if n.is_negative() => 3,
            _ => 4,
        }
    }
}

/// Render an exact rational as a decimal literal when it has a finite
/// decimal expansion.
pub fn format_decimal(value: &BigRational) -> String {
    if value.is_integer() {
        return format!("{}.0", value.to_integer());
    }
    let mut denom = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    // Only denominators of the form 2^a 5^b have a finite expansion.
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    let scale = twos.max(fives);
    let factor = BigInt::from(10).pow(scale as u32);
    if !denom.is_one() {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let scaled = (value * BigRational::from_integer(factor.clone())).to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let padded = if digits.len() <= scale {
        format!("{}{}", "0".repeat(scale - digits.len() + 1), digits)
    } else {
        digits
    };
    let (int_part, frac_part) = padded.split_at(padded.len() - scale);
    format!("{}{}.{}", if negative { "-" } else { "" }, int_part, frac_part)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
            if t.precedence() < min {
                write!(f, "({t})")
            } else {
                write!(f, "{t}")
            }
        }
        match self {
            Term::Var(v) | Term::Sym(v) => f.write_str(v),
            Term::Int(i) => write!(f, "{i}"),
            Term::Num(n) => f.write_str(&format_decimal(n)),
            Term::App(n, args) if args.is_empty() => f.write_str(n),
            Term::App(n, args) => {
                write!(f, "{n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Term::Add(a, b) => {
                child(f, a, 1)?;
                f.write_str(" + ")?;
                child(f, b, 2)
            }
            Term::Sub(a, b) => {
                child(f, a, 1)?;
                f.write_str(" - ")?;
                child(f, b, 2)
            }
            Term::Mul(a, b) => {
                child(f, a, 2)?;
                f.write_str(" * ")?;
                child(f, b, 3)
            }
            Term::Neg(a) => {
                f.write_str("-")?;
                child(f, a, 4)
            }
            Term::Placeholder => f.write_str("_y"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom { pred: String, args: Vec<Term> },
    /// `f(t) = u` where the left side is a function application.
    FnEq { func: Term, value: Term },
    /// Arithmetic (or object) comparison.
    Cmp { lhs: Term, op: CmpOp, rhs: Term },
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Top,
    Bottom,
}

impl Formula {
    pub fn atom(pred: &str, args: Vec<Term>) -> Formula {
        Formula::Atom { pred: pred.to_string(), args }
    }

    pub fn fn_eq(func: Term, value: Term) -> Formula {
        Formula::FnEq { func, value }
    }

    pub fn cmp(lhs: Term, op: CmpOp, rhs: Term) -> Formula {
        Formula::Cmp { lhs, op, rhs }
    }

    /// `not F`, stored as `F -> false`.
    pub fn not(f: Formula) -> Formula {
        Formula::Implies(Box::new(f), Box::new(Formula::Bottom))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Conjunction with the empty and singleton cases collapsed.
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::Top,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    pub fn or(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::Bottom,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    /// If this is `G -> false`, return `G`.
    pub fn as_negation(&self) -> Option<&Formula> {
        match self {
            Formula::Implies(g, h) if **h == Formula::Bottom => Some(g),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atom { .. } | Formula::FnEq { .. } | Formula::Cmp { .. })
    }

    /// Structural validity: connective child counts match node kinds and
    /// function equalities have an application on the left.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Formula::And(cs) | Formula::Or(cs) => cs.len() >= 2 && cs.iter().all(Formula::is_well_formed),
            Formula::Implies(a, b) => a.is_well_formed() && b.is_well_formed(),
            Formula::FnEq { func, .. } => matches!(func, Term::App(..)),
            _ => true,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
            Formula::FnEq { func, value } => {
                func.collect_vars(out);
                value.collect_vars(out);
            }
            Formula::Cmp { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.collect_vars(out)),
            Formula::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Top | Formula::Bottom => {}
        }
    }

    /// Visit every atomic subformula.
    pub fn for_each_atomic<'a>(&'a self, f: &mut dyn FnMut(&'a Formula)) {
        match self {
            Formula::Atom { .. } | Formula::FnEq { .. } | Formula::Cmp { .. } => f(self),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.for_each_atomic(f)),
            Formula::Implies(a, b) => {
                a.for_each_atomic(f);
                b.for_each_atomic(f);
            }
            Formula::Top | Formula::Bottom => {}
        }
    }

    /// Visit every term occurring at the top of an atomic formula.
    pub fn for_each_term<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        self.for_each_atomic(&mut |a| match a {
            Formula::Atom { args, .. } => args.iter().for_each(&mut *f),
            Formula::FnEq { func, value } => {
                f(func);
                f(value);
            }
            Formula::Cmp { lhs, rhs, .. } => {
                f(lhs);
                f(rhs);
            }
            _ => {}
        });
    }

    pub fn map_terms(&self, g: &dyn Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::Atom { pred, args } => Formula::Atom { pred: pred.clone(), args: args.iter().map(g).collect() },
            Formula::FnEq { func, value } => Formula::FnEq { func: g(func), value: g(value) },
            Formula::Cmp { lhs, op, rhs } => Formula::Cmp { lhs: g(lhs), op: *op, rhs: g(rhs) },
            Formula::And(cs) => Formula::And(cs.iter().map(|c| c.map_terms(g)).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(|c| c.map_terms(g)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.map_terms(g), b.map_terms(g)),
            Formula::Top | Formula::Bottom => self.clone(),
        }
    }

    pub fn substitute(&self, binding: &BTreeMap<String, Term>) -> Formula {
        self.map_terms(&|t| t.substitute(binding))
    }

    pub fn replace_placeholder(&self, with: &Term) -> Formula {
        self.map_terms(&|t| t.replace_placeholder(with))
    }

    /// Removal of `true`/`false` constants and flattening of nested
    /// conjunctions and disjunctions. Double negations are kept.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::And(cs) => {
                let mut out = Vec::new();
                for c in cs.iter().map(Formula::simplify) {
                    match c {
                        Formula::Top => {}
                        Formula::Bottom => return Formula::Bottom,
                        Formula::And(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                Formula::and(out)
            }
            Formula::Or(cs) => {
                let mut out = Vec::new();
                for c in cs.iter().map(Formula::simplify) {
                    match c {
                        Formula::Bottom => {}
                        Formula::Top => return Formula::Top,
                        Formula::Or(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                Formula::or(out)
            }
            Formula::Implies(a, b) => {
                let a = a.simplify();
                let b = b.simplify();
                match (&a, &b) {
                    (Formula::Bottom, _) | (_, Formula::Top) => Formula::Top,
                    (Formula::Top, _) => b,
                    _ => Formula::implies(a, b),
                }
            }
            other => other.clone(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(_, h) if **h != Formula::Bottom => 0,
            Formula::Or(_) => 1,
            Formula::And(_) => 2,
            Formula::Implies(..) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, g: &Formula, min: u8) -> fmt::Result {
            if g.precedence() < min {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        }
        match self {
            Formula::Atom { pred, args } => write!(f, "{}", Term::App(pred.clone(), args.clone())),
            Formula::FnEq { func, value } => write!(f, "{func} = {value}"),
            Formula::Cmp { lhs, op, rhs } => write!(f, "{lhs} {op} {rhs}"),
            Formula::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    child(f, c, 3)?;
                }
                Ok(())
            }
            Formula::Or(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    child(f, c, 2)?;
                }
                Ok(())
            }
            Formula::Implies(g, h) if **h == Formula::Bottom => {
                f.write_str("not ")?;
                child(f, g, 3)
            }
            Formula::Implies(g, h) => {
                child(f, g, 1)?;
                f.write_str(" -> ")?;
                child(f, h, 0)
            }
            Formula::Top => f.write_str("true"),
            Formula::Bottom => f.write_str("false"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    /// An atom, a function equality, or `false` for constraints. Before the
    /// spatial-head stage this may also be a formula over spatial symbols.
    pub head: Formula,
    pub body: Formula,
    /// `{H} <- B`: the head is a default that may, but need not, hold.
    pub choice: bool,
    pub span: SourceSpan,
}

impl Rule {
    pub fn new(head: Formula, body: Formula) -> Rule {
        Rule { head, body, choice: false, span: SourceSpan::default() }
    }

    pub fn constraint(body: Formula) -> Rule {
        Rule::new(Formula::Bottom, body)
    }

    pub fn is_constraint(&self) -> bool {
        self.head == Formula::Bottom
    }

    /// The rule read as the formula `body -> head`.
    pub fn as_formula(&self) -> Formula {
        Formula::implies(self.body.clone(), self.head.clone())
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.head.collect_vars(&mut out);
        self.body.collect_vars(&mut out);
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body_is_top = self.body == Formula::Top;
        if self.choice {
            write!(f, "{{{}}}", self.head)?;
        } else if self.head != Formula::Bottom {
            if self.head.precedence() == 0 {
                write!(f, "({})", self.head)?;
            } else {
                write!(f, "{}", self.head)?;
            }
        }
        if !body_is_top || self.head == Formula::Bottom {
            if self.head == Formula::Bottom && !self.choice {
                write!(f, "<- {}", self.body)?;
            } else {
                write!(f, " <- {}", self.body)?;
            }
        }
        f.write_str(".")
    }
}

/// The intensional constants `c`: predicates and finite-valued functions
/// whose extension is fixed by the rules.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntensionalSignature {
    pub predicates: BTreeSet<String>,
    pub functions: BTreeSet<String>,
}

impl IntensionalSignature {
    pub fn contains(&self, name: &str) -> bool {
        self.predicates.contains(name) || self.functions.contains(name)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub sorts: Vec<SortDecl>,
    pub objects: Vec<ObjectDecl>,
    pub constants: Vec<ConstantDecl>,
    pub variables: Vec<VariableDecl>,
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts.iter().find(|s| s.name == name)
    }

    pub fn object(&self, name: &str) -> Option<&ObjectDecl> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<&ConstantDecl> {
        self.constants.iter().find(|c| c.name == name)
    }

    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Spatial kind of a declared object.
    pub fn object_kind(&self, name: &str) -> Option<SpatialKind> {
        self.object(name).and_then(|o| o.sort.spatial_kind())
    }

    pub fn signature(&self) -> IntensionalSignature {
        let mut sig = IntensionalSignature::default();
        for c in self.constants.iter().filter(|c| c.is_intensional()) {
            if c.is_predicate() {
                sig.predicates.insert(c.name.clone());
            } else {
                sig.functions.insert(c.name.clone());
            }
        }
        sig
    }

    /// Names of every enumerated-sort member, inline or declared as object.
    pub fn enum_members(&self, sort: &str) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(SortDecl { kind: SortKind::Enumerated(m), .. }) = self.sort(sort) {
            out.extend(m.iter().cloned());
        }
        for o in &self.objects {
            if o.sort == SortRef::named(sort) && !out.contains(&o.name) {
                out.push(o.name.clone());
            }
        }
        out
    }

    /// Sort an object-like name belongs to (declared objects and inline
    /// enumeration members).
    pub fn sort_of_object(&self, name: &str) -> Option<SortRef> {
        if let Some(o) = self.object(name) {
            return Some(o.sort.clone());
        }
        self.sorts.iter().find_map(|s| match &s.kind {
            SortKind::Enumerated(m) if m.iter().any(|x| x == name) => Some(SortRef::Named(s.name.clone())),
            _ => None,
        })
    }

    /// Whether `name` is a real-valued function: a built-in parametric
    /// function or a declared `:: real` constant.
    pub fn is_real_function(&self, name: &str) -> bool {
        match self.constant(name) {
            Some(c) => c.result == SortRef::Real,
            None => qs::is_parametric_function(name),
        }
    }

    /// Copy with every source span reset, for structural comparison.
    pub fn without_spans(&self) -> Program {
        let mut p = self.clone();
        p.sorts.iter_mut().for_each(|d| d.span = SourceSpan::default());
        p.objects.iter_mut().for_each(|d| d.span = SourceSpan::default());
        p.constants.iter_mut().for_each(|d| d.span = SourceSpan::default());
        p.variables.iter_mut().for_each(|d| d.span = SourceSpan::default());
        p.rules.iter_mut().for_each(|d| d.span = SourceSpan::default());
        p
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.sorts.is_empty() {
            writeln!(f, "sorts")?;
            for s in &self.sorts {
                match &s.kind {
                    SortKind::Range { lo, hi } => writeln!(f, "  {} :: {lo}..{hi}.", s.name)?,
                    SortKind::Enumerated(m) => writeln!(f, "  {} :: {{{}}}.", s.name, m.join(", "))?,
                }
            }
        }
        if !self.objects.is_empty() {
            writeln!(f, "objects")?;
            for o in &self.objects {
                writeln!(f, "  {} :: {}.", o.name, o.sort)?;
            }
        }
        if !self.constants.is_empty() {
            writeln!(f, "constants")?;
            for c in &self.constants {
                if c.args.is_empty() {
                    writeln!(f, "  {} :: {}.", c.name, c.result)?;
                } else {
                    let args: Vec<String> = c.args.iter().map(|a| a.to_string()).collect();
                    writeln!(f, "  {}({}) :: {}.", c.name, args.join(", "), c.result)?;
                }
            }
        }
        if !self.variables.is_empty() {
            writeln!(f, "variables")?;
            for v in &self.variables {
                writeln!(f, "  {} :: {}.", v.name, v.sort)?;
            }
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IssueKind {
    UndeclaredSort,
    UndeclaredObject,
    UndeclaredConstant,
    UndeclaredVariable,
    ArityMismatch,
    DuplicateDeclaration,
    SortMismatch,
    InvalidSort,
    InvalidHead,
    ReservedName,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Issue {
    pub kind: IssueKind,
    pub message: String,
    pub span: SourceSpan,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {:?}: {}", self.span.line, self.span.column, self.kind, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }
}

/// Type of a term as seen by the checker.
#[derive(Clone, Debug, PartialEq, Eq)]
enum TermType {
    /// Integer-valued (literal, arithmetic, or range-sorted).
    Integer(Option<String>),
    Real,
    Sort(SortRef),
    Unknown,
}

struct Checker<'a> {
    program: &'a Program,
    issues: Vec<Issue>,
    span: SourceSpan,
}

impl<'a> Checker<'a> {
    fn push(&mut self, kind: IssueKind, message: String) {
        self.issues.push(Issue { kind, message, span: self.span });
    }

    fn sort_ref_ok(&mut self, s: &SortRef, allow: &[SortRef]) {
        match s {
            SortRef::Polygon(n) if *n < 3 => self.push(IssueKind::InvalidSort, format!("polygon({n}) needs at least 3 vertices")),
            SortRef::Polygon(_) => {}
            SortRef::Boolean | SortRef::Real => {
                if !allow.contains(s) {
                    self.push(IssueKind::InvalidSort, format!("sort `{s}` is not allowed here"));
                }
            }
            SortRef::Named(n) => {
                if SpatialKind::from_name(n).is_none() && self.program.sort(n).is_none() {
                    self.push(IssueKind::UndeclaredSort, format!("undeclared sort `{n}`"));
                }
            }
        }
    }

    fn is_range(&self, s: &SortRef) -> bool {
        matches!(s, SortRef::Named(n) if matches!(self.program.sort(n), Some(SortDecl { kind: SortKind::Range { .. }, .. })))
    }

    fn term(&mut self, t: &Term) -> TermType {
        match t {
            Term::Var(v) => match self.program.variable(v) {
                Some(d) if self.is_range(&d.sort) => TermType::Integer(Some(d.sort.to_string())),
                Some(d) => TermType::Sort(d.sort.clone()),
                None => {
                    self.push(IssueKind::UndeclaredVariable, format!("undeclared variable `{v}`"));
                    TermType::Unknown
                }
            },
            Term::Sym(s) => match self.program.sort_of_object(s) {
                Some(sort) => TermType::Sort(sort),
                None => {
                    if let Some(c) = self.program.constant(s) {
                        if c.args.is_empty() {
                            return self.result_type(&c.result);
                        }
                        self.push(IssueKind::ArityMismatch, format!("`{s}` expects {} arguments, got 0", c.arity()));
                    } else {
                        self.push(IssueKind::UndeclaredObject, format!("undeclared object `{s}`"));
                    }
                    TermType::Unknown
                }
            },
            Term::Int(_) => TermType::Integer(None),
            Term::Num(_) => TermType::Real,
            Term::Placeholder => TermType::Unknown,
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                let ta = self.term(a);
                let tb = self.term(b);
                self.numeric(&ta, a);
                self.numeric(&tb, b);
                match (ta, tb) {
                    (TermType::Integer(sa), TermType::Integer(sb)) => TermType::Integer(sa.or(sb)),
                    (TermType::Unknown, _) | (_, TermType::Unknown) => TermType::Unknown,
                    _ => TermType::Real,
                }
            }
            Term::Neg(a) => {
                let ta = self.term(a);
                self.numeric(&ta, a);
                ta
            }
            Term::App(name, args) => self.app(name, args),
        }
    }

    fn numeric(&mut self, ty: &TermType, t: &Term) {
        if let TermType::Sort(s) = ty {
            self.push(IssueKind::SortMismatch, format!("`{t}` of sort `{s}` used in arithmetic"));
        }
    }

    fn result_type(&self, s: &SortRef) -> TermType {
        match s {
            SortRef::Real => TermType::Real,
            s if self.is_range(s) => TermType::Integer(Some(s.to_string())),
            s => TermType::Sort(s.clone()),
        }
    }

    fn expect(&mut self, t: &Term, expected: &SortRef) {
        let ty = self.term(t);
        let ok = match (&ty, expected) {
            (TermType::Unknown, _) => true,
            (TermType::Integer(_), s) => self.is_range(s),
            (TermType::Sort(s), e) => s == e,
            (TermType::Real, SortRef::Real) => true,
            _ => false,
        };
        if !ok {
            self.push(IssueKind::SortMismatch, format!("`{t}` does not have sort `{expected}`"));
        }
    }

    fn expect_step(&mut self, t: &Term) {
        match self.term(t) {
            TermType::Integer(_) | TermType::Unknown => {}
            _ => self.push(IssueKind::SortMismatch, format!("step argument `{t}` must be integer-valued")),
        }
    }

    fn expect_kind(&mut self, t: &Term, accepts: &dyn Fn(SpatialKind) -> bool, what: &str) {
        match self.term(t) {
            TermType::Unknown => {}
            TermType::Sort(s) if s.spatial_kind().map(accepts).unwrap_or(false) => {}
            _ => self.push(IssueKind::SortMismatch, format!("`{t}` must be {what}")),
        }
    }

    fn app(&mut self, name: &str, args: &[Term]) -> TermType {
        if let Some(c) = self.program.constant(name) {
            if c.is_predicate() {
                self.push(IssueKind::SortMismatch, format!("predicate `{name}` used as a function"));
            }
            if c.arity() != args.len() {
                self.push(IssueKind::ArityMismatch, format!("`{name}` expects {} arguments, got {}", c.arity(), args.len()));
                args.iter().for_each(|a| {
                    self.term(a);
                });
                return self.result_type(&c.result);
            }
            for (a, s) in args.iter().zip(&c.args) {
                self.expect(a, s);
            }
            return self.result_type(&c.result);
        }
        if qs::is_parametric_function(name) {
            if args.is_empty() || args.len() > 2 {
                self.push(IssueKind::ArityMismatch, format!("parametric function `{name}` takes an object and an optional step"));
                return TermType::Real;
            }
            let slot = name.to_string();
            self.expect_kind(&args[0], &|k| k.slots().contains(&slot), &format!("an object with parameter `{name}`"));
            if args.len() == 2 {
                self.expect_step(&args[1]);
            }
            return TermType::Real;
        }
        self.push(IssueKind::UndeclaredConstant, format!("undeclared function `{name}`"));
        args.iter().for_each(|a| {
            self.term(a);
        });
        TermType::Unknown
    }

    fn atom(&mut self, pred: &str, args: &[Term]) {
        if let Some(c) = self.program.constant(pred) {
            if !c.is_predicate() {
                self.push(IssueKind::SortMismatch, format!("function `{pred}` used as an atom"));
            }
            if c.arity() != args.len() {
                self.push(IssueKind::ArityMismatch, format!("`{pred}` expects {} arguments, got {}", c.arity(), args.len()));
                return;
            }
            for (a, s) in args.iter().zip(&c.args) {
                self.expect(a, s);
            }
            return;
        }
        if let Some(schema) = qs::catalog().get(pred) {
            let n = schema.args.len();
            if args.len() != n && args.len() != n + 1 {
                self.push(IssueKind::ArityMismatch, format!("`{pred}` expects {n} arguments (plus an optional step), got {}", args.len()));
                return;
            }
            for (a, kind) in args.iter().zip(&schema.args) {
                self.expect_kind(a, &|k| kind.accepts(k), &format!("a {kind}"));
            }
            if args.len() == n + 1 {
                self.expect_step(&args[n]);
            }
            return;
        }
        self.push(IssueKind::UndeclaredConstant, format!("undeclared predicate `{pred}`"));
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::Atom { pred, args } => self.atom(pred, args),
            Formula::FnEq { func, value } => {
                let tf = self.term(func);
                let tv = self.term(value);
                self.comparable(&tf, &tv, func, value, true);
            }
            Formula::Cmp { lhs, op, rhs } => {
                let tl = self.term(lhs);
                let tr = self.term(rhs);
                self.comparable(&tl, &tr, lhs, rhs, matches!(op, CmpOp::Eq | CmpOp::Ne));
            }
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| self.formula(c)),
            Formula::Implies(a, b) => {
                self.formula(a);
                self.formula(b);
            }
            Formula::Top | Formula::Bottom => {}
        }
    }

    fn comparable(&mut self, a: &TermType, b: &TermType, ta: &Term, tb: &Term, equality: bool) {
        use TermType::*;
        let ok = match (a, b) {
            (Unknown, _) | (_, Unknown) => true,
            (Integer(_) | Real, Integer(_) | Real) => true,
            (Sort(x), Sort(y)) => equality && x == y,
            _ => false,
        };
        if !ok {
            self.push(IssueKind::SortMismatch, format!("`{ta}` and `{tb}` cannot be compared"));
        }
    }
}

/// Collect every undeclared use, arity mismatch, sort error and duplicate
/// declaration. The report is empty iff the program is well formed.
pub fn validate_program<'a>(program: &'a Program) -> ValidationReport {
    let mut ck = Checker { program, issues: Vec::new(), span: SourceSpan::default() };
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    let mut declare = |ck: &mut Checker, name: &'a str, what: &'static str, span: SourceSpan| {
        ck.span = span;
        if let Some(prev) = seen.insert(name, what) {
            ck.push(IssueKind::DuplicateDeclaration, format!("`{name}` already declared as {prev}"));
        }
    };
    // Variables live in their own namespace (uppercase).
    for s in &program.sorts {
        declare(&mut ck, &s.name, "a sort", s.span);
        if SpatialKind::from_name(&s.name).is_some() || matches!(s.name.as_str(), "polygon" | "boolean" | "real") {
            ck.push(IssueKind::ReservedName, format!("`{}` is a built-in sort", s.name));
        }
        match &s.kind {
            SortKind::Range { lo, hi } if lo > hi => {
                ck.push(IssueKind::InvalidSort, format!("empty range {lo}..{hi}"));
            }
            SortKind::Enumerated(members) => {
                for m in members {
                    declare(&mut ck, m, "an enumeration member", s.span);
                }
            }
            _ => {}
        }
    }
    for o in &program.objects {
        declare(&mut ck, &o.name, "an object", o.span);
        ck.sort_ref_ok(&o.sort, &[]);
        if let SortRef::Named(n) = &o.sort {
            if let Some(SortDecl { kind: SortKind::Range { .. }, .. }) = program.sort(n) {
                ck.push(IssueKind::InvalidSort, format!("object `{}` cannot belong to integer sort `{n}`", o.name));
            }
        }
    }
    for c in &program.constants {
        declare(&mut ck, &c.name, "a constant", c.span);
        if qs::is_parametric_function(&c.name) || qs::catalog().get(&c.name).is_some() || c.name == "holds" {
            ck.push(IssueKind::ReservedName, format!("`{}` is a built-in spatial symbol", c.name));
        }
        for a in &c.args {
            ck.sort_ref_ok(a, &[]);
        }
        ck.sort_ref_ok(&c.result, &[SortRef::Boolean, SortRef::Real]);
        if c.result.spatial_kind().is_some() {
            ck.push(IssueKind::InvalidSort, format!("constant `{}` cannot return spatial objects", c.name));
        }
    }
    let mut seen_vars = BTreeSet::new();
    for v in &program.variables {
        ck.span = v.span;
        if !seen_vars.insert(v.name.as_str()) {
            ck.push(IssueKind::DuplicateDeclaration, format!("variable `{}` already declared", v.name));
        }
        ck.sort_ref_ok(&v.sort, &[SortRef::Real]);
    }
    let sig = program.signature();
    for r in &program.rules {
        ck.span = r.span;
        ck.formula(&r.head);
        ck.formula(&r.body);
        check_head(&mut ck, r, &sig);
    }
    ValidationReport { issues: ck.issues }
}

fn check_head(ck: &mut Checker, rule: &Rule, sig: &IntensionalSignature) {
    let head = &rule.head;
    let intensional_atomic = match head {
        Formula::Atom { pred, .. } => sig.predicates.contains(pred),
        Formula::FnEq { func: Term::App(f, _), .. } => sig.functions.contains(f),
        _ => false,
    };
    if rule.choice && !matches!(head, Formula::Atom { .. } | Formula::FnEq { .. }) {
        ck.push(IssueKind::InvalidHead, format!("choice head `{head}` must be an atom or function equality"));
        return;
    }
    if intensional_atomic || *head == Formula::Bottom {
        return;
    }
    if !is_spatial_formula(ck.program, sig, head) {
        ck.push(
            IssueKind::InvalidHead,
            format!("head `{head}` must be a single intensional atom or equality, or a formula over spatial symbols only"),
        );
    }
}

/// A formula mentioning no intensional constant, built from catalog
/// relations and real-valued comparisons.
pub fn is_spatial_formula(program: &Program, sig: &IntensionalSignature, f: &Formula) -> bool {
    let mut ok = true;
    f.for_each_atomic(&mut |a| match a {
        Formula::Atom { pred, .. } => ok &= qs::catalog().get(pred).is_some() && !sig.contains(pred),
        Formula::FnEq { func, value } | Formula::Cmp { lhs: func, rhs: value, .. } => {
            for t in [func, value] {
                t.for_each_app(&mut |name, _| ok &= !sig.contains(name));
            }
            if let Formula::FnEq { func: Term::App(name, _), .. } = a {
                ok &= program.is_real_function(name);
            }
        }
        _ => {}
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    #[test]
    fn builtin_circle_sort_needs_no_declaration() {
        let p = parse_program("objects a :: circle.").unwrap();
        assert!(validate_program(&p).is_empty());
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let p = parse_program("objects a, b :: circle. rccEC(a).").unwrap();
        let r = validate_program(&p);
        assert!(r.has(IssueKind::ArityMismatch), "{:?}", r);
    }

    #[test]
    fn undeclared_sort_is_reported() {
        let p = parse_program("objects a :: blob.").unwrap();
        assert!(validate_program(&p).has(IssueKind::UndeclaredSort));
    }

    #[test]
    fn duplicates_and_empty_ranges() {
        let p = parse_program("sorts s :: 3..1. objects a :: circle. a :: point.").unwrap();
        let r = validate_program(&p);
        assert!(r.has(IssueKind::DuplicateDeclaration));
        assert!(r.has(IssueKind::InvalidSort));
    }

    #[test]
    fn non_atomic_intensional_head_is_rejected() {
        let p = parse_program("constants p :: boolean. q :: boolean. p | q.").unwrap();
        assert!(validate_program(&p).has(IssueKind::InvalidHead));
        let p = parse_program("objects a, b :: circle. rccDC(a,b) | rccEC(a,b).").unwrap();
        assert!(validate_program(&p).is_empty());
    }

    #[test]
    fn step_argument_on_relations() {
        let src = "sorts step :: 0..1. objects a, b :: circle. variables T :: step. rccEC(a, b, T).";
        assert!(validate_program(&parse_program(src).unwrap()).is_empty());
        let bad = "objects a, b, c :: circle. rccEC(a, b, c).";
        assert!(validate_program(&parse_program(bad).unwrap()).has(IssueKind::SortMismatch));
    }

    #[test]
    fn validation_is_idempotent() {
        let p = parse_program("objects a :: blob. rccEC(a). q.").unwrap();
        assert_eq!(validate_program(&p), validate_program(&p));
    }

    #[test]
    fn decimal_rendering() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(format_decimal(&r(123, 100)), "1.23");
        assert_eq!(format_decimal(&r(-13, 100)), "-0.13");
        assert_eq!(format_decimal(&r(2, 1)), "2.0");
        assert_eq!(format_decimal(&r(1, 8)), "0.125");
        assert_eq!(format_decimal(&r(1, 3)), "1/3");
    }

    #[test]
    fn simplify_constants() {
        let p = Formula::atom("p", vec![]);
        let f = Formula::And(vec![Formula::Top, p.clone(), Formula::Or(vec![Formula::Bottom, Formula::Top])]);
        assert_eq!(f.simplify(), p);
        let nn = Formula::not(Formula::not(p.clone()));
        assert_eq!(nn.simplify(), nn);
    }
}
