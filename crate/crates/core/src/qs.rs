//! Spatial object kinds, their real-valued parameters, and the catalog of
//! qualitative relations defined by polynomial constraints over them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::CmpOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpatialKind {
    Point,
    Segment,
    Circle,
    Triangle,
    Polygon(usize),
    EggYolk,
}

impl SpatialKind {
    pub fn from_name(name: &str) -> Option<SpatialKind> {
        Some(match name {
            "point" => SpatialKind::Point,
            "segment" => SpatialKind::Segment,
            "circle" => SpatialKind::Circle,
            "triangle" => SpatialKind::Triangle,
            "eggyolk" => SpatialKind::EggYolk,
            _ => return None,
        })
    }

    pub fn slots(self) -> Vec<String> {
        let fixed: &[&str] = match self {
            SpatialKind::Point => &["x", "y"],
            SpatialKind::Segment => &["x1", "y1", "x2", "y2"],
            SpatialKind::Circle => &["x", "y", "r"],
            SpatialKind::Triangle => &["x1", "y1", "x2", "y2", "x3", "y3"],
            SpatialKind::EggYolk => &["xin", "yin", "rin", "xout", "yout", "rout"],
            SpatialKind::Polygon(n) => return (1..=n).flat_map(|i| [format!("x{i}"), format!("y{i}")]).collect(),
        };
        fixed.iter().map(|s| s.to_string()).collect()
    }

    /// Vertex count of a region kind.
    pub fn vertices(self) -> Option<usize> {
        match self {
            SpatialKind::Triangle => Some(3),
            SpatialKind::Polygon(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for SpatialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpatialKind::Point => f.write_str("point"),
            SpatialKind::Segment => f.write_str("segment"),
            SpatialKind::Circle => f.write_str("circle"),
            SpatialKind::Triangle => f.write_str("triangle"),
            SpatialKind::Polygon(n) => write!(f, "polygon({n})"),
            SpatialKind::EggYolk => f.write_str("eggyolk"),
        }
    }
}

/// Whether `name` is the parameter slot of some built-in kind.
pub fn is_parametric_function(name: &str) -> bool {
    if matches!(name, "x" | "y" | "r" | "xin" | "yin" | "rin" | "xout" | "yout" | "rout") {
        return true;
    }
    match name.strip_prefix('x').or_else(|| name.strip_prefix('y')) {
        Some(digits) => !digits.is_empty() && !digits.starts_with('0') && digits.bytes().all(|b| b.is_ascii_digit()),
        None => false,
    }
}

/// Solver symbol for one parameter of one object, optionally at a step.
pub fn slot_symbol(slot: &str, object: &str, step: Option<i64>) -> String {
    match step {
        Some(s) => format!("{slot}_{object}_{}", mangle_int(s)),
        None => format!("{slot}_{object}"),
    }
}

pub fn mangle_int(i: i64) -> String {
    if i < 0 {
        format!("m{}", i.unsigned_abs())
    } else {
        i.to_string()
    }
}

// ---------------------------------------------------------------------------
// Polynomial constraints

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Polynomial<V> {
    Const(BigRational),
    Var(V),
    Add(Vec<Polynomial<V>>),
    Sub(Box<Polynomial<V>>, Box<Polynomial<V>>),
    Mul(Vec<Polynomial<V>>),
    Neg(Box<Polynomial<V>>),
}

impl<V: Clone> Polynomial<V> {
    pub fn int(i: i64) -> Self {
        Polynomial::Const(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn add(a: Self, b: Self) -> Self {
        Polynomial::Add(vec![a, b])
    }

    pub fn sub(a: Self, b: Self) -> Self {
        Polynomial::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Self, b: Self) -> Self {
        Polynomial::Mul(vec![a, b])
    }

    pub fn square(a: Self) -> Self {
        Polynomial::Mul(vec![a.clone(), a])
    }

    pub fn map_vars<W>(&self, f: &dyn Fn(&V) -> W) -> Polynomial<W> {
        match self {
            Polynomial::Const(c) => Polynomial::Const(c.clone()),
            Polynomial::Var(v) => Polynomial::Var(f(v)),
            Polynomial::Add(xs) => Polynomial::Add(xs.iter().map(|x| x.map_vars(f)).collect()),
            Polynomial::Mul(xs) => Polynomial::Mul(xs.iter().map(|x| x.map_vars(f)).collect()),
            Polynomial::Sub(a, b) => Polynomial::Sub(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Polynomial::Neg(a) => Polynomial::Neg(Box::new(a.map_vars(f))),
        }
    }

    pub fn eval<E>(&self, lookup: &dyn Fn(&V) -> Result<BigRational, E>) -> Result<BigRational, E> {
        Ok(match self {
            Polynomial::Const(c) => c.clone(),
            Polynomial::Var(v) => lookup(v)?,
            Polynomial::Add(xs) => {
                let mut acc = BigRational::zero();
                for x in xs {
                    acc += x.eval(lookup)?;
                }
                acc
            }
            Polynomial::Mul(xs) => {
                let mut acc = BigRational::one();
                for x in xs {
                    acc *= x.eval(lookup)?;
                }
                acc
            }
            Polynomial::Sub(a, b) => a.eval(lookup)? - b.eval(lookup)?,
            Polynomial::Neg(a) => -a.eval(lookup)?,
        })
    }

    pub fn degree(&self) -> usize {
        match self {
            Polynomial::Const(_) => 0,
            Polynomial::Var(_) => 1,
            Polynomial::Add(xs) => xs.iter().map(Polynomial::degree).max().unwrap_or(0),
            Polynomial::Mul(xs) => xs.iter().map(Polynomial::degree).sum(),
            Polynomial::Sub(a, b) => a.degree().max(b.degree()),
            Polynomial::Neg(a) => a.degree(),
        }
    }

    pub fn for_each_var<'a>(&'a self, f: &mut dyn FnMut(&'a V)) {
        match self {
            Polynomial::Const(_) => {}
            Polynomial::Var(v) => f(v),
            Polynomial::Add(xs) | Polynomial::Mul(xs) => xs.iter().for_each(|x| x.for_each_var(f)),
            Polynomial::Sub(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Polynomial::Neg(a) => a.for_each_var(f),
        }
    }
}

impl<V: fmt::Display> fmt::Display for Polynomial<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[Polynomial<V>], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            Polynomial::Const(c) => f.write_str(&crate::model::format_decimal(c)),
            Polynomial::Var(v) => write!(f, "{v}"),
            Polynomial::Add(xs) => join(f, xs, " + "),
            Polynomial::Mul(xs) => join(f, xs, " * "),
            Polynomial::Sub(a, b) => write!(f, "({a} - {b})"),
            Polynomial::Neg(a) => write!(f, "-{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint<V> {
    True,
    False,
    Cmp(Polynomial<V>, CmpOp, Polynomial<V>),
    And(Vec<Constraint<V>>),
    Or(Vec<Constraint<V>>),
}

impl<V: Clone> Constraint<V> {
    pub fn cmp(a: Polynomial<V>, op: CmpOp, b: Polynomial<V>) -> Self {
        Constraint::Cmp(a, op, b)
    }

    /// Negation pushed to the comparisons.
    pub fn negate(&self) -> Self {
        match self {
            Constraint::True => Constraint::False,
            Constraint::False => Constraint::True,
            Constraint::Cmp(a, op, b) => Constraint::Cmp(a.clone(), op.negate(), b.clone()),
            Constraint::And(xs) => Constraint::Or(xs.iter().map(Constraint::negate).collect()),
            Constraint::Or(xs) => Constraint::And(xs.iter().map(Constraint::negate).collect()),
        }
    }

    pub fn map_vars<W>(&self, f: &dyn Fn(&V) -> W) -> Constraint<W> {
        match self {
            Constraint::True => Constraint::True,
            Constraint::False => Constraint::False,
            Constraint::Cmp(a, op, b) => Constraint::Cmp(a.map_vars(f), *op, b.map_vars(f)),
            Constraint::And(xs) => Constraint::And(xs.iter().map(|x| x.map_vars(f)).collect()),
            Constraint::Or(xs) => Constraint::Or(xs.iter().map(|x| x.map_vars(f)).collect()),
        }
    }

    pub fn eval<E>(&self, lookup: &dyn Fn(&V) -> Result<BigRational, E>) -> Result<bool, E> {
        Ok(match self {
            Constraint::True => true,
            Constraint::False => false,
            Constraint::Cmp(a, op, b) => op.holds(a.eval(lookup)?.cmp(&b.eval(lookup)?)),
            Constraint::And(xs) => {
                for x in xs {
                    if !x.eval(lookup)? {
                        return Ok(false);
                    }
                }
                true
            }
            Constraint::Or(xs) => {
                for x in xs {
                    if x.eval(lookup)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn for_each_var<'a>(&'a self, f: &mut dyn FnMut(&'a V)) {
        match self {
            Constraint::True | Constraint::False => {}
            Constraint::Cmp(a, _, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Constraint::And(xs) | Constraint::Or(xs) => xs.iter().for_each(|x| x.for_each_var(f)),
        }
    }
}

impl<V: fmt::Display> fmt::Display for Constraint<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[Constraint<V>], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            Constraint::True => f.write_str("true"),
            Constraint::False => f.write_str("false"),
            Constraint::Cmp(a, op, b) => write!(f, "{a} {op} {b}"),
            Constraint::And(xs) => join(f, xs, " & "),
            Constraint::Or(xs) => join(f, xs, " | "),
        }
    }
}

/// A parameter of the `arg`-th relation argument, before instantiation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Slot {
    pub arg: usize,
    pub name: String,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.arg)
    }
}

type P = Polynomial<Slot>;
type C = Constraint<Slot>;

fn s(arg: usize, name: &str) -> P {
    Polynomial::Var(Slot { arg, name: name.to_string() })
}

fn lt(a: P, b: P) -> C {
    Constraint::cmp(a, CmpOp::Lt, b)
}
fn le(a: P, b: P) -> C {
    Constraint::cmp(a, CmpOp::Le, b)
}
fn eq(a: P, b: P) -> C {
    Constraint::cmp(a, CmpOp::Eq, b)
}
fn gt(a: P, b: P) -> C {
    Constraint::cmp(a, CmpOp::Gt, b)
}
fn ge(a: P, b: P) -> C {
    Constraint::cmp(a, CmpOp::Ge, b)
}
fn zero() -> P {
    Polynomial::int(0)
}

/// Squared distance between two planar points.
fn dist2(ax: P, ay: P, bx: P, by: P) -> P {
    Polynomial::add(Polynomial::square(Polynomial::sub(ax, bx)), Polynomial::square(Polynomial::sub(ay, by)))
}

/// Cross product of (b - a) and (p - a): positive iff p lies left of a->b.
fn cross(ax: P, ay: P, bx: P, by: P, px: P, py: P) -> P {
    Polynomial::sub(
        Polynomial::mul(Polynomial::sub(bx, ax.clone()), Polynomial::sub(py, ay.clone())),
        Polynomial::mul(Polynomial::sub(by, ay), Polynomial::sub(px, ax)),
    )
}

fn circle_delta(a: usize, b: usize) -> P {
    dist2(s(a, "x"), s(a, "y"), s(b, "x"), s(b, "y"))
}

fn radius_sum2(a: usize, b: usize) -> P {
    Polynomial::square(Polynomial::add(s(a, "r"), s(b, "r")))
}

fn radius_diff2(a: usize, b: usize) -> P {
    Polynomial::square(Polynomial::sub(s(a, "r"), s(b, "r")))
}

// ---------------------------------------------------------------------------
// Relation catalog

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ArgKind {
    Point,
    Segment,
    Circle,
    /// A convex region: a triangle or a convex polygon.
    Region,
}

impl ArgKind {
    pub fn accepts(self, kind: SpatialKind) -> bool {
        match self {
            ArgKind::Point => kind == SpatialKind::Point,
            ArgKind::Segment => kind == SpatialKind::Segment,
            ArgKind::Circle => kind == SpatialKind::Circle,
            ArgKind::Region => kind.vertices().is_some(),
        }
    }
}

impl fmt::Display for ArgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArgKind::Point => "point",
            ArgKind::Segment => "segment",
            ArgKind::Circle => "circle",
            ArgKind::Region => "region",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Family {
    Rcc8,
    Orientation,
    Distance,
    IntervalAlgebra,
    RectangleAlgebra,
    LeftRight,
    CardinalDirection,
    Rcc5,
}

/// Where a catalog entry's encoding comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Provenance {
    /// One of the published circle encodings of RCC relations.
    Published,
    /// Stated in closed form alongside those encodings.
    Described,
    /// Rebuilt from the standard definition of the calculus.
    Reconstructed,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Published => "published",
            Provenance::Described => "described",
            Provenance::Reconstructed => "reconstructed",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rcc8 {
    C,
    Dr,
    Dc,
    Ec,
    O,
    Po,
    P,
    Pp,
    Tpp,
    Ntpp,
    Eq,
}

pub const IA_RELATIONS: [&str; 13] = [
    "before",
    "meets",
    "overlaps",
    "starts",
    "during",
    "finishes",
    "equals",
    "after",
    "met_by",
    "overlapped_by",
    "started_by",
    "contains",
    "finished_by",
];

pub const LR_RELATIONS: [&str; 7] = ["left", "right", "front", "back", "inside", "start", "end"];

pub const CDC_RELATIONS: [&str; 9] = ["n", "ne", "e", "se", "s", "sw", "w", "nw", "eq"];

pub const RCC5_BASE: [&str; 5] = ["dr", "po", "pp", "ppi", "eq"];

pub const RCC8_BASE: [&str; 8] = ["rccDC", "rccEC", "rccPO", "rccTPP", "rccTPPi", "rccNTPP", "rccNTPPi", "rccEQ"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Definition {
    Rcc8 { rel: Rcc8, swap: bool },
    Side(CmpOp),
    NearerThan,
    Parallel,
    Perpendicular,
    Coincident,
    Interval(usize),
    Rectangle(usize, usize),
    LeftRight(usize),
    Cardinal(usize),
    Rcc5 { name: &'static str },
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationSchema {
    pub name: String,
    pub args: Vec<ArgKind>,
    pub family: Family,
    pub provenance: Provenance,
    pub description: String,
    #[serde(skip)]
    definition: Definition,
}

impl RelationSchema {
    /// Defining constraint over the arguments' slots, for the concrete
    /// argument kinds (region vertex counts vary per object).
    pub fn template(&self, kinds: &[SpatialKind]) -> Result<Constraint<Slot>, QsError> {
        if kinds.len() != self.args.len() || !self.args.iter().zip(kinds).all(|(a, &k)| a.accepts(k)) {
            return Err(QsError::KindMismatch {
                relation: self.name.clone(),
                expected: self.args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", "),
                found: kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "),
            });
        }
        Ok(match self.definition {
            Definition::Rcc8 { rel, swap } => {
                let (a, b) = if swap { (1, 0) } else { (0, 1) };
                rcc8(rel, a, b)
            }
            Definition::Side(op) => {
                Constraint::cmp(cross(s(1, "x1"), s(1, "y1"), s(1, "x2"), s(1, "y2"), s(0, "x"), s(0, "y")), op, zero())
            }
            Definition::NearerThan => lt(
                dist2(s(0, "x"), s(0, "y"), s(2, "x"), s(2, "y")),
                dist2(s(1, "x"), s(1, "y"), s(2, "x"), s(2, "y")),
            ),
            Definition::Parallel => {
                let (dx0, dy0, dx1, dy1) = directions();
                eq(Polynomial::sub(Polynomial::mul(dx0, dy1), Polynomial::mul(dy0, dx1)), zero())
            }
            Definition::Perpendicular => {
                let (dx0, dy0, dx1, dy1) = directions();
                eq(Polynomial::add(Polynomial::mul(dx0, dx1), Polynomial::mul(dy0, dy1)), zero())
            }
            Definition::Coincident => eq(dist2(s(0, "x"), s(0, "y"), s(1, "x"), s(1, "y")), Polynomial::square(s(1, "r"))),
            Definition::Interval(i) => {
                let a = (s(0, "x1"), s(0, "x2"));
                let b = (s(1, "x1"), s(1, "x2"));
                Constraint::And(vec![lt(a.0.clone(), a.1.clone()), lt(b.0.clone(), b.1.clone()), interval(i, a, b)])
            }
            Definition::Rectangle(ix, iy) => {
                let ax = (s(0, "x1"), s(0, "x2"));
                let bx = (s(1, "x1"), s(1, "x2"));
                let ay = (s(0, "y1"), s(0, "y2"));
                let by = (s(1, "y1"), s(1, "y2"));
                Constraint::And(vec![
                    lt(ax.0.clone(), ax.1.clone()),
                    lt(bx.0.clone(), bx.1.clone()),
                    lt(ay.0.clone(), ay.1.clone()),
                    lt(by.0.clone(), by.1.clone()),
                    interval(ix, ax, bx),
                    interval(iy, ay, by),
                ])
            }
            Definition::LeftRight(i) => left_right(i),
            Definition::Cardinal(i) => cardinal(i),
            Definition::Rcc5 { name } => rcc5(name, kinds[0].vertices().unwrap(), kinds[1].vertices().unwrap()),
        })
    }
}

fn directions() -> (P, P, P, P) {
    (
        Polynomial::sub(s(0, "x2"), s(0, "x1")),
        Polynomial::sub(s(0, "y2"), s(0, "y1")),
        Polynomial::sub(s(1, "x2"), s(1, "x1")),
        Polynomial::sub(s(1, "y2"), s(1, "y1")),
    )
}

fn rcc8(rel: Rcc8, a: usize, b: usize) -> C {
    let delta = circle_delta(a, b);
    let sum = radius_sum2(a, b);
    let diff = radius_diff2(a, b);
    let (ra, rb) = (s(a, "r"), s(b, "r"));
    match rel {
        Rcc8::C => le(delta, sum),
        Rcc8::Dr => ge(delta, sum),
        Rcc8::Dc => gt(delta, sum),
        Rcc8::Ec => eq(delta, sum),
        Rcc8::O => lt(delta, sum),
        Rcc8::Po => Constraint::And(vec![lt(diff, delta.clone()), lt(delta, sum)]),
        Rcc8::P => Constraint::And(vec![le(delta, diff), le(ra, rb)]),
        Rcc8::Pp => Constraint::And(vec![le(delta, diff), lt(ra, rb)]),
        Rcc8::Tpp => Constraint::And(vec![eq(delta, diff), lt(ra, rb)]),
        Rcc8::Ntpp => Constraint::And(vec![lt(delta, diff), lt(ra, rb)]),
        Rcc8::Eq => Constraint::And(vec![eq(s(a, "x"), s(b, "x")), eq(s(a, "y"), s(b, "y")), eq(ra, rb)]),
    }
}

/// Endpoint conditions of an interval relation between `a` and `b`.
fn interval(index: usize, a: (P, P), b: (P, P)) -> C {
    let (a1, a2) = a;
    let (b1, b2) = b;
    let and = Constraint::And;
    match IA_RELATIONS[index] {
        "before" => lt(a2, b1),
        "meets" => eq(a2, b1),
        "overlaps" => and(vec![lt(a1, b1.clone()), lt(b1, a2.clone()), lt(a2, b2)]),
        "starts" => and(vec![eq(a1, b1), lt(a2, b2)]),
        "during" => and(vec![lt(b1, a1), lt(a2, b2)]),
        "finishes" => and(vec![eq(a2, b2), lt(b1, a1)]),
        "equals" => and(vec![eq(a1, b1), eq(a2, b2)]),
        "after" => lt(b2, a1),
        "met_by" => eq(b2, a1),
        "overlapped_by" => and(vec![lt(b1, a1.clone()), lt(a1, b2.clone()), lt(b2, a2)]),
        "started_by" => and(vec![eq(a1, b1), lt(b2, a2)]),
        "contains" => and(vec![lt(a1, b1), lt(b2, a2)]),
        "finished_by" => and(vec![eq(a2, b2), lt(a1, b1)]),
        _ => unreachable!(),
    }
}

/// Position of point (arg 1) relative to directed segment (arg 0).
fn left_right(index: usize) -> C {
    let (x1, y1, x2, y2) = (s(0, "x1"), s(0, "y1"), s(0, "x2"), s(0, "y2"));
    let (px, py) = (s(1, "x"), s(1, "y"));
    let side = cross(x1.clone(), y1.clone(), x2.clone(), y2.clone(), px.clone(), py.clone());
    let along = Polynomial::add(
        Polynomial::mul(Polynomial::sub(px.clone(), x1.clone()), Polynomial::sub(x2.clone(), x1.clone())),
        Polynomial::mul(Polynomial::sub(py.clone(), y1.clone()), Polynomial::sub(y2.clone(), y1.clone())),
    );
    let len2 = dist2(x1.clone(), y1.clone(), x2.clone(), y2.clone());
    let on_line = eq(side.clone(), zero());
    match LR_RELATIONS[index] {
        "left" => gt(side, zero()),
        "right" => lt(side, zero()),
        "front" => Constraint::And(vec![on_line, gt(along, len2)]),
        "back" => Constraint::And(vec![on_line, lt(along, zero())]),
        "inside" => Constraint::And(vec![on_line, gt(along.clone(), zero()), lt(along, len2)]),
        "start" => Constraint::And(vec![eq(px, x1), eq(py, y1)]),
        "end" => Constraint::And(vec![eq(px, x2), eq(py, y2)]),
        _ => unreachable!(),
    }
}

/// Direction of point arg 0 as seen from point arg 1.
fn cardinal(index: usize) -> C {
    let (ax, ay, bx, by) = (s(0, "x"), s(0, "y"), s(1, "x"), s(1, "y"));
    let horizontal = |c: char| match c {
        'e' => gt(ax.clone(), bx.clone()),
        'w' => lt(ax.clone(), bx.clone()),
        _ => eq(ax.clone(), bx.clone()),
    };
    let vertical = |c: char| match c {
        'n' => gt(ay.clone(), by.clone()),
        's' => lt(ay.clone(), by.clone()),
        _ => eq(ay.clone(), by.clone()),
    };
    let name = CDC_RELATIONS[index];
    let (v, h) = match name {
        "eq" => ('=', '='),
        "n" | "s" => (name.chars().next().unwrap(), '='),
        "e" | "w" => ('=', name.chars().next().unwrap()),
        _ => {
            let mut cs = name.chars();
            (cs.next().unwrap(), cs.next().unwrap())
        }
    };
    Constraint::And(vec![horizontal(h), vertical(v)])
}

fn vertex(arg: usize, i: usize) -> (P, P) {
    (s(arg, &format!("x{}", i + 1)), s(arg, &format!("y{}", i + 1)))
}

/// Every vertex of `inner` lies in every closed edge half-plane of `outer`.
fn region_part(inner: usize, n_inner: usize, outer: usize, n_outer: usize) -> C {
    let mut parts = Vec::new();
    for e in 0..n_outer {
        let (ax, ay) = vertex(outer, e);
        let (bx, by) = vertex(outer, (e + 1) % n_outer);
        for v in 0..n_inner {
            let (px, py) = vertex(inner, v);
            parts.push(ge(cross(ax.clone(), ay.clone(), bx.clone(), by.clone(), px, py), zero()));
        }
    }
    Constraint::And(parts)
}

/// Some edge line of one region has the whole other region on its closed
/// outer side, so the interiors are disjoint.
fn region_discrete(na: usize, nb: usize) -> C {
    let mut options = Vec::new();
    for (edge_arg, n_edge, other, n_other) in [(0, na, 1, nb), (1, nb, 0, na)] {
        for e in 0..n_edge {
            let (ax, ay) = vertex(edge_arg, e);
            let (bx, by) = vertex(edge_arg, (e + 1) % n_edge);
            let all = (0..n_other)
                .map(|v| {
                    let (px, py) = vertex(other, v);
                    le(cross(ax.clone(), ay.clone(), bx.clone(), by.clone(), px, py), zero())
                })
                .collect();
            options.push(Constraint::And(all));
        }
    }
    Constraint::Or(options)
}

fn rcc5(name: &str, na: usize, nb: usize) -> C {
    let ab = region_part(0, na, 1, nb);
    let ba = region_part(1, nb, 0, na);
    let dr = region_discrete(na, nb);
    match name {
        "dr" => dr,
        "o" => dr.negate(),
        "po" => Constraint::And(vec![dr.negate(), ab.negate(), ba.negate()]),
        "pp" => Constraint::And(vec![ab, ba.negate()]),
        "ppi" => Constraint::And(vec![ba, ab.negate()]),
        "eq" => Constraint::And(vec![ab, ba]),
        "p" => ab,
        _ => unreachable!(),
    }
}

#[derive(Debug)]
pub struct Catalog {
    entries: BTreeMap<String, RelationSchema>,
}

impl Catalog {
    pub fn get(&self, name: &str) -> Option<&RelationSchema> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RelationSchema> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

fn build_catalog() -> Catalog {
    let mut entries = BTreeMap::new();
    let mut add = |name: String, args: Vec<ArgKind>, family, provenance, description: String, definition| {
        entries.insert(name.clone(), RelationSchema { name, args, family, provenance, description, definition });
    };
    use ArgKind::*;
    let rcc = [
        ("C", Rcc8::C, "connected"),
        ("DR", Rcc8::Dr, "discrete from"),
        ("DC", Rcc8::Dc, "disconnected"),
        ("EC", Rcc8::Ec, "externally connected"),
        ("O", Rcc8::O, "overlaps"),
        ("PO", Rcc8::Po, "partially overlaps"),
        ("P", Rcc8::P, "part of"),
        ("PP", Rcc8::Pp, "proper part of"),
        ("TPP", Rcc8::Tpp, "tangential proper part of"),
        ("NTPP", Rcc8::Ntpp, "non-tangential proper part of"),
        ("EQ", Rcc8::Eq, "equal"),
    ];
    for (suffix, rel, what) in rcc {
        add(
            format!("rcc{suffix}"),
            vec![Circle, Circle],
            Family::Rcc8,
            Provenance::Published,
            what.to_string(),
            Definition::Rcc8 { rel, swap: false },
        );
    }
    for (suffix, rel, what) in [("P", Rcc8::P, "part of"), ("PP", Rcc8::Pp, "proper part of"), ("TPP", Rcc8::Tpp, "tangential proper part of"), ("NTPP", Rcc8::Ntpp, "non-tangential proper part of")] {
        add(
            format!("rcc{suffix}i"),
            vec![Circle, Circle],
            Family::Rcc8,
            Provenance::Published,
            format!("inverse of {what}"),
            Definition::Rcc8 { rel, swap: true },
        );
    }
    for (name, op, what) in [("left_of", CmpOp::Gt, "point strictly left of directed segment"), ("right_of", CmpOp::Lt, "point strictly right of directed segment"), ("collinear", CmpOp::Eq, "point on the line through the segment")] {
        add(name.into(), vec![Point, Segment], Family::Orientation, Provenance::Described, what.into(), Definition::Side(op));
    }
    add(
        "nearer_than".into(),
        vec![Point, Point, Point],
        Family::Distance,
        Provenance::Described,
        "first point strictly closer to the third than the second is".into(),
        Definition::NearerThan,
    );
    add("parallel".into(), vec![Segment, Segment], Family::Orientation, Provenance::Described, "parallel directions".into(), Definition::Parallel);
    add(
        "perpendicular".into(),
        vec![Segment, Segment],
        Family::Orientation,
        Provenance::Described,
        "perpendicular directions".into(),
        Definition::Perpendicular,
    );
    add("coincident".into(), vec![Point, Circle], Family::Distance, Provenance::Described, "point on the circle boundary".into(), Definition::Coincident);
    for (i, r) in IA_RELATIONS.iter().enumerate() {
        add(
            format!("ia_{r}"),
            vec![Segment, Segment],
            Family::IntervalAlgebra,
            Provenance::Reconstructed,
            format!("x-projections: {r}"),
            Definition::Interval(i),
        );
    }
    for (i, rx) in IA_RELATIONS.iter().enumerate() {
        for (j, ry) in IA_RELATIONS.iter().enumerate() {
            add(
                format!("ra_{rx}_{ry}"),
                vec![Segment, Segment],
                Family::RectangleAlgebra,
                Provenance::Reconstructed,
                format!("bounding boxes: {rx} on x, {ry} on y"),
                Definition::Rectangle(i, j),
            );
        }
    }
    for (i, r) in LR_RELATIONS.iter().enumerate() {
        add(
            format!("lr_{r}"),
            vec![Segment, Point],
            Family::LeftRight,
            Provenance::Reconstructed,
            format!("point {r} relative to directed segment"),
            Definition::LeftRight(i),
        );
    }
    for (i, r) in CDC_RELATIONS.iter().enumerate() {
        add(
            format!("cdc_{r}"),
            vec![Point, Point],
            Family::CardinalDirection,
            Provenance::Reconstructed,
            format!("first point lies {r} of the second"),
            Definition::Cardinal(i),
        );
    }
    for (name, what) in [
        ("dr", "interiors disjoint"),
        ("o", "interiors share a point"),
        ("po", "partial overlap"),
        ("p", "part of"),
        ("pp", "proper part of"),
        ("ppi", "inverse proper part"),
        ("eq", "equal"),
    ] {
        add(
            format!("rcc5_{name}"),
            vec![Region, Region],
            Family::Rcc5,
            Provenance::Reconstructed,
            what.into(),
            Definition::Rcc5 { name },
        );
    }
    Catalog { entries }
}

// ---------------------------------------------------------------------------
// Ground relation atoms

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum QsError {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("`{relation}` expects ({expected}), got ({found})")]
    KindMismatch { relation: String, expected: String, found: String },
    #[error("no value for parameter `{0}`")]
    MissingSlot(String),
}

/// A relation applied to concrete objects, optionally at a step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RelationAtom {
    pub relation: String,
    pub objects: Vec<(String, SpatialKind)>,
    pub step: Option<i64>,
}

impl RelationAtom {
    pub fn new(relation: &str, objects: &[(&str, SpatialKind)], step: Option<i64>) -> Self {
        RelationAtom {
            relation: relation.to_string(),
            objects: objects.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
            step,
        }
    }
}

/// The defining constraint with slots replaced by solver symbols.
pub fn encode_relation(atom: &RelationAtom) -> Result<Constraint<String>, QsError> {
    let schema = catalog().get(&atom.relation).ok_or_else(|| QsError::UnknownRelation(atom.relation.clone()))?;
    let kinds: Vec<SpatialKind> = atom.objects.iter().map(|o| o.1).collect();
    let template = schema.template(&kinds)?;
    Ok(template.map_vars(&|slot: &Slot| slot_symbol(&slot.name, &atom.objects[slot.arg].0, atom.step)))
}

pub fn evaluate_relation(atom: &RelationAtom, assignment: &BTreeMap<String, BigRational>) -> Result<bool, QsError> {
    let c = encode_relation(atom)?;
    c.eval(&|v: &String| assignment.get(v).cloned().ok_or_else(|| QsError::MissingSlot(v.clone())))
}

/// Well-formedness constraints of one object's parameters.
pub fn domain_axioms(object: &str, kind: SpatialKind, step: Option<i64>) -> Vec<Constraint<String>> {
    let t: Vec<C> = match kind {
        SpatialKind::Point => vec![],
        SpatialKind::Circle => vec![gt(s(0, "r"), zero())],
        SpatialKind::Segment => vec![gt(dist2(s(0, "x1"), s(0, "y1"), s(0, "x2"), s(0, "y2")), zero())],
        SpatialKind::Triangle | SpatialKind::Polygon(_) => {
            let n = kind.vertices().unwrap();
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        let (ax, ay) = vertex(0, i);
                        let (bx, by) = vertex(0, j);
                        let (px, py) = vertex(0, k);
                        out.push(gt(cross(ax, ay, bx, by, px, py), zero()));
                    }
                }
            }
            out
        }
        SpatialKind::EggYolk => vec![
            gt(s(0, "rin"), zero()),
            Constraint::And(vec![
                le(dist2(s(0, "xin"), s(0, "yin"), s(0, "xout"), s(0, "yout")), Polynomial::square(Polynomial::sub(s(0, "rin"), s(0, "rout")))),
                lt(s(0, "rin"), s(0, "rout")),
            ]),
        ],
    };
    t.iter().map(|c| c.map_vars(&|slot: &Slot| slot_symbol(&slot.name, object, step))).collect()
}

/// Assignment of an object's slots from a value list in slot order.
pub fn assign(object: &str, kind: SpatialKind, step: Option<i64>, values: &[BigRational], out: &mut BTreeMap<String, BigRational>) {
    for (slot, v) in kind.slots().iter().zip(values) {
        out.insert(slot_symbol(slot, object, step), v.clone());
    }
}

/// One line per catalog entry: signature, family and provenance.
pub fn list_relations() -> Vec<String> {
    catalog()
        .iter()
        .map(|r| {
            let args: Vec<String> = r.args.iter().map(|a| a.to_string()).collect();
            format!("{}({}) [{:?}, {}] {}", r.name, args.join(", "), r.family, r.provenance, r.description)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn circles(a: [i64; 3], b: [i64; 3]) -> BTreeMap<String, BigRational> {
        let mut m = BTreeMap::new();
        assign("a", SpatialKind::Circle, None, &a.map(q), &mut m);
        assign("b", SpatialKind::Circle, None, &b.map(q), &mut m);
        m
    }

    fn holds(rel: &str, m: &BTreeMap<String, BigRational>) -> bool {
        let atom = RelationAtom::new(rel, &[("a", SpatialKind::Circle), ("b", SpatialKind::Circle)], None);
        evaluate_relation(&atom, m).unwrap()
    }

    #[test]
    fn externally_connected_circles() {
        assert!(holds("rccEC", &circles([0, 0, 1], [2, 0, 1])));
    }

    #[test]
    fn identical_circles() {
        let m = circles([0, 0, 1], [0, 0, 1]);
        assert!(holds("rccEQ", &m));
        assert!(!holds("rccPO", &m));
    }

    #[test]
    fn nested_circles_single_base_relation() {
        let m = circles([0, 0, 1], [1, 0, 3]);
        let true_rels: Vec<&str> = RCC8_BASE.iter().copied().filter(|r| holds(r, &m)).collect();
        assert_eq!(true_rels, vec!["rccNTPP"]);
    }

    #[test]
    fn encodings_render_as_published() {
        let atom = RelationAtom::new("rccEC", &[("a", SpatialKind::Circle), ("b", SpatialKind::Circle)], None);
        assert_eq!(encode_relation(&atom).unwrap().to_string(), "(((x_a - x_b) * (x_a - x_b)) + ((y_a - y_b) * (y_a - y_b))) = ((r_a + r_b) * (r_a + r_b))");
        let atom = RelationAtom::new("rccEQ", &[("a", SpatialKind::Circle), ("b", SpatialKind::Circle)], Some(1));
        assert_eq!(encode_relation(&atom).unwrap().to_string(), "(x_a_1 = x_b_1 & y_a_1 = y_b_1 & r_a_1 = r_b_1)");
    }

    #[test]
    fn kind_mismatch_and_unknown() {
        let atom = RelationAtom::new("rccEC", &[("a", SpatialKind::Point), ("b", SpatialKind::Circle)], None);
        assert!(matches!(encode_relation(&atom), Err(QsError::KindMismatch { .. })));
        let atom = RelationAtom::new("rccXX", &[], None);
        assert!(matches!(encode_relation(&atom), Err(QsError::UnknownRelation(_))));
        let m = BTreeMap::new();
        let atom = RelationAtom::new("rccEC", &[("a", SpatialKind::Circle), ("b", SpatialKind::Circle)], None);
        assert!(matches!(evaluate_relation(&atom, &m), Err(QsError::MissingSlot(_))));
    }

    #[test]
    fn domain_axiom_shapes() {
        assert_eq!(domain_axioms("a", SpatialKind::Circle, None)[0].to_string(), "r_a > 0.0");
        assert_eq!(domain_axioms("t", SpatialKind::Triangle, None).len(), 1);
        assert_eq!(domain_axioms("p", SpatialKind::Polygon(5), None).len(), 10);
        assert_eq!(domain_axioms("e", SpatialKind::EggYolk, None).len(), 2);
    }

    #[test]
    fn catalog_counts() {
        let by = |f: Family| catalog().iter().filter(|r| r.family == f).count();
        assert_eq!(by(Family::Rcc8), 15);
        assert_eq!(by(Family::IntervalAlgebra), 13);
        assert_eq!(by(Family::RectangleAlgebra), 169);
        assert_eq!(by(Family::CardinalDirection), 9);
        assert!(catalog().iter().filter(|r| r.family == Family::Rcc8).all(|r| r.provenance == Provenance::Published));
        assert_eq!(list_relations().len(), catalog().len());
    }

    #[test]
    fn parametric_names() {
        for n in ["x", "r", "x1", "y12", "rout"] {
            assert!(is_parametric_function(n), "{n}");
        }
        for n in ["x0", "z", "xs", "x01", "height"] {
            assert!(!is_parametric_function(n), "{n}");
        }
    }
}
