//! S-expressions and the solver's `get-model` response.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{parse_rational, ParseError, SourceSpan};
use crate::numeric::UniPoly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a) => Some(a),
            SExpr::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(xs) => Some(xs),
            SExpr::Atom(_) => None,
        }
    }

    fn head(&self) -> Option<&str> {
        self.as_list().and_then(|xs| xs.first()).and_then(SExpr::as_atom)
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a) => f.write_str(a),
            SExpr::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Reader<'a> {
    fn span(&self, start: usize) -> SourceSpan {
        SourceSpan { start, end: self.pos.max(start), line: self.line, column: start.saturating_sub(self.line_start) + 1 }
    }

    fn fail<T>(&self, start: usize, message: &str, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError {
            span: self.span(start),
            message: message.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn skip(&mut self) {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() {
            match bytes[self.pos] {
                b'\n' => {
                    self.pos += 1;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                b';' => {
                    while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn read(&mut self) -> Result<SExpr, ParseError> {
        self.skip();
        let bytes = self.text.as_bytes();
        let start = self.pos;
        if self.pos >= bytes.len() {
            return self.fail(start, "unexpected end of input", &["s-expression"]);
        }
        match bytes[self.pos] {
            b'(' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip();
                    if self.pos >= bytes.len() {
                        return self.fail(self.pos, "unclosed list", &[")"]);
                    }
                    if bytes[self.pos] == b')' {
                        self.pos += 1;
                        return Ok(SExpr::List(items));
                    }
                    items.push(self.read()?);
                }
            }
            b')' => {
                self.pos += 1;
                self.fail(start, "unbalanced `)`", &["s-expression"])
            }
            b'"' | b'|' => {
                let close = bytes[self.pos];
                self.pos += 1;
                while self.pos < bytes.len() && bytes[self.pos] != close {
                    if bytes[self.pos] == b'\n' {
                        self.line += 1;
                        self.line_start = self.pos + 1;
                    }
                    self.pos += 1;
                }
                if self.pos >= bytes.len() {
                    return self.fail(start, "unterminated literal", &[if close == b'"' { "\"" } else { "|" }]);
                }
                self.pos += 1;
                let raw = &self.text[start..self.pos];
                Ok(SExpr::Atom(if close == b'|' { raw[1..raw.len() - 1].to_string() } else { raw.to_string() }))
            }
            _ => {
                while self.pos < bytes.len() && !bytes[self.pos].is_ascii_whitespace() && !matches!(bytes[self.pos], b'(' | b')' | b';') {
                    self.pos += 1;
                }
                Ok(SExpr::Atom(self.text[start..self.pos].to_string()))
            }
        }
    }
}

/// Read every top-level s-expression in `text`.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut r = Reader { text, pos: 0, line: 1, line_start: 0 };
    let mut out = Vec::new();
    loop {
        r.skip();
        if r.pos >= text.len() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelValue {
    Bool(bool),
    Int(BigInt),
    Rational(BigRational),
    /// An irrational algebraic number: a rational approximation within
    /// 2^-100 plus the solver's own description.
    Algebraic { approx: BigRational, raw: String },
}

impl ModelValue {
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            ModelValue::Int(i) => Some(BigRational::from_integer(i.clone())),
            ModelValue::Rational(r) => Some(r.clone()),
            ModelValue::Algebraic { approx, .. } => Some(approx.clone()),
            ModelValue::Bool(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, ModelValue::Algebraic { .. })
    }
}

impl fmt::Display for ModelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelValue::Bool(b) => write!(f, "{b}"),
            ModelValue::Int(i) => write!(f, "{i}"),
            ModelValue::Rational(r) => f.write_str(&crate::model::format_decimal(r)),
            ModelValue::Algebraic { raw, .. } => f.write_str(raw),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelBinding {
    pub symbol: String,
    pub value: ModelValue,
}

fn protocol(message: String) -> ParseError {
    ParseError { span: SourceSpan::default(), message, expected: vec![] }
}

fn numeral(expr: &SExpr) -> Result<BigRational, ParseError> {
    match expr {
        SExpr::Atom(a) => parse_rational(a).ok_or_else(|| protocol(format!("bad numeral `{a}`"))),
        SExpr::List(xs) => match (xs.first().and_then(SExpr::as_atom), xs.len()) {
            (Some("-"), 2) => Ok(-numeral(&xs[1])?),
            (Some("/"), 3) => {
                let d = numeral(&xs[2])?;
                if d.is_zero() {
                    return Err(protocol("division by zero in model value".into()));
                }
                Ok(numeral(&xs[1])? / d)
            }
            (Some("+"), _) => xs[1..].iter().try_fold(BigRational::zero(), |acc, x| Ok(acc + numeral(x)?)),
            (Some("*"), _) => xs[1..].iter().try_fold(BigRational::one(), |acc, x| Ok(acc * numeral(x)?)),
            _ => Err(protocol(format!("unsupported value `{expr}`"))),
        },
    }
}

fn polynomial(expr: &SExpr, var: &str) -> Result<UniPoly, ParseError> {
    match expr {
        SExpr::Atom(a) if a == var => Ok(UniPoly::x()),
        SExpr::Atom(_) => Ok(UniPoly::constant(numeral(expr)?)),
        SExpr::List(xs) => {
            let op = xs.first().and_then(SExpr::as_atom).ok_or_else(|| protocol(format!("bad polynomial `{expr}`")))?;
            let args: Result<Vec<UniPoly>, ParseError> = xs[1..].iter().map(|x| polynomial(x, var)).collect();
            let args = args?;
            match op {
                "+" => Ok(args.iter().fold(UniPoly::new(vec![]), |a, b| a.add(b))),
                "*" => Ok(args.iter().fold(UniPoly::constant(BigRational::one()), |a, b| a.mul(b))),
                "-" if args.len() == 1 => Ok(args[0].neg()),
                "-" => Ok(args[1..].iter().fold(args[0].clone(), |a, b| a.sub(b))),
                "^" if args.len() == 2 => {
                    let e = numeral(&xs[2])?;
                    if !e.is_integer() || e.is_negative() {
                        return Err(protocol(format!("bad exponent in `{expr}`")));
                    }
                    let e: u32 = e.to_integer().try_into().map_err(|_| protocol("exponent too large".into()))?;
                    Ok(args[0].pow(e))
                }
                "/" if args.len() == 2 => {
                    let d = numeral(&xs[2])?;
                    if d.is_zero() {
                        return Err(protocol("division by zero in polynomial".into()));
                    }
                    Ok(args[0].mul(&UniPoly::constant(BigRational::one() / d)))
                }
                _ => Err(protocol(format!("unsupported polynomial operator `{op}`"))),
            }
        }
    }
}

/// Decode one model value given its declared sort.
pub fn decode_value(expr: &SExpr, sort: &str) -> Result<ModelValue, ParseError> {
    if sort == "Bool" {
        return match expr.as_atom() {
            Some("true") => Ok(ModelValue::Bool(true)),
            Some("false") => Ok(ModelValue::Bool(false)),
            _ => Err(protocol(format!("expected a boolean, got `{expr}`"))),
        };
    }
    if expr.head() == Some("root-obj") {
        let xs = expr.as_list().unwrap();
        if xs.len() != 3 {
            return Err(protocol(format!("malformed `{expr}`")));
        }
        let poly = polynomial(&xs[1], "x")?;
        let index = numeral(&xs[2])?;
        let index: usize = index.to_integer().try_into().map_err(|_| protocol(format!("bad root index in `{expr}`")))?;
        let approx = poly.nth_root(index, 100).ok_or_else(|| protocol(format!("no such root: `{expr}`")))?;
        return Ok(ModelValue::Algebraic { approx, raw: expr.to_string() });
    }
    let value = numeral(expr)?;
    match sort {
        "Int" if value.is_integer() => Ok(ModelValue::Int(value.to_integer())),
        "Int" => Err(protocol(format!("non-integer value `{expr}` for an Int symbol"))),
        "Real" => Ok(ModelValue::Rational(value)),
        other => Err(protocol(format!("unsupported sort `{other}`"))),
    }
}

/// Parse a `get-model` response: `define-fun` forms, optionally wrapped in
/// `(model ...)` or a bare list. Definitions taking arguments are skipped.
pub fn parse_solver_model(text: &str) -> Result<Vec<ModelBinding>, ParseError> {
    let exprs = parse_sexprs(text)?;
    let mut defs = Vec::new();
    fn collect<'e>(e: &'e SExpr, out: &mut Vec<&'e SExpr>) {
        match e.head() {
            Some("define-fun") => out.push(e),
            Some("model") => e.as_list().unwrap()[1..].iter().for_each(|x| collect(x, out)),
            _ => {
                if let Some(xs) = e.as_list() {
                    if xs.iter().all(|x| x.as_list().is_some()) {
                        xs.iter().for_each(|x| collect(x, out));
                    }
                }
            }
        }
    }
    for e in &exprs {
        if e.head() == Some("error") {
            return Err(protocol(format!("solver error: {e}")));
        }
        collect(e, &mut defs);
    }
    let mut out = Vec::new();
    for d in defs {
        let xs = d.as_list().unwrap();
        if xs.len() != 5 {
            return Err(protocol(format!("malformed definition `{d}`")));
        }
        let symbol = xs[1].as_atom().ok_or_else(|| protocol(format!("malformed definition `{d}`")))?;
        if xs[2].as_list().map(|a| !a.is_empty()).unwrap_or(true) {
            continue;
        }
        let sort = xs[3].as_atom().ok_or_else(|| protocol(format!("unsupported sort in `{d}`")))?;
        out.push(ModelBinding { symbol: symbol.to_string(), value: decode_value(&xs[4], sort)? });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(text: &str) -> ModelValue {
        let b = parse_solver_model(text).unwrap();
        assert_eq!(b.len(), 1);
        b[0].value.clone()
    }

    #[test]
    fn real_decimal() {
        assert_eq!(one("(define-fun x_a () Real 1.0)"), ModelValue::Rational(BigRational::one()));
    }

    #[test]
    fn boolean() {
        let b = parse_solver_model("(define-fun holds_rccEC_a_c_1 () Bool true)").unwrap();
        assert_eq!(b[0].symbol, "holds_rccEC_a_c_1");
        assert_eq!(b[0].value, ModelValue::Bool(true));
    }

    #[test]
    fn exact_rational() {
        assert_eq!(one("(define-fun r_a () Real (/ 1 3))"), ModelValue::Rational(BigRational::new(1.into(), 3.into())));
        assert_eq!(one("(define-fun r_a () Real (- (/ 1.0 4.0)))"), ModelValue::Rational(BigRational::new((-1).into(), 4.into())));
    }

    #[test]
    fn wrapped_models_and_ints() {
        let text = "sat\n(model\n  (define-fun n () Int 3)\n  (define-fun m () Int (- 2))\n  (define-fun f ((x!0 Int)) Int 0)\n)";
        let exprs = parse_sexprs(text).unwrap();
        assert_eq!(exprs.len(), 2);
        let b = parse_solver_model(text).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[1].value, ModelValue::Int((-2).into()));
        let bare = parse_solver_model("(\n (define-fun n () Int 3))").unwrap();
        assert_eq!(bare[0].value, ModelValue::Int(3.into()));
    }

    #[test]
    fn algebraic_root() {
        let v = one("(define-fun x () Real (root-obj (+ (^ x 2) (- 2)) 2))");
        let ModelValue::Algebraic { approx, raw } = v else { panic!() };
        assert!((crate::numeric::to_f64(&approx) - 2f64.sqrt()).abs() < 1e-15);
        assert!(raw.starts_with("(root-obj"));
    }

    #[test]
    fn malformed_is_an_error() {
        assert!(parse_solver_model("(define-fun x () Real").is_err());
        assert!(parse_solver_model("(error \"model is not available\")").is_err());
    }
}
