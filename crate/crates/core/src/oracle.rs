//! Brute-force stable models over finite domains.
//!
//! `I` is stable on the intensional constants when `I` satisfies `F` and no
//! `J` below `I` (predicates shrink, functions arbitrary, something
//! differs) satisfies the star transform `F*` evaluated at `(I, J)`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::*;
use crate::transform::{CompletedTheory, GroundKey, GroundTheory, Value};

pub const DEFAULT_BOUND: u128 = 1 << 20;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("interpretation space of size {size} exceeds the bound {bound}")]
    DomainTooLarge { size: u128, bound: u128 },
    #[error("formula `{0}` mentions a symbol outside the finite intensional signature")]
    Unsupported(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiniteInterpretation {
    pub atoms: BTreeMap<GroundKey, bool>,
    pub functions: BTreeMap<GroundKey, Value>,
}

impl FiniteInterpretation {
    pub fn true_atoms(&self) -> Vec<&GroundKey> {
        self.atoms.iter().filter(|(_, v)| **v).map(|(k, _)| k).collect()
    }
}

impl std::fmt::Display for FiniteInterpretation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self.true_atoms().iter().map(|k| k.to_string()).collect();
        parts.extend(self.functions.iter().map(|(k, v)| format!("{k}={v}")));
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The pair `(I, J)`: `J` stands for the predicate and function variables.
pub struct ReductContext<'a> {
    pub i: &'a FiniteInterpretation,
    pub j: &'a FiniteInterpretation,
}

fn eval_term(t: &Term, interp: &FiniteInterpretation) -> Option<Value> {
    match t {
        Term::Sym(s) => Some(Value::Obj(s.clone())),
        Term::Int(i) => Some(Value::Int(*i)),
        Term::App(name, args) => {
            let args = args.iter().map(|a| eval_term(a, interp)).collect::<Option<Vec<_>>>()?;
            interp.functions.get(&GroundKey { name: name.clone(), args }).cloned()
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
            let (Value::Int(x), Value::Int(y)) = (eval_term(a, interp)?, eval_term(b, interp)?) else { return None };
            Some(Value::Int(match t {
                Term::Add(..) => x.checked_add(y)?,
                Term::Sub(..) => x.checked_sub(y)?,
                _ => x.checked_mul(y)?,
            }))
        }
        Term::Neg(a) => match eval_term(a, interp)? {
            Value::Int(x) => Some(Value::Int(-x)),
            _ => None,
        },
        Term::Var(_) | Term::Num(_) | Term::Placeholder => None,
    }
}

fn eval_atomic(f: &Formula, interp: &FiniteInterpretation) -> bool {
    match f {
        Formula::Atom { pred, args } => {
            let Some(args) = args.iter().map(|a| eval_term(a, interp)).collect::<Option<Vec<_>>>() else { return false };
            interp.atoms.get(&GroundKey { name: pred.clone(), args }).copied().unwrap_or(false)
        }
        Formula::FnEq { func, value } => match (eval_term(func, interp), eval_term(value, interp)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        },
        Formula::Cmp { lhs, op, rhs } => match (eval_term(lhs, interp), eval_term(rhs, interp)) {
            (Some(Value::Int(a)), Some(Value::Int(b))) => op.holds(a.cmp(&b)),
            (Some(a), Some(b)) => match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                _ => false,
            },
            _ => false,
        },
        _ => unreachable!(),
    }
}

/// Classical truth of a ground formula.
pub fn eval(f: &Formula, interp: &FiniteInterpretation) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::And(xs) => xs.iter().all(|x| eval(x, interp)),
        Formula::Or(xs) => xs.iter().any(|x| eval(x, interp)),
        Formula::Implies(a, b) => !eval(a, interp) || eval(b, interp),
        atomic => eval_atomic(atomic, interp),
    }
}

/// `F*` at `(I, J)`. An atomic formula holds when it holds both with the
/// intensional constants read from `J` and as evaluated in `I`; an
/// implication additionally requires the implication to hold in `I`.
pub fn star_transform(f: &Formula, ctx: &ReductContext) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::And(xs) => xs.iter().all(|x| star_transform(x, ctx)),
        Formula::Or(xs) => xs.iter().any(|x| star_transform(x, ctx)),
        Formula::Implies(g, h) => (!star_transform(g, ctx) || star_transform(h, ctx)) && (!eval(g, ctx.i) || eval(h, ctx.i)),
        atomic => eval_atomic(atomic, ctx.j) && eval_atomic(atomic, ctx.i),
    }
}

fn check_supported(f: &Formula, atoms: &BTreeSet<GroundKey>, functions: &BTreeMap<GroundKey, Vec<Value>>) -> Result<(), OracleError> {
    let mut ok = true;
    f.for_each_atomic(&mut |a| {
        if let Formula::Atom { pred, args } = a {
            ok &= GroundKey::from_args(pred, args).is_some_and(|k| atoms.contains(&k));
        }
    });
    f.for_each_term(&mut |t| {
        t.for_each_app(&mut |name, args| ok &= GroundKey::from_args(name, args).is_some_and(|k| functions.contains_key(&k)));
        let mut bad = false;
        fn no_reals(t: &Term, bad: &mut bool) {
            match t {
                Term::Num(_) | Term::Var(_) | Term::Placeholder => *bad = true,
                Term::App(_, xs) => xs.iter().for_each(|x| no_reals(x, bad)),
                Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                    no_reals(a, bad);
                    no_reals(b, bad);
                }
                Term::Neg(a) => no_reals(a, bad),
                _ => {}
            }
        }
        no_reals(t, &mut bad);
        ok &= !bad;
    });
    if ok {
        Ok(())
    } else {
        Err(OracleError::Unsupported(f.to_string()))
    }
}

fn space_size(atoms: usize, functions: &BTreeMap<GroundKey, Vec<Value>>, bound: u128) -> Result<u128, OracleError> {
    let mut size: u128 = 1;
    let mut grow = |factor: u128| -> Result<(), OracleError> {
        size = size.saturating_mul(factor);
        if size > bound {
            Err(OracleError::DomainTooLarge { size, bound })
        } else {
            Ok(())
        }
    };
    for _ in 0..atoms {
        grow(2)?;
    }
    for d in functions.values() {
        grow(d.len() as u128)?;
    }
    Ok(size)
}

/// Visit every interpretation in lexicographic order: atoms in key order
/// with `false` before `true`, then function values in domain order.
/// `allowed` limits which atoms may be true.
fn for_each_interpretation(
    atoms: &[GroundKey],
    allowed: &dyn Fn(&GroundKey) -> bool,
    functions: &[(GroundKey, Vec<Value>)],
    visit: &mut dyn FnMut(&FiniteInterpretation) -> bool,
) {
    let free: Vec<&GroundKey> = atoms.iter().filter(|k| allowed(k)).collect();
    let mut digits = vec![0usize; free.len() + functions.len()];
    let radix: Vec<usize> = free.iter().map(|_| 2).chain(functions.iter().map(|(_, d)| d.len())).collect();
    if radix.contains(&0) {
        return;
    }
    let mut interp = FiniteInterpretation {
        atoms: atoms.iter().map(|k| (k.clone(), false)).collect(),
        functions: functions.iter().map(|(k, d)| (k.clone(), d[0].clone())).collect(),
    };
    loop {
        for (i, k) in free.iter().enumerate() {
            interp.atoms.insert((*k).clone(), digits[i] == 1);
        }
        for (i, (k, d)) in functions.iter().enumerate() {
            interp.functions.insert(k.clone(), d[digits[free.len() + i]].clone());
        }
        if !visit(&interp) {
            return;
        }
        // Last position varies fastest, giving lexicographic order.
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < radix[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
}

pub fn enumerate_stable_models(theory: &GroundTheory, bound: u128) -> Result<Vec<FiniteInterpretation>, OracleError> {
    let f = theory.as_formula();
    check_supported(&f, &theory.atoms, &theory.functions)?;
    space_size(theory.atoms.len(), &theory.functions, bound)?;
    let atoms: Vec<GroundKey> = theory.atoms.iter().cloned().collect();
    let functions: Vec<(GroundKey, Vec<Value>)> = theory.functions.iter().map(|(k, d)| (k.clone(), d.clone())).collect();
    let mut models = Vec::new();
    for_each_interpretation(&atoms, &|_| true, &functions, &mut |i| {
        if eval(&f, i) && !has_smaller_witness(&f, i, &atoms, &functions) {
            models.push(i.clone());
        }
        true
    });
    Ok(models)
}

fn has_smaller_witness(f: &Formula, i: &FiniteInterpretation, atoms: &[GroundKey], functions: &[(GroundKey, Vec<Value>)]) -> bool {
    let mut found = false;
    for_each_interpretation(atoms, &|k| i.atoms[k], functions, &mut |j| {
        if j != i && star_transform(f, &ReductContext { i, j }) {
            found = true;
            return false;
        }
        true
    });
    found
}

/// Classical models of a completed theory, by exhaustive enumeration.
pub fn enumerate_completion_models(theory: &CompletedTheory, bound: u128) -> Result<Vec<FiniteInterpretation>, OracleError> {
    let f = Formula::and(theory.sentences.iter().map(|s| s.as_formula()).collect());
    check_supported(&f, &theory.atoms, &theory.functions)?;
    space_size(theory.atoms.len(), &theory.functions, bound)?;
    let atoms: Vec<GroundKey> = theory.atoms.iter().cloned().collect();
    let functions: Vec<(GroundKey, Vec<Value>)> = theory.functions.iter().map(|(k, d)| (k.clone(), d.clone())).collect();
    let mut models = Vec::new();
    for_each_interpretation(&atoms, &|_| true, &functions, &mut |i| {
        if eval(&f, i) {
            models.push(i.clone());
        }
        true
    });
    Ok(models)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::desugar_defaults;
    use crate::transform::ground;
    use crate::parser::parse_program;

    fn p(n: &str) -> Formula {
        Formula::atom(n, vec![])
    }

    fn interp(atoms: &[(&str, bool)]) -> FiniteInterpretation {
        FiniteInterpretation {
            atoms: atoms.iter().map(|(n, v)| (GroundKey::new(n, vec![]), *v)).collect(),
            functions: BTreeMap::new(),
        }
    }

    fn models_of(src: &str) -> Vec<FiniteInterpretation> {
        let prog = desugar_defaults(&parse_program(src).unwrap());
        enumerate_stable_models(&ground(&prog).unwrap(), DEFAULT_BOUND).unwrap()
    }

    #[test]
    fn star_of_atom_fails_when_j_drops_it() {
        let i = interp(&[("p", true)]);
        let j = interp(&[("p", false)]);
        assert!(!star_transform(&p("p"), &ReductContext { i: &i, j: &j }));
    }

    #[test]
    fn star_of_negation_and_top() {
        let i = interp(&[("p", false)]);
        for jp in [false, true] {
            let j = interp(&[("p", jp)]);
            assert!(star_transform(&Formula::not(p("p")), &ReductContext { i: &i, j: &j }));
            assert!(star_transform(&Formula::Top, &ReductContext { i: &i, j: &j }));
        }
    }

    #[test]
    fn minimal_model_of_definite_rule() {
        let m = models_of("constants p :: boolean. q :: boolean. p <- q.");
        assert_eq!(m, vec![interp(&[("p", false), ("q", false)])]);
    }

    #[test]
    fn negation_as_failure() {
        let m = models_of("constants p :: boolean. q :: boolean. p <- not q.");
        assert_eq!(m, vec![interp(&[("p", true), ("q", false)])]);
    }

    #[test]
    fn choice_gives_two_models() {
        let m = models_of("constants p :: boolean. {p}.");
        assert_eq!(m, vec![interp(&[("p", false)]), interp(&[("p", true)])]);
    }

    #[test]
    fn functions_take_defined_values() {
        let m = models_of("sorts v :: 0..2. constants f :: v. q :: boolean. q. f = 2 <- q.");
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].functions.values().next(), Some(&Value::Int(2)));
        let defaulted = models_of("sorts v :: 0..1. constants f :: v. {f = 1}. {f = 0}.");
        assert_eq!(defaulted.len(), 2);
    }

    #[test]
    fn bound_is_enforced() {
        let atoms: Vec<String> = (0..21).map(|i| format!("a{i}")).collect();
        let refs: Vec<&str> = atoms.iter().map(|s| s.as_str()).collect();
        let t = GroundTheory::propositional(vec![], &refs);
        assert!(matches!(enumerate_stable_models(&t, DEFAULT_BOUND), Err(OracleError::DomainTooLarge { .. })));
    }

    #[test]
    fn spatial_content_is_rejected() {
        let prog = parse_program("objects a, b :: circle. constants g :: boolean. g <- rccEC(a, b).").unwrap();
        assert!(matches!(enumerate_stable_models(&ground(&prog).unwrap(), DEFAULT_BOUND), Err(OracleError::Unsupported(_))));
    }
}
