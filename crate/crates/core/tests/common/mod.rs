#![allow(dead_code)]

use rand::Rng;

/// Shape of a random propositional program.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub atoms: usize,
    pub rules: usize,
    /// Include a function `f :: 0..2` with rules `f = k <- ..`.
    pub function: bool,
    /// Choice rules and `not not` literals.
    pub choice: bool,
    /// Force a positive cycle.
    pub cyclic: bool,
}

fn literal<R: Rng>(rng: &mut R, atom: usize, positive_ok: bool, double: bool) -> String {
    let p = format!("p{atom}");
    match rng.gen_range(0..if positive_ok { 4 } else { 2 }) {
        0 => format!("not {p}"),
        1 if double => format!("not not {p}"),
        1 => format!("not {p}"),
        _ => p,
    }
}

/// Body literals; positive atoms are drawn from `p0 .. p{below - 1}`.
fn body<R: Rng>(rng: &mut R, shape: &Shape, below: usize) -> Vec<String> {
    let n = rng.gen_range(0..=3);
    let mut out = Vec::new();
    for _ in 0..n {
        let a = rng.gen_range(0..shape.atoms);
        out.push(literal(rng, a, a < below, shape.choice));
    }
    if shape.function && rng.gen_bool(0.2) {
        out.push(format!("not f = {}", rng.gen_range(0..=2)));
    }
    out
}

fn rule(head: &str, body: &[String]) -> String {
    if body.is_empty() {
        format!("{head}.")
    } else {
        format!("{head} <- {}.", body.join(" & "))
    }
}

/// Acyclic unless `shape.cyclic`: positive edges go from `p_i` to lower
/// indices only, and `f` sits above every atom.
pub fn program<R: Rng>(rng: &mut R, shape: &Shape) -> String {
    let mut out = String::from("sorts v :: 0..2.\nconstants\n");
    for i in 0..shape.atoms {
        out.push_str(&format!("  p{i} :: boolean.\n"));
    }
    if shape.function {
        out.push_str("  f :: v.\n");
    }
    for _ in 0..shape.rules {
        let kind = rng.gen_range(0..10);
        if kind == 0 {
            let b = body(rng, shape, shape.atoms);
            if !b.is_empty() {
                out.push_str(&format!("<- {}.\n", b.join(" & ")));
            }
        } else if shape.function && kind == 1 {
            let mut b = body(rng, shape, shape.atoms);
            b.retain(|l| !l.contains(" f ") && !l.starts_with("f "));
            out.push_str(&rule(&format!("f = {}", rng.gen_range(0..=2)), &b));
            out.push('\n');
        } else {
            let h = rng.gen_range(0..shape.atoms);
            let b = body(rng, shape, h);
            let head = if shape.choice && rng.gen_bool(0.3) { format!("{{p{h}}}") } else { format!("p{h}") };
            out.push_str(&rule(&head, &b));
            out.push('\n');
        }
    }
    if shape.cyclic {
        let a = rng.gen_range(0..shape.atoms);
        let b = rng.gen_range(0..shape.atoms);
        out.push_str(&format!("p{a} <- p{b}.\n"));
        if a != b {
            let extra = body(rng, shape, 0);
            let mut lits = vec![format!("p{a}")];
            lits.extend(extra);
            out.push_str(&rule(&format!("p{b}"), &lits));
            out.push('\n');
        }
    }
    out
}
