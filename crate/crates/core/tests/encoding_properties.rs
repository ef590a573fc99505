use std::collections::BTreeMap;

use aspmtqs::qs::{assign, catalog, domain_axioms, evaluate_relation, RelationAtom, SpatialKind, CDC_RELATIONS, IA_RELATIONS, RCC5_BASE, RCC8_BASE};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;

type Object = (&'static str, SpatialKind, Vec<BigRational>);

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn holds(relation: &str, objects: &[&Object]) -> bool {
    let mut values = BTreeMap::new();
    for (name, kind, v) in objects {
        assign(name, *kind, None, v, &mut values);
    }
    let kinds: Vec<(&str, SpatialKind)> = objects.iter().map(|o| (o.0, o.1)).collect();
    evaluate_relation(&RelationAtom::new(relation, &kinds, None), &values).unwrap()
}

fn well_formed(object: &Object) -> bool {
    let mut values = BTreeMap::new();
    assign(object.0, object.1, None, &object.2, &mut values);
    domain_axioms(object.0, object.1, None).iter().all(|c| c.eval(&|v: &String| Ok::<_, ()>(values[v].clone())).unwrap())
}

fn circle(name: &'static str, x: BigRational, y: BigRational, r: BigRational) -> Object {
    (name, SpatialKind::Circle, vec![x, y, r])
}

/// Pairs of circles, biased towards tangent, equal and concentric
/// configurations so that boundary cases are exercised exactly.
fn circle_pair() -> impl Strategy<Value = (Object, Object)> {
    let base = (-12i64..12, -12i64..12, 1i64..10);
    (base.clone(), base, 0usize..6).prop_map(|((x, y, r), (x2, y2, r2), mode)| {
        let (ax, ay, ar) = (q(x, 2), q(y, 2), q(r, 2));
        let br = q(r2, 2);
        let offset = |len: BigRational| (&ax + &len * q(3, 5), &ay + len * q(4, 5));
        let b = match mode {
            0 => {
                let (bx, by) = offset(&ar + &br);
                circle("b", bx, by, br)
            }
            1 => {
                let (bx, by) = offset((&ar - &br).abs());
                circle("b", bx, by, br)
            }
            2 => circle("b", ax.clone(), ay.clone(), ar.clone()),
            3 => circle("b", ax.clone(), ay.clone(), br),
            _ => circle("b", q(x2, 2), q(y2, 2), br),
        };
        (circle("a", ax, ay, ar), b)
    })
}

fn point() -> impl Strategy<Value = (i64, i64)> {
    (-6i64..6, -6i64..6)
}

fn segment(name: &'static str, x1: i64, y1: i64, x2: i64, y2: i64) -> Object {
    (name, SpatialKind::Segment, vec![q(x1, 1), q(y1, 1), q(x2, 1), q(y2, 1)])
}

fn pt(name: &'static str, (x, y): (i64, i64)) -> Object {
    (name, SpatialKind::Point, vec![q(x, 1), q(y, 1)])
}

/// Axis-ordered segment: endpoints sorted on both coordinates.
fn box_segment(name: &'static str, a: (i64, i64), b: (i64, i64)) -> Option<Object> {
    let (x1, x2) = (a.0.min(b.0), a.0.max(b.0));
    let (y1, y2) = (a.1.min(b.1), a.1.max(b.1));
    (x1 < x2 && y1 < y2).then(|| segment(name, x1, y1, x2, y2))
}

fn triangle(name: &'static str, p: [(i64, i64); 3]) -> Option<Object> {
    let [a, mut b, mut c] = p;
    let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    if cross == 0 {
        return None;
    }
    if cross < 0 {
        std::mem::swap(&mut b, &mut c);
    }
    Some((name, SpatialKind::Triangle, [a, b, c].iter().flat_map(|(x, y)| [q(*x, 1), q(*y, 1)]).collect()))
}

fn count(names: &[String], objects: &[&Object]) -> usize {
    names.iter().filter(|n| holds(n, objects)).count()
}

/// Sampling classifier for circles in general position: no tangency and
/// no coincidence.
fn sampled_rcc8(a: &Object, b: &Object) -> Option<&'static str> {
    let f = |o: &Object| -> Vec<f64> { o.2.iter().map(|v| v.to_f64().unwrap()).collect() };
    let (ca, cb) = (f(a), f(b));
    let d = ((ca[0] - cb[0]).powi(2) + (ca[1] - cb[1]).powi(2)).sqrt();
    if (d - (ca[2] + cb[2])).abs() < 1e-2 || (d - (ca[2] - cb[2]).abs()).abs() < 1e-2 {
        return None;
    }
    let boundary_inside = |p: &[f64], o: &[f64]| -> (bool, bool) {
        let (mut any, mut all) = (false, true);
        for k in 0..1440 {
            let t = k as f64 * std::f64::consts::TAU / 1440.0;
            let (x, y) = (p[0] + p[2] * t.cos(), p[1] + p[2] * t.sin());
            let inside = (x - o[0]).powi(2) + (y - o[1]).powi(2) < o[2] * o[2];
            any |= inside;
            all &= inside;
        }
        (any, all)
    };
    let (a_any, a_all) = boundary_inside(&ca, &cb);
    let (b_any, b_all) = boundary_inside(&cb, &ca);
    Some(match (a_any, a_all, b_any, b_all) {
        (_, true, _, _) => "rccNTPP",
        (_, _, _, true) => "rccNTPPi",
        (false, _, false, _) => "rccDC",
        _ => "rccPO",
    })
}

fn names(prefix: &str, items: &[&str]) -> Vec<String> {
    items.iter().map(|i| format!("{prefix}{i}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn rcc8_base_relations_are_jointly_exhaustive_and_disjoint((a, b) in circle_pair()) {
        prop_assert!(well_formed(&a) && well_formed(&b));
        let base: Vec<String> = RCC8_BASE.iter().map(|s| s.to_string()).collect();
        prop_assert_eq!(count(&base, &[&a, &b]), 1);
    }

    #[test]
    fn rcc8_derived_relations_match_their_definitions((a, b) in circle_pair()) {
        let h = |r: &str| holds(r, &[&a, &b]);
        prop_assert_eq!(h("rccC"), h("rccO") || h("rccEC"));
        prop_assert_eq!(h("rccDR"), h("rccDC") || h("rccEC"));
        prop_assert_eq!(h("rccP"), h("rccPP") || h("rccEQ"));
        prop_assert_eq!(h("rccPP"), h("rccTPP") || h("rccNTPP"));
        prop_assert_eq!(h("rccO"), !h("rccDR"));
        prop_assert_eq!(h("rccC"), !h("rccDC"));
    }

    #[test]
    fn rcc8_inverses_swap_arguments((a, b) in circle_pair()) {
        for r in ["P", "PP", "TPP", "NTPP"] {
            prop_assert_eq!(holds(&format!("rcc{r}i"), &[&a, &b]), holds(&format!("rcc{r}"), &[&b, &a]));
        }
        for r in ["C", "DC", "EC", "O", "PO", "DR", "EQ"] {
            prop_assert_eq!(holds(&format!("rcc{r}"), &[&a, &b]), holds(&format!("rcc{r}"), &[&b, &a]));
        }
    }

    #[test]
    fn rcc8_agrees_with_boundary_sampling((a, b) in circle_pair()) {
        if let Some(expected) = sampled_rcc8(&a, &b) {
            prop_assert!(holds(expected, &[&a, &b]), "expected {}", expected);
        }
    }

    #[test]
    fn orientation_is_a_trichotomy(p in point(), s in (point(), point())) {
        prop_assume!(s.0 != s.1);
        let seg = segment("s", s.0.0, s.0.1, s.1.0, s.1.1);
        let p = pt("p", p);
        let n = count(&names("", &["left_of", "right_of", "collinear"]), &[&p, &seg]);
        prop_assert_eq!(n, 1);
    }

    #[test]
    fn nearer_than_is_asymmetric(a in point(), b in point(), c in point()) {
        let (a, b, c) = (pt("a", a), pt("b", b), pt("c", c));
        prop_assert!(!(holds("nearer_than", &[&a, &b, &c]) && holds("nearer_than", &[&b, &a, &c])));
    }

    #[test]
    fn cardinal_directions_partition_the_plane(a in point(), b in point()) {
        let (a, b) = (pt("a", a), pt("b", b));
        prop_assert_eq!(count(&names("cdc_", &CDC_RELATIONS), &[&a, &b]), 1);
    }

    #[test]
    fn interval_relations_partition_ordered_projections(a in (point(), point()), b in (point(), point())) {
        let (Some(a), Some(b)) = (box_segment("a", a.0, a.1), box_segment("b", b.0, b.1)) else { return Ok(()); };
        prop_assert_eq!(count(&names("ia_", &IA_RELATIONS), &[&a, &b]), 1);
        let ra: Vec<String> = IA_RELATIONS.iter().flat_map(|x| IA_RELATIONS.iter().map(move |y| format!("ra_{x}_{y}"))).collect();
        prop_assert_eq!(count(&ra, &[&a, &b]), 1);
    }

    #[test]
    fn rcc5_partitions_convex_triangles(a in [point(), point(), point()], b in [point(), point(), point()], same in 0usize..4) {
        let (Some(ta), Some(tb)) = (triangle("a", a), triangle("b", if same == 0 { a } else { b })) else { return Ok(()); };
        prop_assert!(well_formed(&ta) && well_formed(&tb));
        let objs = [&ta, &tb];
        prop_assert_eq!(count(&names("rcc5_", &RCC5_BASE), &objs), 1);
        prop_assert_eq!(holds("rcc5_o", &objs), !holds("rcc5_dr", &objs));
        prop_assert_eq!(holds("rcc5_p", &objs), holds("rcc5_pp", &objs) || holds("rcc5_eq", &objs));
        if same == 0 {
            prop_assert!(holds("rcc5_eq", &objs));
        }
    }
}

#[test]
fn tangent_circles_are_classified_exactly() {
    let a = circle("a", q(0, 1), q(0, 1), q(1, 1));
    let outside = circle("b", q(2, 1), q(0, 1), q(1, 1));
    let inside = circle("b", q(1, 1), q(0, 1), q(2, 1));
    assert!(holds("rccEC", &[&a, &outside]));
    assert!(holds("rccTPP", &[&a, &inside]));
    assert!(holds("rccTPPi", &[&inside, &a]));
}

#[test]
fn every_catalog_relation_evaluates() {
    for schema in catalog().iter() {
        let kinds: Vec<SpatialKind> = schema
            .args
            .iter()
            .map(|a| [SpatialKind::Point, SpatialKind::Segment, SpatialKind::Circle, SpatialKind::Triangle].into_iter().find(|k| a.accepts(*k)).unwrap())
            .collect();
        let names = ["a", "b", "c"];
        let mut values = BTreeMap::new();
        for (i, k) in kinds.iter().enumerate() {
            let v: Vec<BigRational> = (0..k.slots().len()).map(|j| q((i * 7 + j * 3) as i64 % 5 + 1, 1)).collect();
            assign(names[i], *k, None, &v, &mut values);
        }
        let objs: Vec<(&str, SpatialKind)> = kinds.iter().enumerate().map(|(i, k)| (names[i], *k)).collect();
        evaluate_relation(&RelationAtom::new(&schema.name, &objs, None), &values).unwrap();
    }
}
