mod common;

use std::collections::BTreeSet;

use aspmtqs::oracle::{enumerate_completion_models, enumerate_stable_models, FiniteInterpretation, DEFAULT_BOUND};
use aspmtqs::pipeline;
use aspmtqs::transform::{clark_completion, dependency_graph, desugar_defaults, ground, is_tight, to_clark_normal_form};
use common::Shape;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generate(seed: u64, shape: Shape) -> String {
    common::program(&mut ChaCha8Rng::seed_from_u64(seed), &shape)
}

fn shape(atoms: usize, function: bool, choice: bool, cyclic: bool) -> Shape {
    Shape { atoms, rules: atoms + atoms / 2, function, choice, cyclic }
}

fn models(src: &str) -> (Vec<FiniteInterpretation>, Vec<FiniteInterpretation>) {
    let program = pipeline::parse(src).unwrap();
    let (_, g) = pipeline::prepare(&program).unwrap();
    assert!(is_tight(&dependency_graph(&g)).tight, "{src}");
    let stable: BTreeSet<_> = enumerate_stable_models(&g, DEFAULT_BOUND).unwrap().into_iter().collect();
    let completion: BTreeSet<_> = enumerate_completion_models(&clark_completion(&g), DEFAULT_BOUND).unwrap().into_iter().collect();
    (stable.into_iter().collect(), completion.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn completion_agrees_with_stable_models_on_tight_programs(seed in any::<u64>(), atoms in 1usize..=5, function in any::<bool>(), choice in any::<bool>()) {
        let src = generate(seed, shape(atoms, function, choice, false));
        let (stable, completion) = models(&src);
        prop_assert_eq!(stable, completion, "{}", src);
    }

    #[test]
    fn stable_models_of_normal_programs_form_an_antichain(seed in any::<u64>(), atoms in 1usize..=6) {
        let src = generate(seed, shape(atoms, false, false, false));
        let (stable, _) = models(&src);
        for i in &stable {
            for j in &stable {
                let ti: BTreeSet<_> = i.true_atoms().into_iter().collect();
                let tj: BTreeSet<_> = j.true_atoms().into_iter().collect();
                prop_assert!(!(tj.is_subset(&ti) && tj != ti), "{} below {} in\n{}", j, i, src);
            }
        }
    }

    #[test]
    fn facts_hold_in_every_stable_model(seed in any::<u64>(), atoms in 1usize..=5, fact in 0usize..5) {
        let fact = fact % atoms;
        let mut src = generate(seed, shape(atoms, false, true, false));
        src.push_str(&format!("p{fact}.\n"));
        let (stable, _) = models(&src);
        for m in &stable {
            prop_assert!(m.true_atoms().iter().any(|k| k.to_string() == format!("p{fact}")), "{} in\n{}", m, src);
        }
    }

    #[test]
    fn normal_form_is_idempotent(seed in any::<u64>(), atoms in 1usize..=6, function in any::<bool>(), choice in any::<bool>(), cyclic in any::<bool>()) {
        let src = generate(seed, shape(atoms, function, choice, cyclic));
        let (_, g) = pipeline::prepare(&pipeline::parse(&src).unwrap()).unwrap();
        let once = to_clark_normal_form(&g);
        prop_assert_eq!(to_clark_normal_form(&once), once);
    }

    #[test]
    fn desugaring_defaults_keeps_the_dependency_graph(seed in any::<u64>(), atoms in 1usize..=6, cyclic in any::<bool>()) {
        let src = generate(seed, shape(atoms, false, true, cyclic));
        let program = pipeline::parse(&src).unwrap();
        let mut plain = program.clone();
        plain.rules.iter_mut().for_each(|r| r.choice = false);
        let with = dependency_graph(&ground(&desugar_defaults(&program)).unwrap());
        let without = dependency_graph(&ground(&plain).unwrap());
        prop_assert_eq!(is_tight(&with).tight, is_tight(&without).tight);
        prop_assert_eq!(with, without);
    }

    #[test]
    fn display_round_trips_through_the_parser(seed in any::<u64>(), atoms in 1usize..=6, function in any::<bool>(), choice in any::<bool>(), cyclic in any::<bool>()) {
        let src = generate(seed, shape(atoms, function, choice, cyclic));
        let program = pipeline::parse(&src).unwrap();
        let printed = program.to_string();
        let reparsed = pipeline::parse(&printed).unwrap();
        prop_assert_eq!(reparsed.without_spans(), program.without_spans(), "{}", printed);
    }

    #[test]
    fn witness_cycles_follow_graph_edges(seed in any::<u64>(), atoms in 1usize..=6, choice in any::<bool>()) {
        let src = generate(seed, shape(atoms, false, choice, true));
        let err = pipeline::compile_source(&src).unwrap_err();
        prop_assert_eq!(err.stage, pipeline::Stage::Tightness);
        let (_, g) = pipeline::prepare(&pipeline::parse(&src).unwrap()).unwrap();
        let graph = dependency_graph(&g);
        let cycle = err.cycle.unwrap();
        prop_assert!(!cycle.is_empty());
        for (i, v) in cycle.iter().enumerate() {
            let w = &cycle[(i + 1) % cycle.len()];
            prop_assert!(graph.edges.contains(&(v.clone(), w.clone())), "{} -> {} missing", v, w);
        }
    }
}

#[test]
fn choice_rule_keeps_both_models() {
    let (stable, completion) = models("constants p :: boolean. {p}.");
    assert_eq!(stable.len(), 2);
    assert_eq!(stable, completion);
}

#[test]
fn defaults_admit_comparable_stable_models() {
    let (stable, _) = models("constants p :: boolean. {p}.");
    let sizes: BTreeSet<usize> = stable.iter().map(|m| m.true_atoms().len()).collect();
    assert_eq!(sizes, [0, 1].into_iter().collect());
}

#[test]
fn positive_loop_is_rejected_with_its_cycle() {
    let err = pipeline::compile_source("constants p :: boolean. q :: boolean. p <- q. q <- p.").unwrap_err();
    assert_eq!(err.stage, pipeline::Stage::Tightness);
    let names: BTreeSet<String> = err.cycle.unwrap().iter().map(|k| k.to_string()).collect();
    assert_eq!(names, ["p", "q"].iter().map(|s| s.to_string()).collect());
}

#[test]
fn loop_through_negation_is_tight() {
    let (stable, completion) = models("constants p :: boolean. q :: boolean. p <- not q. q <- not p.");
    assert_eq!(stable.len(), 2);
    assert_eq!(stable, completion);
}
