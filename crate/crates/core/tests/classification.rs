mod common;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tlj_core::classify::{graph_from_solution, solution_from_graph, solution_from_graph_with, solutions_equivalent};
use tlj_core::fair::{
    balance_analysis, check_involution, find_balanced_involution, involution_variants, FairEdgeRecord, FairGraph,
    FairGraphData, FairVertexRecord,
};
use tlj_core::families::{generate_family, Family};
use tlj_core::fixtures::lambda1;
use tlj_core::graph::{standard_gamma, BiGraph, StandardKind};
use tlj_core::iso::{fair_graph_isomorphic, verify_iso_witness};
use tlj_core::mw::{check_mw_type, verify_dimension_function, MwCheck};
use tlj_core::random::random_unitaries;
use tlj_core::solution::{conjugate_solution, verify_equivalence_witness};

use common::{a_path, brute_force_iso, corpus, exhaustive_involution, two_vertex, zigzag_cup_form};

const TOL: f64 = 1e-9;

#[test]
fn graph_solution_graph_is_isomorphic() {
    for entry in corpus() {
        let s = solution_from_graph(&entry.graph, TOL).unwrap();
        assert!(zigzag_cup_form(&s) < 1e-12, "{}", entry.name);
        let back = graph_from_solution(&s, TOL).unwrap();
        let w = fair_graph_isomorphic(&entry.graph, &back, TOL).unwrap();
        let w = w.unwrap_or_else(|| panic!("{}", entry.name));
        assert!(verify_iso_witness(&entry.graph, &back, &w, TOL));
    }
}

#[test]
fn involution_choice_does_not_change_the_class() {
    let l = lambda1();
    let variants = involution_variants(&l, TOL, 4);
    assert!(variants.len() >= 2);
    let base = solution_from_graph_with(&l, &variants[0], TOL).unwrap();
    for inv in &variants[1..] {
        let s = solution_from_graph_with(&l, inv, TOL).unwrap();
        assert!(solutions_equivalent(&base, &s, TOL).unwrap());
    }
}

#[test]
fn conjugation_preserves_the_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for l in [lambda1(), a_path(5), two_vertex(5.0)] {
        let s = solution_from_graph(&l, TOL).unwrap();
        let u = random_unitaries(&s, &mut rng);
        let t = conjugate_solution(&s, &u).unwrap();
        assert!(zigzag_cup_form(&t) < 1e-10);
        assert!(solutions_equivalent(&s, &t, TOL).unwrap());
        let ident: Vec<Vec<usize>> = s.gamma().vertices().map(|a| (0..s.gradings().len(a)).collect()).collect();
        assert!(verify_equivalence_witness(&t, &s, &u, &ident, 1e-10).unwrap());
    }
}

#[test]
fn different_graphs_give_inequivalent_solutions() {
    let s = solution_from_graph(&two_vertex(2.0), TOL).unwrap();
    let g = s.gamma().clone();
    let t = tlj_core::random::random_solution(&g, 1, tlj_core::random::RandomParams { sheets: 2, relabel: true }).unwrap();
    assert!(!solutions_equivalent(&s, &t, TOL).unwrap());
}

/// Random small fair graphs over a one-vertex loop with integer weights
/// `k/2`, built as undirected multigraphs so that they are balanced.
fn random_small(rng: &mut ChaCha8Rng, g: &Arc<BiGraph>) -> Option<FairGraph> {
    let n = rng.random_range(1..=5);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i..n {
            if rng.random_bool(0.5) {
                let w = [0.5, 1.0, 2.0][rng.random_range(0..3)];
                let k = edges.len();
                edges.push(FairEdgeRecord { id: format!("e{k}a"), source: format!("v{i}"), target: format!("v{j}"), weight: w, pi: "e".into() });
                edges.push(FairEdgeRecord { id: format!("e{k}b"), source: format!("v{j}"), target: format!("v{i}"), weight: 1.0 / w, pi: "e".into() });
            }
        }
    }
    let vertices = (0..n).map(|i| FairVertexRecord { id: format!("v{i}"), pi: "a".into() }).collect();
    FairGraph::new(g.clone(), FairGraphData { vertices, edges }).ok()
}

#[test]
fn isomorphism_matches_brute_force() {
    let g = Arc::new(standard_gamma(StandardKind::Unoriented, &[2.0]).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut positives = 0;
    let mut negatives = 0;
    for seed in 0..300u64 {
        let Some(a) = random_small(&mut rng, &g) else { continue };
        let b = if seed % 2 == 0 {
            generate_family(&Family::Relabel(Box::new(a.clone()), seed), &g).unwrap()
        } else {
            match random_small(&mut rng, &g) {
                Some(b) => b,
                None => continue,
            }
        };
        let expect = brute_force_iso(&a, &b, TOL);
        let got = fair_graph_isomorphic(&a, &b, TOL).unwrap();
        assert_eq!(got.is_some(), expect, "seed {seed}");
        if let Some(w) = got {
            assert!(verify_iso_witness(&a, &b, &w, TOL));
            positives += 1;
        } else {
            negatives += 1;
        }
    }
    assert!(positives > 50 && negatives > 50, "{positives} / {negatives}");
}

#[test]
fn isomorphism_matches_brute_force_on_small_corpus_members() {
    let members: Vec<_> = corpus().into_iter().filter(|e| e.graph.vertex_count() <= 7).collect();
    for a in &members {
        for b in &members {
            let expect = brute_force_iso(&a.graph, &b.graph, TOL);
            let got = fair_graph_isomorphic(&a.graph, &b.graph, TOL);
            match got {
                Ok(w) => assert_eq!(w.is_some(), expect, "{} vs {}", a.name, b.name),
                Err(_) => assert!(!expect),
            }
        }
    }
}

/// Random graphs over the oriented pair: edges `e` with random weights,
/// each given a reciprocal partner with probability 0.8.
fn random_oriented(rng: &mut ChaCha8Rng, g: &Arc<BiGraph>) -> FairGraph {
    let n = rng.random_range(1..=4);
    let mut edges = Vec::new();
    let weights = [0.5, 1.0, 2.0, 4.0];
    for k in 0..rng.random_range(1..=7) {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        let w = weights[rng.random_range(0..4)];
        edges.push(FairEdgeRecord { id: format!("f{k}"), source: format!("v{i}"), target: format!("v{j}"), weight: w, pi: "e".into() });
        if rng.random_bool(0.8) {
            edges.push(FairEdgeRecord { id: format!("g{k}"), source: format!("v{j}"), target: format!("v{i}"), weight: 1.0 / w, pi: "e_bar".into() });
        }
    }
    let vertices = (0..n).map(|i| FairVertexRecord { id: format!("v{i}"), pi: "a".into() }).collect();
    FairGraph::new(g.clone(), FairGraphData { vertices, edges }).unwrap()
}

#[test]
fn balance_search_matches_exhaustive_search() {
    let g = Arc::new(standard_gamma(StandardKind::Oriented, &[2.5]).unwrap());
    let gu = Arc::new(standard_gamma(StandardKind::Unoriented, &[2.0]).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..300 {
        let l = if rng.random_bool(0.5) {
            random_oriented(&mut rng, &g)
        } else {
            match random_small(&mut rng, &gu) {
                Some(l) => l,
                None => continue,
            }
        };
        let expect = exhaustive_involution(&l, TOL);
        let found = balance_analysis(&l, TOL).involution;
        assert_eq!(found.is_some(), expect);
        if let Some(inv) = found {
            assert!(check_involution(&l, &inv, TOL).ok);
            yes += 1;
        } else {
            no += 1;
        }
    }
    assert!(yes > 30 && no > 30, "{yes} / {no}");
    for entry in corpus() {
        assert!(find_balanced_involution(&entry.graph, TOL).unwrap().is_some(), "{}", entry.name);
    }
}

#[test]
fn mw_type_splits_the_corpus() {
    for entry in corpus() {
        let check = check_mw_type(&entry.graph, TOL).unwrap();
        let cycle_free = entry.name.starts_with("lambda1") || entry.name.starts_with("a_path");
        match check {
            MwCheck::Dimension(d) => assert!(verify_dimension_function(&entry.graph, &d, TOL).ok, "{}", entry.name),
            MwCheck::Inconsistent(c) => {
                assert!(!cycle_free, "{}", entry.name);
                assert!((c.product - 1.0).abs() > TOL, "{}", entry.name);
            }
        }
    }
}

#[test]
fn reciprocal_pair_has_a_bad_cycle() {
    for (a, expect) in [(2.0, 0.25), (5.0, 0.04)] {
        match check_mw_type(&two_vertex(a), TOL).unwrap() {
            MwCheck::Inconsistent(c) => assert!((c.product - expect).abs() < 1e-12, "{c:?}"),
            other => panic!("{other:?}"),
        }
    }
    assert!(matches!(check_mw_type(&two_vertex(1.0), TOL).unwrap(), MwCheck::Dimension(_)));
}
