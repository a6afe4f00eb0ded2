use std::sync::Arc;

use gtukit::proofs::load_proof;
use gtukit::sweep::reduction_sweep;
use gtukit_core::graph::{complement, is_isomorphic, Graph};
use gtukit_core::library::{connected_corpus, make_instance, split_instance, standard_corpus, ProblemId};
use gtukit_core::proof::{backward_prove_preprocessed, ProofConfig};
use gtukit_core::rewrite::Derivation;
use gtukit_core::unit::{allowed_steps, check_successful, run_functional, RunState, Unit};

fn clique_corpus(max: usize) -> Vec<Graph> {
    standard_corpus(1, max)
        .iter()
        .flat_map(|g| (0..=4).map(move |k| make_instance(ProblemId::Clique, g, Some(k)).unwrap()))
        .collect()
}

#[test]
fn clique_to_independent_set_on_corpus() {
    let p = load_proof("example8").unwrap();
    let cases = reduction_sweep(&p.cfg, &clique_corpus(4), None);
    let bad: Vec<_> = cases.iter().filter(|c| !c.passed).collect();
    assert!(bad.is_empty(), "{bad:#?}");
    assert!(cases.iter().any(|c| c.forward.is_some()));
}

#[test]
fn hampath_to_spanning_tree_on_corpus() {
    let p = load_proof("example9").unwrap();
    let cases = reduction_sweep(&p.cfg, &connected_corpus(1, 5), None);
    let bad: Vec<_> = cases.iter().filter(|c| !c.passed).collect();
    assert!(bad.is_empty(), "{bad:#?}");
    assert!(cases.iter().any(|c| c.preprocessed));
}

#[test]
fn reduction_length_and_complement() {
    let p = load_proof("example8").unwrap();
    for g in clique_corpus(5) {
        let n = split_instance(&g).unwrap().0.vertex_count();
        let r = run_functional(&p.cfg.red, &Arc::new(g.clone())).unwrap();
        assert_eq!(r.derivation.len(), n * (n - 1));
        let (base, _) = split_instance(&g).unwrap();
        let (out, _) = split_instance(&r.result).unwrap();
        assert!(is_isomorphic(&out, &complement(&base).unwrap()));
    }
}

#[test]
fn broken_reduction_is_flagged() {
    let p = load_proof("example8").unwrap();
    let red = &p.cfg.red;
    let broken = Unit::new(
        "broken",
        red.initial.clone(),
        red.rules[..2].to_vec(),
        Some("1!; 2!"),
        red.terminal.clone(),
    )
    .unwrap();
    let cfg = ProofConfig {
        red: broken,
        first_part: vec![0, 1],
        ..p.cfg.clone()
    };
    let cases = reduction_sweep(&cfg, &clique_corpus(3), None);
    assert!(cases.iter().any(|c| !c.passed));
}

/// Every successful derivation of `unit` from `g`, by exhaustive search.
fn all_successful(unit: &Unit, g: &Arc<Graph>) -> Vec<Derivation> {
    fn go(unit: &Unit, rs: RunState, out: &mut Vec<Derivation>) {
        let steps = allowed_steps(unit, &rs);
        if steps.is_empty() && rs.is_successful(unit) {
            out.push(rs.derivation.clone());
        }
        for s in steps {
            go(unit, rs.advance(unit, &s).unwrap(), out);
        }
    }
    let mut out = Vec::new();
    go(unit, RunState::start(unit, g.clone()), &mut out);
    out
}

#[test]
fn every_spanning_path_witness_preprocesses() {
    let p = load_proof("example9").unwrap();
    // a path on four vertices: roots at inner vertices need rearranging
    let g = Arc::new(Graph::undirected(&[1, 2, 3, 4], &[(1, 2), (2, 3), (3, 4)]));
    let ws: Vec<Derivation> = all_successful(&p.cfg.target, &g)
        .into_iter()
        .filter(|d| d.steps().iter().filter(|s| s.rule.name == "1").count() == 4)
        .collect();
    assert!(!ws.is_empty());
    let mut rearranged = 0;
    for w in &ws {
        check_successful(&p.cfg.target, w).unwrap();
        let run = backward_prove_preprocessed(&p.cfg, &g, w).unwrap();
        assert_eq!(run.verdict, Ok(()), "{:?}", w.application_sequence());
        rearranged += run.preprocessed.is_some() as usize;
    }
    assert!(rearranged > 0 && rearranged < ws.len());
}
