use std::sync::Arc;

use gtukit::proofs::load_proof;
use gtukit_core::ds::Origin;
use gtukit_core::graph::is_isomorphic;
use gtukit_core::proof::{
    backward_prove, backward_prove_preprocessed, forward_prove, preprocess, replay_log, ProofFailure,
};
use gtukit_core::unit::{check_successful, run_functional};

#[test]
fn example8_forward() {
    let p = load_proof("example8").unwrap();
    let g = p.instance.clone().unwrap();
    let run = forward_prove(&p.cfg, &g, p.forward_witness.as_ref().unwrap()).unwrap();
    assert_eq!(run.verdict, Ok(()), "{:?}", run.verdict);
    check_successful(&p.cfg.target, &run.constructed).unwrap();
    // the moved witness ends at the target's terminal graph
    let red = run_functional(&p.cfg.red, &g).unwrap();
    assert_eq!(run.constructed.first(), &red.result);
    assert_eq!(run.constructed.application_sequence(), p.forward_witness.unwrap().application_sequence());
    let replayed = replay_log(&p.cfg, &run.trace.initial, &run.trace.log).unwrap();
    assert_eq!(replayed, run.trace.ds);
    gtukit_core::ds::verify(&run.trace.ds).unwrap();
}

#[test]
fn example8_backward_sprouts_rule_2() {
    let p = load_proof("example8").unwrap();
    let g = p.instance.clone().unwrap();
    let run = backward_prove(&p.cfg, &g, p.backward_witness.as_ref().unwrap()).unwrap();
    assert_eq!(run.verdict, Ok(()), "{:?}", run.verdict);
    check_successful(&p.cfg.source, &run.constructed).unwrap();
    assert_eq!(run.constructed.first(), &g);
    assert!(run
        .trace
        .log
        .iter()
        .any(|op| matches!(op, gtukit_core::proof::Operation::Sprout { section: 0, .. })));
    assert!(run.trace.ds.arcs().iter().any(|a| a.origin == Origin::Interchange));
}

#[test]
fn example9_forward_length() {
    let p = load_proof("example9").unwrap();
    let g = p.instance.clone().unwrap();
    let run = forward_prove(&p.cfg, &g, p.forward_witness.as_ref().unwrap()).unwrap();
    assert_eq!(run.verdict, Ok(()), "{:?}", run.verdict);
    let n = g.vertex_count();
    let seq = run.constructed.application_sequence();
    assert_eq!(seq.len(), n + 1 + (n - 1));
    assert_eq!(seq.iter().filter(|r| *r == "3").count(), n - 1);
    let last = run.constructed.last();
    let t_edges = last.edges().iter().filter(|e| e.label.as_str() == "t" && !e.is_loop()).count();
    assert_eq!(t_edges, 2 * (n - 1));
    let replayed = replay_log(&p.cfg, &run.trace.initial, &run.trace.log).unwrap();
    assert_eq!(replayed, run.trace.ds);
}

#[test]
fn example9_backward_direct() {
    let p = load_proof("example9").unwrap();
    let g = p.instance.clone().unwrap();
    let run = backward_prove(&p.cfg, &g, p.backward_witness.as_ref().unwrap()).unwrap();
    assert_eq!(run.verdict, Ok(()), "{:?}", run.verdict);
    check_successful(&p.cfg.source, &run.constructed).unwrap();
}

#[test]
fn example9_backward_needs_preprocessing() {
    let p = load_proof("example9").unwrap();
    let g = p.instance.clone().unwrap();
    let w = p.rearrange_witness.as_ref().unwrap();
    let run = backward_prove(&p.cfg, &g, w).unwrap();
    assert_eq!(run.verdict, Err(ProofFailure::PreprocessingRequired));
    let pre = preprocess(&p.cfg, &g, w).unwrap();
    assert_ne!(&pre.derivation, w);
    assert!(is_isomorphic(pre.derivation.last(), w.last()) || pre.derivation.last() == w.last());
    let run = backward_prove_preprocessed(&p.cfg, &g, w).unwrap();
    assert_eq!(run.verdict, Ok(()), "{:?}", run.verdict);
    assert!(run.preprocessed.is_some());
    check_successful(&p.cfg.source, &run.constructed).unwrap();
    let replayed = replay_log(&p.cfg, &run.trace.initial, &run.trace.log).unwrap();
    assert_eq!(replayed, run.trace.ds);
}

#[test]
fn single_vertex_hampath() {
    let p = load_proof("example9").unwrap();
    let g = Arc::new(gtukit_core::graph::Graph::undirected(&[1], &[]));
    let w = run_functional(&p.cfg.source, &g).unwrap().derivation;
    let run = forward_prove(&p.cfg, &g, &w).unwrap();
    assert_eq!(run.verdict, Ok(()));
    assert_eq!(run.constructed.application_sequence(), vec!["1", "2"]);
}
