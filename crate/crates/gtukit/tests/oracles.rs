use std::time::Instant;

use gtukit::fixtures::builtin_unit;
use gtukit::sweep::oracle_sweep;
use gtukit_core::library::{connected_corpus, make_instance, standard_corpus, ProblemId};

#[test]
fn hampath_matches_permutation_oracle() {
    let corpus = connected_corpus(1, 6);
    assert_eq!(corpus.len(), 143);
    let unit = builtin_unit(ProblemId::Hampath).unwrap();
    let t = Instant::now();
    let cases = oracle_sweep(&unit, ProblemId::Hampath, &corpus, None);
    let bad: Vec<_> = cases.iter().filter(|c| !c.agrees()).collect();
    assert!(bad.is_empty(), "{bad:?}");
    eprintln!("hampath sweep {:?}", t.elapsed());
}

#[test]
fn stwbd_matches_spanning_tree_oracle() {
    let corpus = standard_corpus(1, 5);
    for k in 1..=3 {
        let id = ProblemId::Stwbd(k);
        let unit = builtin_unit(id).unwrap();
        let t = Instant::now();
        let cases = oracle_sweep(&unit, id, &corpus, None);
        let bad: Vec<_> = cases.iter().filter(|c| !c.agrees()).collect();
        assert!(bad.is_empty(), "k={k}: {bad:?}");
        eprintln!("stwbd({k}) sweep {:?}", t.elapsed());
    }
}

#[test]
fn clique_and_independent_set_match_subset_oracle() {
    let base = standard_corpus(1, 5);
    for id in [ProblemId::Clique, ProblemId::IndependentSet] {
        let unit = builtin_unit(id).unwrap();
        let instances: Vec<_> = base
            .iter()
            .flat_map(|g| (0..=5).map(move |k| make_instance(id, g, Some(k)).unwrap()))
            .collect();
        let t = Instant::now();
        let cases = oracle_sweep(&unit, id, &instances, None);
        let bad: Vec<_> = cases.iter().filter(|c| !c.agrees()).collect();
        assert!(bad.is_empty(), "{id}: {bad:?}");
        eprintln!("{id} sweep {:?} on {}", t.elapsed(), instances.len());
    }
}
