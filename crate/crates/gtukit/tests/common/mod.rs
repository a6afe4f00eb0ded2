//! Random independent step pairs on library rules.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gtukit::fixtures::unit_by_name;
use gtukit_core::graph::{is_isomorphic, EdgeId, Graph, Morphism, VertexId};
use gtukit_core::library::{make_instance, standard_graphs, ProblemId};
use gtukit_core::rewrite::{
    applicable_matches, apply, close_diamond, parallel_independent, swap_sequential, DirectDerivation,
};
use gtukit_core::unit::Unit;

pub const UNITS: [&str; 6] = [
    "hampath",
    "stwbd(2)",
    "independent-set",
    "clique",
    "clique-to-independent-set",
    "hampath-to-2-bounded-spantree",
];

pub fn units() -> Vec<Unit> {
    UNITS.iter().map(|n| unit_by_name(n).unwrap()).collect()
}

pub fn hosts() -> &'static [Vec<Graph>] {
    static HOSTS: OnceLock<Vec<Vec<Graph>>> = OnceLock::new();
    HOSTS.get_or_init(|| (1..=6).map(standard_graphs).collect())
}

type Items = (BTreeSet<VertexId>, BTreeSet<EdgeId>);

fn image(m: &Morphism) -> Items {
    (m.vertices.values().copied().collect(), m.edges.values().copied().collect())
}

fn deleted(d: &DirectDerivation) -> Items {
    let (v, e) = image(&d.matching);
    (
        v.into_iter().filter(|x| !d.kept.vertices.contains_key(x)).collect(),
        e.into_iter().filter(|x| !d.kept.edges.contains_key(x)).collect(),
    )
}

fn created(d: &DirectDerivation) -> Items {
    let (v, e) = image(&d.comatch);
    let (kv, ke) = image(&d.kept);
    (v.difference(&kv).copied().collect(), e.difference(&ke).copied().collect())
}

fn disjoint(a: &Items, b: &Items) -> bool {
    a.0.is_disjoint(&b.0) && a.1.is_disjoint(&b.1)
}

pub fn steps_at(unit: &Unit, g: &Arc<Graph>) -> Vec<DirectDerivation> {
    unit.rules
        .iter()
        .flat_map(|r| applicable_matches(r, g).into_iter().map(move |m| apply(r, g, &m).unwrap()))
        .collect()
}

/// A random host: an instance of a random unit, then a few random steps.
pub fn random_state(units: &[Unit], hosts: &[Vec<Graph>], rng: &mut ChaCha8Rng) -> (usize, Arc<Graph>) {
    let u = rng.gen_range(0..units.len());
    let base = hosts[rng.gen_range(0..hosts.len())].choose(rng).unwrap();
    let id = ProblemId::parse(UNITS[u].split("-to-").next().unwrap()).unwrap();
    let k = id.needs_bound().then(|| rng.gen_range(0..=base.vertex_count()));
    let mut g = Arc::new(make_instance(id, base, k).unwrap());
    for _ in 0..rng.gen_range(0..6) {
        let all = steps_at(&units[u], &g);
        match all.choose(rng) {
            Some(d) => g = d.after.clone(),
            None => break,
        }
    }
    (u, g)
}

pub fn check_parallel(d1: &DirectDerivation, d2: &DirectDerivation) -> Result<bool, String> {
    let items = disjoint(&image(&d2.matching), &deleted(d1)) && disjoint(&image(&d1.matching), &deleted(d2));
    // both transported applications, computed here directly
    let direct = items
        && apply(&d2.rule, &d1.after, &d2.matching.then(&d1.kept)).is_ok()
        && apply(&d1.rule, &d2.after, &d1.matching.then(&d2.kept)).is_ok();
    let claimed = parallel_independent(d1, d2).map_err(|e| e.to_string())?;
    if claimed != direct {
        return Err(format!("independence verdict {claimed}, direct check {direct}"));
    }
    if !claimed {
        return Ok(false);
    }
    let (d2m, d1m) = close_diamond(d1, d2).map_err(|e| e.to_string())?;
    d2m.verify().map_err(|e| e.to_string())?;
    d1m.verify().map_err(|e| e.to_string())?;
    if d2m.before != d1.after || d1m.before != d2.after {
        return Err("closing steps start elsewhere".into());
    }
    let a = apply(&d2.rule, &d1.after, &d2.matching.then(&d1.kept)).unwrap().after;
    let b = apply(&d1.rule, &d2.after, &d1.matching.then(&d2.kept)).unwrap().after;
    if !is_isomorphic(&a, &b) || !is_isomorphic(&d1m.after, &d2m.after) || !is_isomorphic(&a, &d2m.after) {
        return Err("ends are not isomorphic".into());
    }
    Ok(true)
}

pub fn check_sequential(d1: &DirectDerivation, d2: &DirectDerivation) -> Result<bool, String> {
    let items = disjoint(&image(&d2.matching), &created(d1)) && disjoint(&deleted(d2), &image(&d1.comatch));
    let swapped = swap_sequential(d1, d2);
    let Ok((first, second)) = swapped else {
        return Ok(false);
    };
    if !items {
        return Err("swapped steps that share items".into());
    }
    first.verify().map_err(|e| e.to_string())?;
    second.verify().map_err(|e| e.to_string())?;
    if first.before != d1.before || first.after != second.before || first.rule != d2.rule || second.rule != d1.rule {
        return Err("swap is not a chain of the exchanged rules".into());
    }
    if !is_isomorphic(&second.after, &d2.after) {
        return Err("ends are not isomorphic".into());
    }
    Ok(true)
}

pub struct SweepResult {
    pub found: usize,
    pub dependent: usize,
    pub failures: Vec<String>,
}

/// Up to eight random pairs per host until `want` independent pairs of the
/// given kind are checked.
pub fn sweep(sequential: bool, want: usize, seed: u64) -> SweepResult {
    let (us, hs) = (units(), hosts());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut found, mut dependent, mut failures) = (0, 0, Vec::new());
    while found < want {
        let (u, g) = random_state(&us, hs, &mut rng);
        let firsts = steps_at(&us[u], &g);
        if firsts.is_empty() {
            continue;
        }
        for _ in 0..8 {
            let d1 = firsts.choose(&mut rng).unwrap();
            let ok = if sequential {
                let seconds = steps_at(&us[u], &d1.after);
                let Some(d2) = seconds.choose(&mut rng) else { continue };
                check_sequential(d1, d2)
            } else {
                check_parallel(d1, firsts.choose(&mut rng).unwrap())
            };
            match ok {
                Ok(true) => found += 1,
                Ok(false) => dependent += 1,
                Err(e) => {
                    found += 1;
                    failures.push(format!("{}: {e} on {g:?}", us[u].name));
                }
            }
            if found == want {
                break;
            }
        }
    }
    SweepResult { found, dependent, failures }
}

