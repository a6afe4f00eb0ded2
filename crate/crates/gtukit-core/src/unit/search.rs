//! Exhaustive search over permitted derivations, memoized on the canonical
//! key of the graph and the automaton configuration.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{steps_at, Config, Unit};
use crate::graph::{canonical_key, CanonicalKey, Graph};
use crate::rewrite::{apply, Derivation, DirectDerivation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub value: bool,
    /// A successful derivation when `value` holds.
    pub witness: Option<Derivation>,
    /// Distinct (graph class, configuration) states visited.
    pub explored: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("the input graph is not in the initial class")]
    NotInitial,
    #[error("step budget {budget} exhausted after {explored} states without a decision")]
    BudgetExhausted { budget: usize, explored: usize },
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SearchOptions {
    /// Maximal derivation length; defaults to `4·size(G)²`.
    pub budget: Option<usize>,
    /// Shuffles the allowed steps at every state with this seed.
    pub shuffle: Option<u64>,
}

pub fn decide(unit: &Unit, g: &Arc<Graph>) -> Result<Decision, DecideError> {
    decide_with(unit, g, SearchOptions::default())
}

struct Node {
    graph: Arc<Graph>,
    config: Config,
    depth: usize,
    parent: Option<(usize, DirectDerivation)>,
}

fn witness(nodes: &[Node], mut at: usize) -> Derivation {
    let mut steps = Vec::new();
    while let Some((p, d)) = &nodes[at].parent {
        steps.push(d.clone());
        at = *p;
    }
    steps.reverse();
    Derivation::from_steps(nodes[at].graph.clone(), steps).expect("search steps chain")
}

/// Breadth-first search for a successful derivation.
pub fn decide_with(unit: &Unit, g: &Arc<Graph>, opts: SearchOptions) -> Result<Decision, DecideError> {
    if !unit.initial.contains(g) {
        return Err(DecideError::NotInitial);
    }
    let budget = opts.budget.unwrap_or_else(|| Unit::default_budget(g));
    let mut rng = opts.shuffle.map(ChaCha8Rng::seed_from_u64);
    let mut seen: BTreeMap<(CanonicalKey, Config), ()> = BTreeMap::new();
    let mut nodes = alloc::vec![Node {
        graph: g.clone(),
        config: unit.control.initial(),
        depth: 0,
        parent: None,
    }];
    seen.insert((canonical_key(g), nodes[0].config.clone()), ());
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    while let Some(i) = queue.pop_front() {
        let resolved = unit.control.resolve(&nodes[i].config, &unit.rules, &nodes[i].graph);
        if unit.control.is_accepting(&resolved) && unit.terminal.contains(&nodes[i].graph) {
            return Ok(Decision {
                value: true,
                witness: Some(witness(&nodes, i)),
                explored: seen.len(),
            });
        }
        let mut steps = steps_at(unit, &resolved, &nodes[i].graph);
        if steps.is_empty() {
            continue;
        }
        if nodes[i].depth >= budget {
            truncated = true;
            continue;
        }
        if let Some(rng) = rng.as_mut() {
            steps.shuffle(rng);
        }
        for s in steps {
            let d = apply(&unit.rules[s.rule], &nodes[i].graph, &s.matching).expect("allowed steps apply");
            let config = unit.control.step(&resolved, s.rule);
            let key = (canonical_key(&d.after), config);
            if seen.insert(key.clone(), ()).is_some() {
                continue;
            }
            nodes.push(Node {
                graph: d.after.clone(),
                config: key.1,
                depth: nodes[i].depth + 1,
                parent: Some((i, d)),
            });
            queue.push_back(nodes.len() - 1);
        }
    }
    if truncated {
        return Err(DecideError::BudgetExhausted {
            budget,
            explored: seen.len(),
        });
    }
    Ok(Decision {
        value: false,
        witness: None,
        explored: seen.len(),
    })
}

/// One explored state.
#[derive(Clone, Debug)]
pub struct StateInfo {
    pub graph: Arc<Graph>,
    pub config: Config,
    pub resolved: Config,
    /// Number of allowed steps.
    pub allowed: usize,
    pub accepting: bool,
    pub terminal: bool,
    /// Derivation reaching the state.
    pub path: Derivation,
}

/// Every permitted state reachable from `g` (up to isomorphism) and every
/// direct derivation taken between them.
#[derive(Clone, Debug)]
pub struct Reachability {
    pub states: Vec<StateInfo>,
    /// `(from state, rule, step)`.
    pub steps: Vec<(usize, usize, DirectDerivation)>,
    pub truncated: bool,
}

pub fn explore(unit: &Unit, g: &Arc<Graph>, budget: Option<usize>) -> Reachability {
    let budget = budget.unwrap_or_else(|| Unit::default_budget(g));
    let mut seen: BTreeMap<(CanonicalKey, Config), usize> = BTreeMap::new();
    let mut nodes = alloc::vec![Node {
        graph: g.clone(),
        config: unit.control.initial(),
        depth: 0,
        parent: None,
    }];
    seen.insert((canonical_key(g), nodes[0].config.clone()), 0);
    let mut out = Reachability {
        states: Vec::new(),
        steps: Vec::new(),
        truncated: false,
    };
    let mut queue = VecDeque::from([0usize]);
    let mut infos: BTreeMap<usize, StateInfo> = BTreeMap::new();
    while let Some(i) = queue.pop_front() {
        let resolved = unit.control.resolve(&nodes[i].config, &unit.rules, &nodes[i].graph);
        let steps = steps_at(unit, &resolved, &nodes[i].graph);
        infos.insert(
            i,
            StateInfo {
                graph: nodes[i].graph.clone(),
                config: nodes[i].config.clone(),
                accepting: unit.control.is_accepting(&resolved),
                terminal: unit.terminal.contains(&nodes[i].graph),
                resolved: resolved.clone(),
                allowed: steps.len(),
                path: witness(&nodes, i),
            },
        );
        if !steps.is_empty() && nodes[i].depth >= budget {
            out.truncated = true;
            continue;
        }
        for s in steps {
            let d = apply(&unit.rules[s.rule], &nodes[i].graph, &s.matching).expect("allowed steps apply");
            let config = unit.control.step(&resolved, s.rule);
            out.steps.push((i, s.rule, d.clone()));
            let key = (canonical_key(&d.after), config);
            if seen.contains_key(&key) {
                continue;
            }
            seen.insert(key.clone(), nodes.len());
            nodes.push(Node {
                graph: d.after.clone(),
                config: key.1,
                depth: nodes[i].depth + 1,
                parent: Some((i, d)),
            });
            queue.push_back(nodes.len() - 1);
        }
    }
    out.states = infos.into_values().collect();
    out
}
