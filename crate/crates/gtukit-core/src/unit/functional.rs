//! Sufficient conditions for functionality, checked on a corpus.
//!
//! Condition 1 is checked for the pairs of rules that compete in some
//! control configuration. Conditions 2 and 3 read "reduced" relative to the
//! control: a state is reduced when no allowed step is left.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{explore, run_random, Unit};
use crate::graph::{canonical_key, Graph};
use crate::rewrite::{pair_witnesses, OverlapOptions, Witness};

#[derive(Clone, Copy, Debug)]
pub struct FunctionalityOptions {
    pub seed: u64,
    /// Randomized runs per corpus graph for the confluence spot-check.
    pub runs: usize,
    pub overlap: OverlapOptions,
}

impl Default for FunctionalityOptions {
    fn default() -> Self {
        FunctionalityOptions {
            seed: 0,
            runs: 2,
            overlap: OverlapOptions { label_simple: true },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionalityReport {
    /// Rule pairs enabled together in some configuration.
    pub checked_pairs: Vec<(usize, usize)>,
    /// Overlaps whose two applications neither commute nor coincide.
    pub independence: Vec<Witness>,
    /// Corpus indices with a successful state that still allows steps.
    pub successful_not_reduced: Vec<usize>,
    /// Corpus indices with a stuck state that is not successful.
    pub reduced_not_successful: Vec<usize>,
    /// Corpus indices where randomized runs end in non-isomorphic graphs
    /// or dead-end.
    pub confluence: Vec<usize>,
    /// Corpus indices where exploration hit the step budget.
    pub unbounded: Vec<usize>,
    /// Corpus indices outside the initial class.
    pub skipped: Vec<usize>,
}

impl FunctionalityReport {
    pub fn is_functional(&self) -> bool {
        self.independence.is_empty()
            && self.successful_not_reduced.is_empty()
            && self.reduced_not_successful.is_empty()
            && self.confluence.is_empty()
            && self.unbounded.is_empty()
    }
}

/// Unordered rule pairs that can fire from the same control
/// configuration.
pub fn competing_pairs(unit: &Unit) -> Vec<(usize, usize)> {
    unit.control.competing_pairs(unit.rules.len()).into_iter().collect()
}

pub fn check_functionality(unit: &Unit, corpus: &[Arc<Graph>], opts: FunctionalityOptions) -> FunctionalityReport {
    let mut report = FunctionalityReport {
        checked_pairs: competing_pairs(unit),
        ..Default::default()
    };
    for &(a, b) in &report.checked_pairs {
        let ws = pair_witnesses(&unit.rules[a], &unit.rules[b], (a, b), opts.overlap);
        report.independence.extend(ws.into_iter().filter(|w| !w.joinable));
    }
    for (i, g) in corpus.iter().enumerate() {
        if !unit.initial.contains(g) {
            report.skipped.push(i);
            continue;
        }
        let reach = explore(unit, g, None);
        if reach.truncated {
            report.unbounded.push(i);
        }
        let successful = |s: &super::StateInfo| s.accepting && s.terminal;
        if reach.states.iter().any(|s| successful(s) && s.allowed > 0) {
            report.successful_not_reduced.push(i);
        }
        if reach.states.iter().any(|s| !successful(s) && s.allowed == 0) {
            report.reduced_not_successful.push(i);
        }
        let mut ends = BTreeSet::new();
        let mut dead = false;
        for k in 0..opts.runs {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((i as u64) << 16) ^ k as u64);
            match run_random(unit, g, &mut rng) {
                Ok(r) => {
                    ends.insert(canonical_key(&r.result));
                }
                Err(_) => dead = true,
            }
        }
        if dead || ends.len() > 1 {
            report.confluence.push(i);
        }
    }
    report
}
