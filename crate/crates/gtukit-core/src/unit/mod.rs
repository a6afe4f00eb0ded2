//! Graph transformation units: initial class, rules, control, terminal class.

mod class;
mod control;
mod functional;
mod measure;
mod search;

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

pub use class::{bound_value, bound_vertex, split_plus, GraphClass, BOUND};
pub use control::{
    compile_control, parse_control, Config, ControlAutomaton, ControlError, ControlExpr, Transition,
};
pub use functional::{check_functionality, competing_pairs, FunctionalityOptions, FunctionalityReport};
pub use measure::{verify_decreasing_measure, Measure, MeasureError, MeasureReport, MeasureViolation};
pub use search::{decide, decide_with, explore, DecideError, Decision, Reachability, SearchOptions, StateInfo};

use crate::graph::{Graph, Morphism};
use crate::rewrite::{applicable_matches, apply, Derivation, DirectDerivation, Rule};

/// A graph transformation unit. Rules are referred to by position in
/// control expressions unless they carry a matching name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unit {
    pub name: String,
    pub initial: GraphClass,
    pub rules: Vec<Arc<Rule>>,
    pub control: ControlAutomaton,
    pub terminal: GraphClass,
}

impl Unit {
    /// A missing control condition allows any order: `(1 | … | n)*`.
    pub fn new(
        name: impl Into<String>,
        initial: GraphClass,
        rules: Vec<Arc<Rule>>,
        control: Option<&str>,
        terminal: GraphClass,
    ) -> Result<Unit, ControlError> {
        let names: Vec<String> = rules.iter().map(|r| r.name.clone()).collect();
        let control = match control {
            Some(src) => compile_control(src, &names)?,
            None => ControlAutomaton::any_order(rules.len()),
        };
        Ok(Unit {
            name: name.into(),
            initial,
            rules,
            control,
            terminal,
        })
    }

    /// Position of a rule of this unit; `Arc` identity first, then by value.
    pub fn rule_index(&self, rule: &Arc<Rule>) -> Option<usize> {
        self.rules
            .iter()
            .position(|r| Arc::ptr_eq(r, rule))
            .or_else(|| self.rules.iter().position(|r| **r == **rule))
    }

    /// Default step bound `4·size(G)²`.
    pub fn default_budget(g: &Graph) -> usize {
        4 * g.size() * g.size()
    }

    /// Only the listed rules, keeping the other components.
    pub fn restricted(&self, keep: &[usize], control: Option<&str>) -> Result<Unit, ControlError> {
        Unit::new(
            alloc::format!("{}|{:?}", self.name, keep),
            self.initial.clone(),
            keep.iter().map(|&i| self.rules[i].clone()).collect(),
            control,
            self.terminal.clone(),
        )
    }
}

/// A permitted derivation together with its automaton configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunState {
    pub derivation: Derivation,
    /// Closed under ε; guards are resolved on demand.
    pub config: Config,
}

/// One allowed rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: usize,
    pub matching: Morphism,
}

impl RunState {
    pub fn start(unit: &Unit, g: Arc<Graph>) -> RunState {
        RunState {
            derivation: Derivation::empty(g),
            config: unit.control.initial(),
        }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        self.derivation.last()
    }

    pub fn resolved(&self, unit: &Unit) -> Config {
        unit.control.resolve(&self.config, &unit.rules, self.graph())
    }

    pub fn is_accepting(&self, unit: &Unit) -> bool {
        unit.control.is_accepting(&self.resolved(unit))
    }

    /// Accepting and terminal.
    pub fn is_successful(&self, unit: &Unit) -> bool {
        self.is_accepting(unit) && unit.terminal.contains(self.graph())
    }

    pub fn advance(&self, unit: &Unit, step: &Step) -> Result<RunState, crate::rewrite::ApplyError> {
        let resolved = self.resolved(unit);
        let d = apply(&unit.rules[step.rule], self.graph(), &step.matching)?;
        let mut derivation = self.derivation.clone();
        derivation.push(d).expect("chained");
        Ok(RunState {
            derivation,
            config: unit.control.step(&resolved, step.rule),
        })
    }
}

/// Every rule application permitted by the control at the current graph,
/// in rule order and then match order.
pub fn allowed_steps(unit: &Unit, rs: &RunState) -> Vec<Step> {
    steps_at(unit, &rs.resolved(unit), rs.graph())
}

pub(crate) fn steps_at(unit: &Unit, resolved: &Config, g: &Graph) -> Vec<Step> {
    unit.control
        .enabled(resolved)
        .into_iter()
        .flat_map(|rule| {
            applicable_matches(&unit.rules[rule], g)
                .into_iter()
                .map(move |matching| Step { rule, matching })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("the input graph is not in the initial class of {0}")]
    NotInitial(String),
    #[error("a permitted derivation of length {} stops in a non-successful state", .0.len())]
    DeadEnd(Derivation),
    #[error("no result within {0} steps")]
    Budget(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub result: Arc<Graph>,
    pub derivation: Derivation,
}

/// Applies the first allowed step until none is left. For a functional unit
/// the end is successful and unique up to isomorphism.
pub fn run_functional(unit: &Unit, g: &Arc<Graph>) -> Result<RunResult, RunError> {
    run_with(unit, g, |_| 0)
}

/// Like [`run_functional`], choosing uniformly among allowed steps.
pub fn run_random<R: Rng>(unit: &Unit, g: &Arc<Graph>, rng: &mut R) -> Result<RunResult, RunError> {
    run_with(unit, g, |n| rng.gen_range(0..n))
}

fn run_with(unit: &Unit, g: &Arc<Graph>, mut pick: impl FnMut(usize) -> usize) -> Result<RunResult, RunError> {
    if !unit.initial.contains(g) {
        return Err(RunError::NotInitial(unit.name.to_string()));
    }
    let budget = Unit::default_budget(g).max(1);
    let mut rs = RunState::start(unit, g.clone());
    loop {
        let steps = allowed_steps(unit, &rs);
        if steps.is_empty() {
            break;
        }
        if rs.derivation.len() >= budget {
            return Err(RunError::Budget(budget));
        }
        let step = &steps[pick(steps.len())];
        rs = rs.advance(unit, step).expect("allowed steps apply");
    }
    if !rs.is_successful(unit) {
        return Err(RunError::DeadEnd(rs.derivation));
    }
    Ok(RunResult {
        result: rs.graph().clone(),
        derivation: rs.derivation,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermissionError {
    #[error("step {0} uses a rule outside the unit")]
    ForeignRule(usize),
    #[error("step {0} is not allowed by the control condition")]
    Control(usize),
    #[error("step {0} does not replay: {1}")]
    Replay(usize, crate::rewrite::ApplyError),
    #[error("the derivation ends in a non-accepting control state")]
    NotAccepting,
    #[error("the first graph is not initial")]
    NotInitial,
    #[error("the last graph is not terminal")]
    NotTerminal,
}

/// Checks that `d` follows the stepwise control, guards included.
pub fn check_permitted(unit: &Unit, d: &Derivation) -> Result<Config, PermissionError> {
    let mut config = unit.control.initial();
    for (i, step) in d.steps().iter().enumerate() {
        let r = unit.rule_index(&step.rule).ok_or(PermissionError::ForeignRule(i))?;
        let resolved = unit.control.resolve(&config, &unit.rules, &step.before);
        if !unit.control.enabled(&resolved).contains(&r) {
            return Err(PermissionError::Control(i));
        }
        // steps may be renamed on their result graph
        step.verify().map_err(|e| PermissionError::Replay(i, e))?;
        config = unit.control.step(&resolved, r);
    }
    Ok(unit.control.resolve(&config, &unit.rules, d.last()))
}

/// Replays `d` and checks it is a successful derivation of `unit`.
pub fn check_successful(unit: &Unit, d: &Derivation) -> Result<(), PermissionError> {
    if !unit.initial.contains(d.first()) {
        return Err(PermissionError::NotInitial);
    }
    let resolved = check_permitted(unit, d)?;
    if !unit.control.is_accepting(&resolved) {
        return Err(PermissionError::NotAccepting);
    }
    if !unit.terminal.contains(d.last()) {
        return Err(PermissionError::NotTerminal);
    }
    Ok(())
}

/// Steps of `d` re-expressed as rule positions of `unit`.
pub fn rule_word(unit: &Unit, d: &[DirectDerivation]) -> Option<Vec<usize>> {
    d.iter().map(|s| unit.rule_index(&s.rule)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mark_rule() -> Arc<Rule> {
        let l = Graph::undirected(&[0], &[]);
        let mut r = l.clone();
        r.add_loop(0, "α".into()).unwrap();
        let mut n = l.clone();
        n.add_loop(0, "α".into()).unwrap();
        Arc::new(Rule::by_ids("1", l.clone(), l, r, Some(n), false).unwrap())
    }

    #[test]
    fn maximal_block_then_stop() {
        let unit = Unit::new("mark", GraphClass::All, alloc::vec![mark_rule()], Some("1!"), GraphClass::All).unwrap();
        let g = Arc::new(Graph::undirected(&[0, 1, 2], &[(0, 1)]));
        let rs = RunState::start(&unit, g.clone());
        assert_eq!(allowed_steps(&unit, &rs).len(), 3);
        assert!(!rs.is_accepting(&unit));
        let out = run_functional(&unit, &g).unwrap();
        assert_eq!(out.derivation.len(), 3);
        assert!(check_successful(&unit, &out.derivation).is_ok());
        let cut = out.derivation.slice(0, 2);
        assert_eq!(check_successful(&unit, &cut), Err(PermissionError::NotAccepting));
    }

    #[test]
    fn empty_unit_is_identity() {
        let unit = Unit::new("id", GraphClass::All, alloc::vec![], Some("ε"), GraphClass::All).unwrap();
        let g = Arc::new(Graph::undirected(&[0, 1], &[(0, 1)]));
        let out = run_functional(&unit, &g).unwrap();
        assert!(out.derivation.is_empty());
        assert_eq!(out.result, g);
    }
}
