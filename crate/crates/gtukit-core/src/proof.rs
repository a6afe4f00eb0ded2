//! The proof procedure for reductions between units.
//!
//! Forward: the successful source derivation is moved along the reduction
//! run, then rebuilt step by step as a target derivation using spans and
//! functional sections. Backward works the other way round, with
//! interchange in place of conflux. Every constructed derivation is checked
//! again against the unit it claims to belong to.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ds::{ds_from, pair_embeddings, template_embeddings, ArcId, DerivationStructure, DsError, NodeId};
use crate::graph::{find_isomorphism, Graph, Morphism};
use crate::rewrite::{extend_derivation, parallel_independent, Derivation, DerivationPair, Span};
use crate::unit::{check_permitted, check_successful, decide, run_functional, PermissionError, RunState, Unit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Source,
    Target,
}

/// A functional sub-unit of `owner`, sprouted when the owner's control
/// enables `trigger` (a rule position of the owner).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub owner: Side,
    pub funct: Unit,
    pub trigger: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofConfig {
    pub source: Unit,
    pub target: Unit,
    pub red: Unit,
    /// Rule positions of `red` applied first; the others come after.
    pub first_part: Vec<usize>,
    /// Left legs apply source rules, right legs target rules.
    pub spans: Vec<Span>,
    pub pairs: Vec<DerivationPair>,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("invalid proof configuration: {0}")]
    Config(String),
    #[error("the witness is not a successful derivation from the instance: {0}")]
    Witness(String),
    #[error("the reduction does not run on the instance: {0}")]
    Reduction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofFailure {
    #[error("stuck at ({phase}): {reason}")]
    Stuck { phase: &'static str, reason: String },
    #[error("the constructed derivation does not end in a terminal graph")]
    NotTerminal,
    #[error("the witness must be rearranged first; preprocessing applies")]
    PreprocessingRequired,
}

/// One toolbox operation as applied to the structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operation {
    Conflux { a: ArcId, b: ArcId },
    Interchange { a: ArcId, b: ArcId },
    Sprout { section: usize, node: NodeId },
    Couple { span: usize, reversed: bool, anchor: ArcId, embedding: Morphism },
    Associate { pair: usize, path: Vec<ArcId>, embedding: Morphism },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTrace {
    pub initial: DerivationStructure,
    pub ds: DerivationStructure,
    /// The guide as it stood when the build phase ended.
    pub guide: Vec<ArcId>,
    pub active_spot: NodeId,
    pub log: Vec<Operation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofRun {
    /// The derivation built on the other side, checked or not.
    pub constructed: Derivation,
    pub trace: ProofTrace,
    pub verdict: Result<(), ProofFailure>,
    /// Set when the witness was rearranged before the backward pass.
    pub preprocessed: Option<Derivation>,
}

impl ProofRun {
    pub fn ok(&self) -> bool {
        self.verdict.is_ok()
    }
}

impl ProofConfig {
    pub fn unit(&self, side: Side) -> &Unit {
        match side {
            Side::Source => &self.source,
            Side::Target => &self.target,
        }
    }

    pub fn validate(&self) -> Result<(), ProofError> {
        let bad = |m: String| Err(ProofError::Config(m));
        if let Some(i) = self.first_part.iter().find(|&&i| i >= self.red.rules.len()) {
            return bad(format!("reduction rule {} does not exist", i + 1));
        }
        for (i, s) in self.spans.iter().enumerate() {
            if self.source.rule_index(&s.left.rule).is_none() {
                return bad(format!("span {i}: left rule {} is not a source rule", s.left.rule.name));
            }
            if self.target.rule_index(&s.right.rule).is_none() {
                return bad(format!("span {i}: right rule {} is not a target rule", s.right.rule.name));
            }
            if !s.is_identity() && !parallel_independent(&s.left, &s.right).unwrap_or(false) {
                return bad(format!("span {i}: the legs are not parallel independent"));
            }
        }
        for (i, s) in self.sections.iter().enumerate() {
            let owner = self.unit(s.owner);
            if s.trigger >= owner.rules.len() {
                return bad(format!("section {i}: trigger rule {} does not exist", s.trigger + 1));
            }
            if s.funct.rules.iter().any(|r| owner.rule_index(r).is_none()) {
                return bad(format!("section {i}: rules outside the owning unit"));
            }
        }
        Ok(())
    }

    fn split_reduction(&self, r: &Derivation) -> Result<(usize, usize), ProofError> {
        let in_first = |i: usize| -> Result<bool, ProofError> {
            let k = self
                .red
                .rule_index(&r.steps()[i].rule)
                .ok_or_else(|| ProofError::Reduction("foreign rule".into()))?;
            Ok(self.first_part.contains(&k))
        };
        let mut cut = 0;
        while cut < r.len() && in_first(cut)? {
            cut += 1;
        }
        for i in cut..r.len() {
            if in_first(i)? {
                return Err(ProofError::Reduction(format!(
                    "step {} uses a first-part rule after the second part started",
                    i + 1
                )));
            }
        }
        Ok((cut, r.len()))
    }
}

/// Moves `mover` (starting where `along` starts) to the end of `along`.
/// Returns the moved `mover` and `along` moved to the end of `mover`.
fn grid_conflux(
    ds: &mut DerivationStructure,
    log: &mut Vec<Operation>,
    along: &[ArcId],
    mover: &[ArcId],
) -> Result<(Vec<ArcId>, Vec<ArcId>), DsError> {
    let mut cur = mover.to_vec();
    let mut along_moved = Vec::with_capacity(along.len());
    for &a in along {
        let mut a_cur = a;
        let mut next = Vec::with_capacity(cur.len());
        for &m in &cur {
            let [m2, a2] = ds.apply_conflux(a_cur, m)?;
            log.push(Operation::Conflux { a: a_cur, b: m });
            next.push(m2);
            a_cur = a2;
        }
        along_moved.push(a_cur);
        cur = next;
    }
    Ok((cur, along_moved))
}

/// Moves `mover` (starting where `prefix` ends) back to the start of
/// `prefix`. Returns the moved `mover` and `prefix` moved behind it.
fn grid_interchange(
    ds: &mut DerivationStructure,
    log: &mut Vec<Operation>,
    prefix: &[ArcId],
    mover: &[ArcId],
) -> Result<(Vec<ArcId>, Vec<ArcId>), DsError> {
    let mut cur = mover.to_vec();
    let mut behind = Vec::with_capacity(prefix.len());
    for &p in prefix.iter().rev() {
        let mut p_cur = p;
        let mut next = Vec::with_capacity(cur.len());
        for &m in &cur {
            let [m2, p2] = ds.apply_interchange(p_cur, m)?;
            log.push(Operation::Interchange { a: p_cur, b: m });
            next.push(m2);
            p_cur = p2;
        }
        behind.push(p_cur);
        cur = next;
    }
    behind.reverse();
    Ok((cur, behind))
}

fn path_of(ds: &DerivationStructure, start: NodeId, arcs: &[ArcId]) -> Derivation {
    ds.path(start, arcs).expect("arcs built by the engine chain")
}

/// Re-expresses `d` as a derivation starting at the value `onto`, which
/// must be isomorphic to `d.first()`.
pub fn transport_derivation(d: &Derivation, onto: &Arc<Graph>) -> Option<Derivation> {
    let iso = find_isomorphism(d.first(), onto, &Morphism::new())?;
    extend_derivation(d, onto, &iso).ok().map(|x| x.derivation)
}

struct Phases {
    setup: &'static str,
    sprout: &'static str,
    couple: &'static str,
    finish: &'static str,
    check: &'static str,
}

const FORWARD: Phases = Phases {
    setup: "f1",
    sprout: "f21",
    couple: "f22",
    finish: "f3",
    check: "f4",
};
const BACKWARD: Phases = Phases {
    setup: "b1",
    sprout: "b21",
    couple: "b22",
    finish: "b3",
    check: "b4",
};

fn stuck(phase: &'static str, reason: impl ToString) -> ProofFailure {
    ProofFailure::Stuck {
        phase,
        reason: reason.to_string(),
    }
}

/// Engine state during one pass.
struct Pass<'a> {
    cfg: &'a ProofConfig,
    /// The side on which the derivation is constructed.
    side: Side,
    phases: &'a Phases,
    ds: DerivationStructure,
    log: Vec<Operation>,
    sprouted: BTreeSet<(usize, NodeId)>,
}

impl<'a> Pass<'a> {
    fn unit(&self) -> &'a Unit {
        self.cfg.unit(self.side)
    }

    /// Spans oriented from the guide's side to the constructed side.
    fn spans(&self) -> Vec<(usize, Span)> {
        let reversed = self.side == Side::Source;
        self.cfg
            .spans
            .iter()
            .enumerate()
            .map(|(i, s)| (i, if reversed { s.reversed() } else { s.clone() }))
            .collect()
    }

    fn push_step(&self, rs: &mut RunState, arc: ArcId) -> Result<(), String> {
        let unit = self.unit();
        let step = &self.ds.arcs()[arc].step;
        let r = unit.rule_index(&step.rule).ok_or("foreign rule")?;
        let resolved = rs.resolved(unit);
        if !unit.control.enabled(&resolved).contains(&r) {
            return Err(format!("rule {} is not allowed here", step.rule.name));
        }
        rs.derivation.push(step.clone()).map_err(|e| e.to_string())?;
        rs.config = unit.control.step(&resolved, r);
        Ok(())
    }

    fn sprout_at(&mut self, section: usize, node: NodeId) -> Result<(Vec<ArcId>, NodeId), DsError> {
        self.sprouted.insert((section, node));
        let out = self.ds.apply_sprout(&self.cfg.sections[section].funct, node)?;
        self.log.push(Operation::Sprout { section, node });
        Ok(out)
    }

    /// The first section of this side that is due at the state.
    fn due_section(&self, rs: &RunState, node: NodeId, need_applicable: bool) -> Option<usize> {
        let unit = self.unit();
        let enabled = unit.control.enabled(&rs.resolved(unit));
        self.cfg.sections.iter().enumerate().position(|(i, s)| {
            s.owner == self.side
                && !self.sprouted.contains(&(i, node))
                && enabled.contains(&s.trigger)
                && (!need_applicable || crate::rewrite::is_applicable(&unit.rules[s.trigger], rs.graph()))
        })
    }

    /// Builds the constructed derivation from `spot` along `guide`.
    fn build(&mut self, spot: NodeId, mut guide: Vec<ArcId>) -> Result<(Vec<ArcId>, Vec<ArcId>, NodeId), ProofFailure> {
        let mut spot = spot;
        let mut rs = RunState::start(self.unit(), self.ds.nodes()[spot].clone());
        let mut used = alloc::vec![false; guide.len()];
        let mut built = Vec::new();
        let spans = self.spans();
        loop {
            if used.iter().all(|&u| u) {
                break;
            }
            if let Some(section) = self.due_section(&rs, spot, true) {
                let (arcs, end) = self.sprout_at(section, spot).map_err(|e| stuck(self.phases.sprout, e))?;
                for &a in &arcs {
                    self.push_step(&mut rs, a).map_err(|e| stuck(self.phases.sprout, e))?;
                }
                let (moved, _) = grid_conflux(&mut self.ds, &mut self.log, &arcs, &guide)
                    .map_err(|e| stuck(self.phases.sprout, e))?;
                guide = moved;
                built.extend(arcs);
                spot = end;
                continue;
            }
            match self.couple_next(&spans, &rs, &guide, &used) {
                Some((pos, x0, new_guide, new_used)) => {
                    let _ = pos;
                    self.push_step(&mut rs, x0).map_err(|e| stuck(self.phases.couple, e))?;
                    guide = new_guide;
                    used = new_used;
                    built.push(x0);
                    spot = self.ds.arcs()[x0].to;
                }
                None => break,
            }
        }
        // guide steps that a span should have taken over
        for (pos, &a) in guide.iter().enumerate() {
            let rule = &self.ds.arcs()[a].step.rule;
            if !used[pos] && spans.iter().any(|(_, s)| *s.left.rule == **rule) {
                return Err(stuck(
                    self.phases.couple,
                    format!("no span takes over guide step {} (rule {})", pos + 1, rule.name),
                ));
            }
        }
        Ok((built, guide, spot))
    }

    /// Couples at the first guide position where a span applies and moves
    /// the result back to the active spot.
    #[allow(clippy::type_complexity)]
    fn couple_next(
        &mut self,
        spans: &[(usize, Span)],
        rs: &RunState,
        guide: &[ArcId],
        used: &[bool],
    ) -> Option<(usize, ArcId, Vec<ArcId>, Vec<bool>)> {
        let unit = self.unit();
        let enabled = unit.control.enabled(&rs.resolved(unit));
        for pos in (0..guide.len()).filter(|&p| !used[p]) {
            let anchor = guide[pos];
            for (si, span) in spans {
                let step = self.ds.arcs()[anchor].step.clone();
                if *span.left.rule != *step.rule {
                    continue;
                }
                match unit.rule_index(&span.right.rule) {
                    Some(r) if enabled.contains(&r) => {}
                    _ => continue,
                }
                for e in template_embeddings(&span.left, &step) {
                    let saved = (self.ds.clone(), self.log.len());
                    match self.try_couple(*si, span, guide, used, pos, &e) {
                        Ok(found) => return Some(found),
                        Err(_) => {
                            self.ds = saved.0;
                            self.log.truncate(saved.1);
                        }
                    }
                }
            }
        }
        None
    }

    #[allow(clippy::type_complexity)]
    fn try_couple(
        &mut self,
        si: usize,
        span: &Span,
        guide: &[ArcId],
        used: &[bool],
        pos: usize,
        e: &Morphism,
    ) -> Result<(usize, ArcId, Vec<ArcId>, Vec<bool>), DsError> {
        let anchor = guide[pos];
        let x = self.ds.apply_couple(span, anchor, e)?;
        self.log.push(Operation::Couple {
            span: si,
            reversed: self.side == Side::Source,
            anchor,
            embedding: e.clone(),
        });
        let (x0, prefix) = grid_interchange(&mut self.ds, &mut self.log, &guide[..pos], &[x])?;
        let x0 = x0[0];
        let (suffix, suffix_used) = if span.is_identity() {
            // the coupled step replaces its anchor
            if self.ds.arcs()[x].to != self.ds.arcs()[anchor].to {
                return Err(DsError::NotExtension);
            }
            (guide[pos + 1..].to_vec(), used[pos + 1..].to_vec())
        } else {
            let (moved, _) = grid_conflux(&mut self.ds, &mut self.log, &[x], &guide[pos..])?;
            let mut u = used[pos..].to_vec();
            u[0] = true;
            (moved, u)
        };
        let mut new_guide = prefix;
        new_guide.extend(suffix);
        let mut new_used = used[..pos].to_vec();
        new_used.extend(suffix_used);
        Ok((pos, x0, new_guide, new_used))
    }

    /// Sprouts due sections at the end, then checks the result.
    fn conclude(&mut self, start: NodeId, mut built: Vec<ArcId>) -> (Derivation, Result<(), ProofFailure>) {
        loop {
            let d = path_of(&self.ds, start, &built);
            let config = match check_permitted(self.unit(), &d) {
                Ok(c) => c,
                Err(e) => return (d, Err(stuck(self.phases.check, e))),
            };
            let end = self.ds.node_of(d.last()).expect("present");
            let rs = RunState {
                derivation: d,
                config,
            };
            let Some(section) = self.due_section(&rs, end, false) else {
                break;
            };
            match self.sprout_at(section, end) {
                Ok((arcs, _)) => built.extend(arcs),
                Err(e) => return (rs.derivation, Err(stuck(self.phases.check, e))),
            }
        }
        let d = path_of(&self.ds, start, &built);
        let verdict = match check_successful(self.unit(), &d) {
            Ok(()) => Ok(()),
            Err(PermissionError::NotTerminal) => Err(ProofFailure::NotTerminal),
            Err(e) => Err(stuck(self.phases.check, e)),
        };
        (d, verdict)
    }
}

fn check_witness(unit: &Unit, w: &Derivation, start: &Graph) -> Result<(), ProofError> {
    if **w.first() != *start {
        return Err(ProofError::Witness("it does not start at the expected graph".into()));
    }
    check_successful(unit, w).map_err(|e| ProofError::Witness(e.to_string()))
}

fn reduce(cfg: &ProofConfig, g: &Arc<Graph>) -> Result<Derivation, ProofError> {
    run_functional(&cfg.red, g)
        .map(|r| r.derivation)
        .map_err(|e| ProofError::Reduction(e.to_string()))
}

/// Runs the forward procedure on a successful source derivation from `g`.
pub fn forward_prove(cfg: &ProofConfig, g: &Arc<Graph>, witness: &Derivation) -> Result<ProofRun, ProofError> {
    cfg.validate()?;
    check_witness(&cfg.source, witness, g)?;
    let r = reduce(cfg, g)?;
    let (cut, _) = cfg.split_reduction(&r)?;
    let initial = ds_from(&[witness.clone(), r.clone()]);
    let mut pass = Pass {
        cfg,
        side: Side::Target,
        phases: &FORWARD,
        ds: initial.clone(),
        log: Vec::new(),
        sprouted: BTreeSet::new(),
    };
    let w_arcs = pass.ds.find_derivation(witness).expect("given");
    let r_arcs = pass.ds.find_derivation(&r).expect("given");
    let g_node = pass.ds.node_of(g).expect("given");
    let finish = |pass: Pass, guide, spot, constructed, verdict| ProofRun {
        constructed,
        trace: ProofTrace {
            initial: initial.clone(),
            ds: pass.ds,
            guide,
            active_spot: spot,
            log: pass.log,
        },
        verdict,
        preprocessed: None,
    };

    // (f1) move the witness along the first part
    let (r1, r2) = r_arcs.split_at(cut);
    let guide = match grid_conflux(&mut pass.ds, &mut pass.log, r1, &w_arcs) {
        Ok((moved, _)) => moved,
        Err(e) => {
            let v = Err(stuck(FORWARD.setup, e));
            return Ok(finish(pass, w_arcs, g_node, Derivation::empty(g.clone()), v));
        }
    };
    let bar = r1.last().map_or(g_node, |&a| pass.ds.arcs()[a].to);

    // (f2) build the target derivation at the active spot
    let (built, guide, spot) = match pass.build(bar, guide.clone()) {
        Ok(x) => x,
        Err(f) => {
            let empty = Derivation::empty(pass.ds.nodes()[bar].clone());
            return Ok(finish(pass, guide, bar, empty, Err(f)));
        }
    };

    // (f3) move the constructed derivation along the second part
    let (moved, _) = match grid_conflux(&mut pass.ds, &mut pass.log, r2, &built) {
        Ok(x) => x,
        Err(e) => {
            let d = path_of(&pass.ds, bar, &built);
            return Ok(finish(pass, guide, spot, d, Err(stuck(FORWARD.finish, e))));
        }
    };
    let end_r = pass.ds.node_of(r.last()).expect("given");

    // (f4)
    let (d, verdict) = pass.conclude(end_r, moved);
    Ok(finish(pass, guide, spot, d, verdict))
}

/// Runs the backward procedure on a successful target derivation from the
/// reduction's result for `g`. The witness must start at that exact value;
/// see [`transport_derivation`].
pub fn backward_prove(cfg: &ProofConfig, g: &Arc<Graph>, witness: &Derivation) -> Result<ProofRun, ProofError> {
    let mut run = backward_from(cfg, g, witness, None)?;
    if run.verdict.is_err() {
        let pre = preprocess(cfg, g, witness)?;
        if pre.derivation != *witness {
            run.verdict = Err(ProofFailure::PreprocessingRequired);
        }
    }
    Ok(run)
}

/// Rearranges the witness when needed, then runs the backward procedure on
/// the result. The trace covers both.
pub fn backward_prove_preprocessed(
    cfg: &ProofConfig,
    g: &Arc<Graph>,
    witness: &Derivation,
) -> Result<ProofRun, ProofError> {
    let pre = preprocess(cfg, g, witness)?;
    let changed = pre.derivation != *witness;
    let mut run = backward_from(cfg, g, &pre.derivation, Some(pre.clone()))?;
    if changed {
        run.preprocessed = Some(pre.derivation);
    }
    Ok(run)
}

fn backward_from(
    cfg: &ProofConfig,
    g: &Arc<Graph>,
    witness: &Derivation,
    pre: Option<Preprocessed>,
) -> Result<ProofRun, ProofError> {
    cfg.validate()?;
    let r = reduce(cfg, g)?;
    check_witness(&cfg.target, witness, r.last())?;
    let (cut, _) = cfg.split_reduction(&r)?;
    let (initial, ds, log) = match pre {
        Some(p) => (p.initial, p.ds, p.log),
        None => {
            let ds = ds_from(&[r.clone(), witness.clone()]);
            (ds.clone(), ds, Vec::new())
        }
    };
    let mut pass = Pass {
        cfg,
        side: Side::Source,
        phases: &BACKWARD,
        ds,
        log,
        sprouted: BTreeSet::new(),
    };
    let w_arcs = pass.ds.find_derivation(witness).expect("given");
    let r_arcs = pass.ds.find_derivation(&r).expect("given");
    let g_node = pass.ds.node_of(g).expect("given");
    let finish = |pass: Pass, guide, spot, constructed, verdict| ProofRun {
        constructed,
        trace: ProofTrace {
            initial: initial.clone(),
            ds: pass.ds,
            guide,
            active_spot: spot,
            log: pass.log,
        },
        verdict,
        preprocessed: None,
    };
    let (r1, r2) = r_arcs.split_at(cut);
    let bar = r1.last().map_or(g_node, |&a| pass.ds.arcs()[a].to);

    // (b1) move the witness back over the second part
    let guide = match grid_interchange(&mut pass.ds, &mut pass.log, r2, &w_arcs) {
        Ok((moved, _)) => moved,
        Err(e) => {
            let v = Err(stuck(BACKWARD.setup, e));
            return Ok(finish(pass, w_arcs, g_node, Derivation::empty(g.clone()), v));
        }
    };

    // (b2) spans used conversely
    let (built, guide, spot) = match pass.build(bar, guide.clone()) {
        Ok(x) => x,
        Err(f) => {
            let empty = Derivation::empty(pass.ds.nodes()[bar].clone());
            return Ok(finish(pass, guide, bar, empty, Err(f)));
        }
    };

    // (b3) move the constructed derivation back to the instance
    let (moved, _) = match grid_interchange(&mut pass.ds, &mut pass.log, r1, &built) {
        Ok(x) => x,
        Err(e) => {
            let d = path_of(&pass.ds, bar, &built);
            return Ok(finish(pass, guide, spot, d, Err(stuck(BACKWARD.finish, e))));
        }
    };

    // (b4)
    let (d, verdict) = pass.conclude(g_node, moved);
    Ok(finish(pass, guide, spot, d, verdict))
}

/// A rearranged witness with the operations that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preprocessed {
    pub derivation: Derivation,
    pub initial: DerivationStructure,
    pub ds: DerivationStructure,
    pub log: Vec<Operation>,
}

/// Rearranges a target witness by interchanges and associations: whenever
/// the steps of a pair's first derivation can be brought together, they are
/// replaced by the extension of its second derivation. Returns the witness
/// unchanged when no pair applies.
pub fn preprocess(cfg: &ProofConfig, g: &Arc<Graph>, witness: &Derivation) -> Result<Preprocessed, ProofError> {
    let r = reduce(cfg, g)?;
    check_witness(&cfg.target, witness, r.last())?;
    let initial = ds_from(&[r, witness.clone()]);
    let mut ds = initial.clone();
    let mut log = Vec::new();
    let mut path = ds.find_derivation(witness).expect("given");
    let start = ds.node_of(witness.first()).expect("given");
    let guard = 4 * (path.len() + 1) * (path.len() + 1);
    for _ in 0..guard {
        match find_window(cfg, &mut ds, &mut log, &path) {
            Some(next) => path = next,
            None => break,
        }
    }
    let derivation = path_of(&ds, start, &path);
    check_successful(&cfg.target, &derivation)
        .map_err(|e| ProofError::Witness(format!("rearranged witness fails: {e}")))?;
    Ok(Preprocessed {
        derivation,
        initial,
        ds,
        log,
    })
}

fn find_window(
    cfg: &ProofConfig,
    ds: &mut DerivationStructure,
    log: &mut Vec<Operation>,
    path: &[ArcId],
) -> Option<Vec<ArcId>> {
    for (pi, pair) in cfg.pairs.iter().enumerate() {
        let Some(head) = pair.first.steps().first() else {
            continue;
        };
        for s in 0..path.len() {
            if *ds.arcs()[path[s]].step.rule != *head.rule {
                continue;
            }
            let saved = (ds.clone(), log.len());
            if let Some(p) = gather(ds, log, path.to_vec(), s, 1, pi, pair) {
                return Some(p);
            }
            *ds = saved.0;
            log.truncate(saved.1);
        }
    }
    None
}

/// Brings a step for position `j` of the pair next to the window starting
/// at `s`, trying every candidate in order, then associates.
fn gather(
    ds: &mut DerivationStructure,
    log: &mut Vec<Operation>,
    path: Vec<ArcId>,
    s: usize,
    j: usize,
    pi: usize,
    pair: &DerivationPair,
) -> Option<Vec<ArcId>> {
    let k = pair.first.len();
    if j == k {
        let window = &path[s..s + k];
        for e in pair_embeddings(ds, pair, window) {
            let saved = (ds.clone(), log.len());
            match ds.apply_associate(pair, window, &e) {
                Ok(added) if added != window => {
                    log.push(Operation::Associate {
                        pair: pi,
                        path: window.to_vec(),
                        embedding: e,
                    });
                    let mut out = path[..s].to_vec();
                    out.extend(added);
                    out.extend_from_slice(&path[s + k..]);
                    return Some(out);
                }
                _ => {
                    *ds = saved.0;
                    log.truncate(saved.1);
                }
            }
        }
        return None;
    }
    let want = &pair.first.steps()[j].rule;
    for c in s + j..path.len() {
        if *ds.arcs()[path[c]].step.rule != **want {
            continue;
        }
        let saved = (ds.clone(), log.len());
        let mut p = path.clone();
        let mut ok = true;
        for t in (s + j..c).rev() {
            match ds.apply_interchange(p[t], p[t + 1]) {
                Ok([x, y]) => {
                    log.push(Operation::Interchange { a: p[t], b: p[t + 1] });
                    p[t] = x;
                    p[t + 1] = y;
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if let Some(out) = gather(ds, log, p, s, j + 1, pi, pair) {
                return Some(out);
            }
        }
        *ds = saved.0;
        log.truncate(saved.1);
    }
    None
}

/// Applies the logged operations to `initial` in order.
pub fn replay_log(cfg: &ProofConfig, initial: &DerivationStructure, log: &[Operation]) -> Result<DerivationStructure, DsError> {
    let mut ds = initial.clone();
    for op in log {
        match op {
            Operation::Conflux { a, b } => {
                ds.apply_conflux(*a, *b)?;
            }
            Operation::Interchange { a, b } => {
                ds.apply_interchange(*a, *b)?;
            }
            Operation::Sprout { section, node } => {
                let s = cfg.sections.get(*section).ok_or(DsError::UnknownNode(*node))?;
                ds.apply_sprout(&s.funct, *node)?;
            }
            Operation::Couple {
                span,
                reversed,
                anchor,
                embedding,
            } => {
                let s = cfg.spans.get(*span).ok_or(DsError::UnknownArc(*anchor))?;
                let s = if *reversed { s.reversed() } else { s.clone() };
                ds.apply_couple(&s, *anchor, embedding)?;
            }
            Operation::Associate { pair, path, embedding } => {
                let p = cfg.pairs.get(*pair).ok_or(DsError::BadPath)?;
                ds.apply_associate(p, path, embedding)?;
            }
        }
    }
    Ok(ds)
}

/// Outcome for one corpus instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceCheck {
    pub source: Result<bool, String>,
    pub target: Result<bool, String>,
    /// Present when both sides hold.
    pub forward: Option<Result<(), String>>,
    pub backward: Option<Result<(), String>>,
    /// The backward pass needed a rearranged witness.
    pub preprocessed: bool,
}

impl InstanceCheck {
    pub fn passed(&self) -> bool {
        let proof_ok = |p: &Option<Result<(), String>>| p.as_ref().is_none_or(|r| r.is_ok());
        matches!((&self.source, &self.target), (Ok(a), Ok(b)) if a == b)
            && proof_ok(&self.forward)
            && proof_ok(&self.backward)
    }
}

/// Compares the decisions on `g` and on its reduction result and, when both
/// hold, runs both proof passes on the witnesses found.
pub fn check_instance(cfg: &ProofConfig, g: &Arc<Graph>) -> InstanceCheck {
    let mut out = InstanceCheck {
        source: Err(String::new()),
        target: Err(String::new()),
        forward: None,
        backward: None,
        preprocessed: false,
    };
    let src = decide(&cfg.source, g);
    out.source = src.as_ref().map(|d| d.value).map_err(|e| e.to_string());
    let red = match run_functional(&cfg.red, g) {
        Ok(r) => r,
        Err(e) => {
            out.target = Err(format!("reduction: {e}"));
            return out;
        }
    };
    let tgt = decide(&cfg.target, &red.result);
    out.target = tgt.as_ref().map(|d| d.value).map_err(|e| e.to_string());
    if let (Ok(s), Ok(t)) = (&src, &tgt) {
        if let (Some(ws), Some(wt)) = (&s.witness, &t.witness) {
            out.forward = Some(match forward_prove(cfg, g, ws) {
                Ok(run) => run.verdict.map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            });
            out.backward = Some(match backward_prove(cfg, g, wt) {
                Ok(run) if run.ok() => Ok(()),
                Ok(run) if run.verdict == Err(ProofFailure::PreprocessingRequired) => {
                    out.preprocessed = true;
                    match backward_prove_preprocessed(cfg, g, wt) {
                        Ok(run) => run.verdict.map_err(|e| e.to_string()),
                        Err(e) => Err(e.to_string()),
                    }
                }
                Ok(run) => run.verdict.map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            });
        }
    }
    out
}

pub fn check_reduction_on_corpus(cfg: &ProofConfig, corpus: &[Arc<Graph>]) -> Vec<InstanceCheck> {
    corpus.iter().map(|g| check_instance(cfg, g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Label;
    use crate::rewrite::{applicable_matches, apply, Rule};
    use crate::unit::GraphClass;

    // source marks vertices with a, target with b; the reduction is empty
    fn marking(name: &str, label: &str) -> Unit {
        let l = Graph::undirected(&[0], &[]);
        let mut n = l.clone();
        n.add_loop(0, Label::new(label).unwrap()).unwrap();
        let rule = Rule::by_ids("1", l.clone(), l, n.clone(), Some(n.clone()), false).unwrap();
        Unit::new(name, GraphClass::Unlabeled, alloc::vec![Arc::new(rule)], Some("1!"), GraphClass::All).unwrap()
    }

    fn config() -> ProofConfig {
        let source = marking("a-marks", "a");
        let target = marking("b-marks", "b");
        let red = Unit::new("id", GraphClass::All, Vec::new(), Some("ε"), GraphClass::All).unwrap();
        let s = Arc::new(Graph::undirected(&[0], &[]));
        let m = applicable_matches(&source.rules[0], &s).remove(0);
        let left = apply(&source.rules[0], &s, &m).unwrap();
        let right = apply(&target.rules[0], &s, &m).unwrap();
        ProofConfig {
            spans: alloc::vec![Span::new(left, right).unwrap()],
            source,
            target,
            red,
            first_part: Vec::new(),
            pairs: Vec::new(),
            sections: Vec::new(),
        }
    }

    #[test]
    fn both_directions_on_a_small_graph() {
        let cfg = config();
        let g = Arc::new(Graph::undirected(&[1, 2, 3], &[(1, 2)]));
        let w = run_functional(&cfg.source, &g).unwrap().derivation;
        let run = forward_prove(&cfg, &g, &w).unwrap();
        assert_eq!(run.verdict, Ok(()));
        assert_eq!(run.constructed.len(), 3);
        check_successful(&cfg.target, &run.constructed).unwrap();
        assert_eq!(replay_log(&cfg, &run.trace.initial, &run.trace.log).unwrap(), run.trace.ds);

        let w2 = run_functional(&cfg.target, &g).unwrap().derivation;
        let back = backward_prove(&cfg, &g, &w2).unwrap();
        assert_eq!(back.verdict, Ok(()));
        check_successful(&cfg.source, &back.constructed).unwrap();
    }

    #[test]
    fn missing_span_gets_stuck() {
        let mut cfg = config();
        let g = Arc::new(Graph::undirected(&[1], &[]));
        let w = run_functional(&cfg.source, &g).unwrap().derivation;
        let span = cfg.spans.pop().unwrap();
        // nothing takes over the guide, so the target run never starts
        let run = forward_prove(&cfg, &g, &w).unwrap();
        assert!(matches!(run.verdict, Err(ProofFailure::Stuck { phase: "f4", .. })));
        cfg.spans.push(span);
        assert!(forward_prove(&cfg, &g, &w).unwrap().ok());
    }

    #[test]
    fn witness_is_checked() {
        let cfg = config();
        let g = Arc::new(Graph::undirected(&[1], &[]));
        let other = Arc::new(Graph::undirected(&[2], &[]));
        let w = run_functional(&cfg.source, &other).unwrap().derivation;
        assert!(matches!(forward_prove(&cfg, &g, &w), Err(ProofError::Witness(_))));
        let moved = transport_derivation(&w, &g).unwrap();
        assert!(forward_prove(&cfg, &g, &moved).unwrap().ok());
    }

    #[test]
    fn empty_witness_transfers_directly() {
        let cfg = config();
        let g = Arc::new(Graph::new());
        let w = Derivation::empty(g.clone());
        let back = backward_prove(&cfg, &g, &w).unwrap();
        assert!(back.ok());
        assert!(back.constructed.is_empty());
    }
}
