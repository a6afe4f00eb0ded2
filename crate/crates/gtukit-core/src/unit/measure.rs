//! Label-counting measures for termination arguments.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use super::{explore, Unit};
use crate::graph::{Graph, Label};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Measure {
    /// Vertices without a loop of this label.
    VerticesWithoutLoop(Label),
    /// Loops with this label.
    Loops(Label),
    /// Non-loop edges with this label.
    Edges(Label),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("unknown measure {0:?}; expected vertices-without:L, loops:L or edges:L")]
    Unknown(String),
}

impl Measure {
    /// `vertices-without:α`, `loops:*`, `edges:β`.
    pub fn parse(s: &str) -> Result<Measure, MeasureError> {
        let unknown = || MeasureError::Unknown(s.to_string());
        let (kind, label) = s.split_once(':').ok_or_else(unknown)?;
        let label = Label::new(label).map_err(|_| unknown())?;
        match kind {
            "vertices-without" => Ok(Measure::VerticesWithoutLoop(label)),
            "loops" => Ok(Measure::Loops(label)),
            "edges" => Ok(Measure::Edges(label)),
            _ => Err(unknown()),
        }
    }

    pub fn eval(&self, g: &Graph) -> usize {
        match self {
            Measure::VerticesWithoutLoop(l) => g
                .vertices()
                .iter()
                .filter(|&&v| !g.loops_at(v).any(|e| &e.label == l))
                .count(),
            Measure::Loops(l) => g.edges().iter().filter(|e| e.is_loop() && &e.label == l).count(),
            Measure::Edges(l) => g.edges().iter().filter(|e| !e.is_loop() && &e.label == l).count(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::VerticesWithoutLoop(l) => write!(f, "vertices-without:{l}"),
            Measure::Loops(l) => write!(f, "loops:{l}"),
            Measure::Edges(l) => write!(f, "edges:{l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureViolation {
    pub corpus_index: usize,
    pub rule: String,
    pub before: usize,
    pub after: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeasureReport {
    /// Direct derivations inspected.
    pub checked: usize,
    pub violations: Vec<MeasureViolation>,
}

impl MeasureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `f(G) > f(H)` for every direct derivation through one of `rules`
/// (all rules when `None`) reachable by permitted derivations from the
/// corpus graphs.
pub fn verify_decreasing_measure(
    unit: &Unit,
    rules: Option<&[usize]>,
    measure: &Measure,
    corpus: &[Arc<Graph>],
) -> MeasureReport {
    let mut report = MeasureReport::default();
    for (i, g) in corpus.iter().enumerate() {
        if !unit.initial.contains(g) {
            continue;
        }
        for (_, r, d) in explore(unit, g, None).steps {
            if rules.is_some_and(|rs| !rs.contains(&r)) {
                continue;
            }
            report.checked += 1;
            let (before, after) = (measure.eval(&d.before), measure.eval(&d.after));
            if before <= after {
                report.violations.push(MeasureViolation {
                    corpus_index: i,
                    rule: d.rule.name.clone(),
                    before,
                    after,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let mut g = Graph::undirected(&[0, 1], &[(0, 1)]);
        g.add_loop(0, "α".into()).unwrap();
        assert_eq!(Measure::parse("vertices-without:α").unwrap().eval(&g), 1);
        assert_eq!(Measure::parse("loops:α").unwrap().eval(&g), 1);
        assert_eq!(Measure::parse("edges:*").unwrap().eval(&g), 2);
        assert!(Measure::parse("weight:α").is_err());
        assert!(Measure::parse("loops:").is_err());
        let m = Measure::parse("loops:*").unwrap();
        assert_eq!(Measure::parse(&m.to_string()).unwrap(), m);
    }
}
