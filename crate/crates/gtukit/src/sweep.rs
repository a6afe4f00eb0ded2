//! Corpus sweeps, parallel per instance.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use gtukit_core::graph::Graph;
use gtukit_core::library::{oracle, ProblemId};
use gtukit_core::proof::{check_instance, ProofConfig};
use gtukit_core::unit::{decide, Unit};

/// Runs `f` over `items` on `jobs` threads (all cores when `None`),
/// keeping the input order.
pub fn par_map<T, R, F>(jobs: Option<usize>, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    let run = || items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(run),
        None => run(),
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct OracleCase {
    pub index: usize,
    pub vertices: usize,
    pub decided: Result<bool, String>,
    pub oracle: Result<bool, String>,
}

impl OracleCase {
    pub fn agrees(&self) -> bool {
        matches!((&self.decided, &self.oracle), (Ok(a), Ok(b)) if a == b)
    }
}

/// Compares `decide` against the brute-force oracle on every instance.
pub fn oracle_sweep(unit: &Unit, id: ProblemId, instances: &[Graph], jobs: Option<usize>) -> Vec<OracleCase> {
    par_map(jobs, instances, |index, g| {
        let ga = Arc::new(g.clone());
        OracleCase {
            index,
            vertices: g.vertex_count(),
            decided: decide(unit, &ga).map(|d| d.value).map_err(|e| e.to_string()),
            oracle: oracle(id, g).map_err(|e| e.to_string()),
        }
    })
}

/// One instance of a reduction sweep.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ReductionCase {
    pub index: usize,
    pub vertices: usize,
    pub source: Result<bool, String>,
    pub target: Result<bool, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forward: Option<Result<(), String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backward: Option<Result<(), String>>,
    pub preprocessed: bool,
    pub passed: bool,
}

/// Decision agreement and, for yes-instances, both proof passes.
pub fn reduction_sweep(cfg: &ProofConfig, instances: &[Graph], jobs: Option<usize>) -> Vec<ReductionCase> {
    par_map(jobs, instances, |index, g| {
        let c = check_instance(cfg, &Arc::new(g.clone()));
        ReductionCase {
            index,
            vertices: g.vertex_count(),
            passed: c.passed(),
            source: c.source,
            target: c.target,
            forward: c.forward,
            backward: c.backward,
            preprocessed: c.preprocessed,
        }
    })
}
