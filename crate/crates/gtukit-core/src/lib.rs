//! Graph transformation units over directed edge-labeled graphs.
//!
//! The crate is `no_std` and only needs `alloc`. It covers double-pushout
//! rewriting with negative application conditions, units with regular
//! control, decision search, derivation structures and the proof procedure
//! that builds correctness arguments for reductions between units.
//!
//! File formats, fixtures and the command line live in the `gtukit` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ds;
pub mod graph;
pub mod library;
pub mod proof;
pub mod rewrite;
pub mod unit;

pub use graph::{
    canonical_key, complement, disjoint_union, find_isomorphism, find_morphisms,
    find_morphisms_from, is_isomorphic, CanonicalKey, Edge, EdgeId, Graph, GraphError, Label,
    Morphism, VertexId,
};
pub use rewrite::{
    apply, applicable_matches, close_diamond, extend_derivation, move_variant,
    parallel_independent, sequentially_independent, static_rule_set_independence,
    swap_sequential, Derivation, DerivationPair, DirectDerivation, Direction, Nac, Rule, Span,
};
pub use unit::{
    compile_control, decide, run_functional, ControlAutomaton, Decision, GraphClass, RunState,
    Unit,
};
pub use ds::{export_dot, DerivationStructure, Origin};
pub use proof::{backward_prove, forward_prove, preprocess, ProofConfig, ProofRun};
