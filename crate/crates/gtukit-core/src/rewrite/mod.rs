//! Double-pushout rewriting with injective NACs.

mod apply;
mod extension;
mod independence;
mod overlap;
mod rule;

pub use apply::{
    applicable_matches, apply, check_match, is_applicable, same_graph, ApplyError, Derivation,
    DerivationError, DirectDerivation,
};
pub use extension::{
    extend_derivation, move_variant, next_embedding, DerivationPair, Direction, Extended,
    ExtensionError, MoveError, Span, SpanError,
};
pub use independence::{
    close_diamond, items_parallel_independent, items_sequentially_independent,
    parallel_independent, sequentially_independent, swap_sequential, IndependenceError,
};
pub use overlap::{
    overlaps, pair_witnesses, same_effect, static_rule_set_independence,
    static_rule_set_independence_with, ConflictKind, IndependenceReport, OverlapOptions, Witness,
};
pub use rule::{Nac, Rule, RuleError};
