//! File formats, built-in fixtures, DOT export and corpus sweeps on top of
//! `gtukit-core`.

pub mod cli;
pub mod export;
pub mod fixtures;
pub mod format;
pub mod proofs;
pub mod sweep;
