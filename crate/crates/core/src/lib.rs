//! Refactoring of generated-code trees as a sequence of small, audited,
//! reversible passes over immutable snapshots.
//!
//! Every pass maps a [`Snapshot`] to a new one and reports what it touched.
//! A pipeline checks each pass for behavior preservation by comparing
//! macro expansions before and after, records the result in a [`Journal`],
//! and halts on the first failure.

pub mod cli;
pub mod converge;
pub mod depgraph;
pub mod equiv;
pub mod error;
pub mod macrolang;
pub mod passes;
pub mod report;
pub mod rules;
pub mod scope;
pub mod snapshot;
pub mod textops;

pub use depgraph::{build_graph, dead_closure, DependencyGraph, Edge, LivenessReport, Provenance};
pub use equiv::{check_equivalence, EquivalenceVerdict, Normalizer, NormalizerChain, NormalizerKind, VerdictStatus};
pub use error::{Error, Result};
pub use macrolang::{expand, Expansion, Strategy};
pub use report::{EditSite, PassReport};
pub use rules::{RefRule, RuleKind, RuleSpec};
pub use scope::Scope;
pub use snapshot::{diff_snapshots, load_tree, write_tree, DiffResidual, Journal, PassRecord, Snapshot};
