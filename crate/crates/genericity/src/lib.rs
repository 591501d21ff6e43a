//! Analysis of deterministic finite-state recognizers of normal-form
//! languages, and of the isometric group actions they feed.
//!
//! The crate has three layers:
//!
//! * [`automaton`] and [`counting`] work with an abstract recognizer: a total
//!   deterministic transition table with a start state, an absorbing fail
//!   state and a set of accept states. They decide structural properties
//!   (accessible sub-automaton, recurrence, domination, rigid words) and do
//!   exact arbitrary-precision word counting, growth-rate estimation,
//!   lexicographic enumeration and exactly-uniform sampling.
//! * [`geometry`] is the action layer: an [`geometry::ActionBackend`] maps
//!   letters to isometries of a metric space with a fixed base point, and the
//!   module implements displacement, translation-length estimates,
//!   elliptic/loxodromic classification and the slack-triangle checks used by
//!   the census machinery.
//! * [`psl2z`], [`garside`] and [`freegroup`] are concrete systems: the
//!   normal-form automaton of PSL(2,Z) with its exact Farey-graph metric, the
//!   permutation-braid automaton of the positive braid monoid, and free
//!   groups acting on their Cayley trees.
//!
//! [`experiments`] ties everything together behind a configuration type and
//! produces machine-readable census reports; the `genericity` binary is a
//! thin CLI over it.
//!
//! With the default `parallel` feature the census loops shard work across
//! threads via rayon; building with `--no-default-features` selects the
//! sequential fallback with identical results.

pub mod automaton;
pub mod counting;
pub mod experiments;
pub mod freegroup;
pub mod garside;
pub mod geometry;
mod parallel;
pub mod psl2z;

pub use automaton::{Automaton, Letter, NamedAutomaton, StateId, StructureReport, Word};
