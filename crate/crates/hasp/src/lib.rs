//! A hybrid answer set programming engine.
//!
//! Hybrid ASP extends answer set programming with rules that interact with
//! outside sources: *advancing* rules call an external algorithm to produce
//! successor time positions, and *stationary* rules derive literals at a
//! position under an external boolean guard. This crate implements the full
//! stable-model semantics for such programs over discrete time, the
//! splitting-set and splitting-sequence decompositions, and a time-layered
//! incremental solver, together with a brute-force oracle used to check all
//! of them against each other on small instances.
//!
//! The pieces:
//!
//! * [`model`] — atoms, literals, blocks, generalized positions, facts,
//!   interpretations, initial conditions;
//! * [`registry`] — the named advancing/boolean algorithms and constraint
//!   sets rules refer to;
//! * [`rules`] — rules and programs over those references, or over
//!   materialized tuple sets;
//! * [`semantics`] — satisfaction, the reduct, the one-step provability
//!   operator, and the answer-set test;
//! * [`asp`] — classical ground ASP (used per position by the incremental
//!   solver and as a regression baseline);
//! * [`oracle`] — exhaustive answer-set enumeration over a finite reachable
//!   universe;
//! * [`splitting`] — splitting sets, bottoms, remainders, partial
//!   evaluation, and the two decomposition checks;
//! * [`incremental`] — the layer-by-layer solver with pluggable advancing
//!   and stationary selectors, plus exhaustive selector enumeration;
//! * [`frontend`] — the textual rule language, initial-condition files, and
//!   canonical serializers;
//! * [`corpus`] — deterministic random instance generation for differential
//!   testing and benchmarks.

pub mod asp;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod frontend;
pub mod incremental;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod registry;
pub mod rules;
pub mod semantics;
pub mod splitting;

pub use error::EngineError;
pub use model::{
    Atom, Block, Fact, GeneralizedPosition, InitialCondition, Interpretation, Literal, ParamValue,
};
pub use rational::Rational;
pub use registry::{Env, Limits, Registry};
pub use rules::{Program, Rule};
