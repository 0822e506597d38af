//! Prolog tracing with Logichart diagrams.
//!
//! A program and query are read ([`term`]), expanded into a Logichart
//! diagram ([`logichart`]) and executed by a resolution machine that reports
//! one trace event per step ([`engine`]). A [`session`] ties the two
//! together: it colors diagram nodes as goals are called, succeed and fail,
//! patches the diagram when clauses are asserted or retracted, and speaks the
//! JSON protocol used by the CLI and the browser UI.

pub mod address;
pub mod engine;
pub mod logichart;
pub mod session;
pub mod term;

pub use address::{NodeAddress, Segment};
