//! Finite open non-deterministic dynamics.
//!
//! A *multi-dynamic* is a disjunctive lax functor from a small engine category
//! into sets and parameter-indexed families of transitions (binary relations).
//! Paired with a deterministic *clock* and a *datation* it becomes an
//! [`OpenDynamic`](dynamics::OpenDynamic), whose realizations are partial
//! sections of the datation compatible with the transitions.
//!
//! Families of open dynamics interact through *requests* (multiple binary
//! relations between outgoing realizations and parameter values), a
//! *synchronization* of their clocks and an *intimacy* on parameter tuples.
//! The [`globaldyn`] module synthesizes the global dynamic of such an
//! interactive family and its parametric quotients, and [`connectivity`]
//! computes the non-splittability structures of a request.
//!
//! Everything here works over finite data and is exhaustive: realization sets,
//! coherence, connectivity and isomorphism are all decided by enumeration with
//! explicit search caps. The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod connectivity;
pub mod control;
pub mod dynamics;
pub mod fincat;
pub mod fixtures;
pub mod globaldyn;
pub mod interaction;
pub mod iso;
mod label;
pub mod multirel;
pub mod random;
pub mod realization;
pub mod transition;

pub use dynamics::{Clock, MultiDynamic, OpenDynamic, ParamId};
pub use fincat::{ArrowId, FinCategory, ObjId};
pub use label::Label;
pub use transition::{Determinism, Transition};

/// Default cap on enumerated candidates (realization search nodes, request
/// grid points, isomorphism search nodes).
pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000;

/// Hard cap on the grid enumerated when a request is given by a predicate.
pub const REQUEST_GRID_CAP: u64 = 10_000_000;
