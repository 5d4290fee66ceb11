//! Desk-scale laboratory for nonuniformly elliptic variational problems.
//!
//! The crate bundles four activities that usually live in separate scripts:
//!
//! * classifying growth parameters `(p, q, alpha, n)` against the sharp
//!   Schauder threshold `q/p < 1 + alpha/n` ([`threshold`]),
//! * minimizing regularized energies `integral c(x) G(Du) dx` over scalar
//!   fields on the unit square ([`integrand`], [`grid`], [`solver`]),
//! * measuring gradient regularity of the computed minimizers through
//!   difference-quotient energies and oscillation decay ([`metrics`]),
//! * assembling finite claim diagrams into colimit classes once every
//!   prerequisite claim has been validated ([`dag`]).
//!
//! Everything is deterministic: identical inputs produce bit-identical
//! energy histories and byte-identical CSV outputs. The [`commands`] module
//! exposes the same entry points the `varlab` binary wires to its
//! subcommands, so experiments scripted against the CLI can be reproduced
//! in-process.

pub mod commands;
pub mod config;
pub mod dag;
pub mod fit;
pub mod grid;
pub mod integrand;
pub mod io;
pub mod metrics;
pub mod solver;
pub mod threshold;
pub mod vec2;

mod error;

pub use error::{Error, Result};
