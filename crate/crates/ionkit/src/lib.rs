//! File formats, a parallel Coulomb engine and the `ionkit` command line for
//! [`ionkit_core`].
//!
//! Every artifact written here carries the toolkit version and the fully
//! resolved configuration that produced it (see [`artifact`]); feeding that
//! block back to the same subcommand reproduces the artifact.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifact;
pub mod cli;
pub mod engine;
pub mod error;
pub mod fit;
pub mod king;
pub mod lines;
pub mod overrides;
pub mod plan;
pub mod registry;
pub mod scenario;

pub use error::Error;
