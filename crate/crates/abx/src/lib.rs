//! State abstraction for partially observable tasks, computed exactly.
//!
//! The crate builds finite history MDPs from generative POMDPs, compresses
//! them with abstraction functions, measures successor-weighted model
//! reduction errors, and evaluates performance-loss bounds against exact
//! dynamic programming. The [`experiments`] module reproduces the warm-cold
//! lattice, sign chain and chain studies and writes their results as CSV.

pub mod abstraction;
pub mod bounds;
pub mod envs;
pub mod error;
pub mod experiments;
pub mod par;
pub mod pomdp;
pub mod seed;
pub mod tabular;

pub use error::{Error, Result};
