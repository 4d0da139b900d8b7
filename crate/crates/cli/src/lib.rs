//! Library surface of the experiment harness; the `quench` binary is a thin
//! wrapper over these modules.

pub mod bundle;
pub mod compare;
pub mod config;
pub mod engines;
pub mod recipes;
