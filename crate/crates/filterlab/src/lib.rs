//! Std companion to `filterlab-core`: the text DSL, config files, report
//! emission, and the parallel experiment runner behind the `filterlab`
//! binary.

pub mod config;
pub mod dsl;
pub mod report;
pub mod runner;

pub use filterlab_core as core;
