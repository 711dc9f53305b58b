//! HTTP API and command line over `kgqa_core`.

pub mod api;
pub mod cli;
pub mod error;
