//! Configuration, result files and command dispatch.

pub mod config;
pub mod output;
pub mod cli;
