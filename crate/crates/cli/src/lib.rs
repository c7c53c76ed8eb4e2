//! Batch experiment runner: parameter sweeps, exponent fits, and CSV/JSON
//! tables for every numeric operation of `triperiod-core`.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod fit;
pub mod output;
pub mod window;
