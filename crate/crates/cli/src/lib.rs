//! Front end for the relay-chain models: config handling, sweeps written as
//! CSV with gnuplot scripts, and the acceptance checks.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod fidelity;
pub mod output;
