//! Config-driven experiment runner for the `morozov` library.

pub mod commands;
pub mod config;
pub mod output;
pub mod run;
