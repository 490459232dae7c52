//! File formats, configuration and the command line around `overtwist-core`.

pub mod commands;
pub mod config;
pub mod formats;
pub mod obj;
