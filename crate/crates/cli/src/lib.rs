//! Command-line and HTTP front end.

pub mod commands;
pub mod engine;
pub mod server;
