//! Command line and HTTP front end for the keke puzzle engine.

pub mod commands;
pub mod server;
pub mod service;
pub mod store;
