//! HTTP service and command implementations for the `isf` binary.

pub mod commands;
pub mod server;
