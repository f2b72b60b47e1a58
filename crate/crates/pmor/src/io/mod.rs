//! File formats: Matrix Market matrices, JSON system manifests and run
//! snapshots, CSV trace and validation exports.

pub mod csv;
pub mod manifest;
pub mod matrix_market;
pub mod state;
