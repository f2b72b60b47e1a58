//! Frequency-domain model order reduction for parametric linear systems.
//!
//! The crate reduces large sparse descriptor systems by Galerkin projection
//! onto bases grown at adaptively chosen frequency/parameter points. Point
//! selection is greedy over a training set, driven by a residual-based output
//! error estimate that needs no stability constants; an optional surrogate
//! mode keeps the training set small and enriches it from a fine candidate
//! pool between iterations.

pub mod bench;
pub mod error;
pub mod estimator;
pub mod greedy;
pub mod io;
pub mod linalg;
pub mod moment;
pub mod rbf;
pub mod sampling;
pub mod system;

pub use error::{Error, Result};
