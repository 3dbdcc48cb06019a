//! Exact ReLU networks for indicators of iterated-function-system iterates.

pub mod constructor;
pub mod error;
pub mod geometry;
pub mod json;
pub mod network;
pub mod oracle;

pub use error::{Error, Result};
