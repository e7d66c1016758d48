//! File formats, a multi-threaded runner and named scenarios on top of
//! `backcom-core`.

pub mod config;
pub mod emit;
pub mod error;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
