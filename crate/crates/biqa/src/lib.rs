//! Filesystem, command-line and reporting layer over `biqa-core`.
//!
//! Manifests are CSV files, images are decoded with the `image` crate and
//! models are stored in the binary container defined by
//! [`biqa_core::codec`].

pub mod bench;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod exec;
pub mod pipeline;

pub use error::{BiqaError, Result};
pub use exec::RayonExecutor;
