//! File formats, the experiment pipeline and the `maskforge` command line
//! tool, built on `maskforge-core`.

pub mod cli;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod wav;

pub use error::{Error, Result};
