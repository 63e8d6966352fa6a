//! Configuration and pipeline stages behind the `rsent` binary.

pub mod config;
pub mod pipeline;

pub use config::PipelineConfig;
