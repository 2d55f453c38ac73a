pub mod descriptors;
pub mod error;
pub mod exec;
pub mod export;
pub mod filtering;
pub mod image;
pub mod pipeline;
pub mod regions;
pub mod segmentation;
pub mod synthgen;

pub use error::{Error, Result};
pub use exec::Execution;
pub use export::OutputFormat;
pub use image::GrayImage;
pub use pipeline::{run, run_with, PipelineConfig, SegmentSet};
