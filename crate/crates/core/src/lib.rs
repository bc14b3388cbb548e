//! Text block segmentation for single video frames.
//!
//! Stages run in this order: [`enhance::channel_fuse`], [`enhance::sharpen`],
//! [`binarize::kmeans2`], [`morphology::text_candidates`],
//! [`stroke::text_representatives`] and [`grow::segment`].
//! [`pipeline::run_pipeline`] chains them.

pub mod binarize;
pub mod config;
pub mod corpus;
pub mod enhance;
pub mod error;
pub mod eval;
pub mod grow;
pub mod morphology;
pub mod pipeline;
pub mod raster;
pub mod stroke;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use grow::TextBlock;
pub use pipeline::{process_frame, run_batch, run_pipeline, PipelineOutput};
pub use raster::{BBox, BinaryMask, GrayImage, Point, RgbFrame};
