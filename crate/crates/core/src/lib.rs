//! Non-neural machinery for scientific-literature layout detection.
//!
//! Everything here is pure computation over in-memory values and builds
//! without `std`: box geometry and IoU, dataset remapping/merging/splitting,
//! K-means aspect-ratio design and dense anchor grids, box-regression coding
//! and NMS, a COCO-style evaluator, and deterministic SVG/table rendering.
//! File formats and the command line live in the `slld` crate.
#![no_std]

extern crate alloc;

pub mod anchors;
pub mod dataset;
pub mod detection;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod report;

pub use error::{Error, Result};
pub use geometry::{AreaBucket, AreaRange, BBox};
