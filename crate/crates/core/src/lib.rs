//! Leaf species identification from shape, color, texture and vein features
//! with a probabilistic neural network classifier.
//!
//! The extraction chain for one photograph is
//! [`imaging`] (segmentation, contour, centroid) → [`shape`], [`color`],
//! [`texture`], [`vein`] → [`features`] (group assembly). [`pnn`] stores
//! normalized exemplars and classifies, and [`experiment`] runs the
//! train/test protocols over datasets described by [`dataset`].

pub mod color;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod features;
pub mod imaging;
pub mod ingest;
pub mod pnn;
pub mod shape;
pub mod synth;
pub mod texture;
pub mod vein;

pub use error::{Error, Result};
