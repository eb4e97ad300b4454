//! Allocation-only core of a lightweight blind (no-reference) image quality
//! assessment model.
//!
//! The model is a four stage composition:
//!
//! 1. [`augment`] turns each source image into a fixed set of square
//!    subimages that inherit the source's mean opinion score.
//! 2. [`features`] maps a subimage to an unsupervised feature vector using
//!    8×8 block DCT coefficients, a Saab transform over the DC map and
//!    spatial pooling.
//! 3. [`rft`] ranks feature dimensions by the best single-split weighted
//!    RMSE against the labels and keeps the lowest-cost ones.
//! 4. [`gbdt`] regresses the selected features onto the score; image scores
//!    are the mean over their subimages ([`model::QualityModel`]).
//!
//! Nothing in this crate touches the filesystem. Parallelism is injected
//! through [`exec::Executor`] so results never depend on the worker count.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod augment;
pub mod codec;
pub mod dct;
pub mod error;
pub mod exec;
pub mod features;
pub mod gbdt;
pub mod image;
pub mod linalg;
pub mod manifest;
pub mod metrics;
pub mod model;
pub mod rft;
pub mod saab;
pub mod toy;
pub mod train;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use image::{Plane, Rgb8Image, YuvImage};
pub use manifest::{DatasetManifest, ManifestEntry, Scenario, Split};
pub use model::QualityModel;
