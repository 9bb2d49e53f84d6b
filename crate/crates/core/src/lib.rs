//! Hide-and-Seek data augmentation and the measurement machinery around it.
//!
//! The crate is organised by concern:
//!
//! * [`tensor`], [`geometry`], [`rng`] and [`hast`] hold the shared value
//!   types, the deterministic random streams and the binary tensor format.
//! * [`stats`] accumulates the dataset mean used as the fill value.
//! * [`hide_image`] and [`hide_temporal`] are the augmentations themselves,
//!   together with the Random Erasing and pixel-dropout baselines.
//! * [`cam`] computes class activation maps and turns them into boxes or
//!   temporal segments; [`metrics`] scores those against ground truth.
//! * [`activation`] checks numerically that mean-value fill keeps first-layer
//!   activations matched in expectation.
//! * [`toy`] is a small single-conv classifier used to demonstrate the
//!   localization effect end to end on synthetic data.
//! * [`formats`] parses the JSON and JSON-lines files consumed by the CLI.

pub mod activation;
pub mod cam;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod hast;
pub mod hide_image;
pub mod hide_temporal;
pub mod metrics;
pub mod rng;
pub mod stats;
pub mod tensor;
pub mod toy;

pub use error::{Error, Result};
pub use geometry::{BBox, Interval};
pub use rng::{derive_stream, RngKey, Stream};
pub use tensor::{AnyTensor, Tensor1, Tensor3};
