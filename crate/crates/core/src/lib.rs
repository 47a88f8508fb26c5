//! Crack-severity classification from (synthetic) infrared thermography.
//!
//! The crate is organised along the pipeline:
//!
//! - [`tensor`]: a small deterministic tensor kernel set (3×3 convolution,
//!   2×2 max pooling, dense, ReLU, softmax cross-entropy, SGD) with exact
//!   analytic backward passes.
//! - [`imaging`]: RGB/thermal image types, the radiometric colormap codec,
//!   thermal/visible fusion, an edge-overlay emulation of MSX imagery,
//!   preprocessing filters, PNG persistence and ΔT measurement.
//! - [`dataset`]: the ΔT → crack level rule, a procedural sample generator,
//!   JSON Lines manifests and stratified splitting.
//! - [`model`]: the eleven-layer convolutional classifier, its training loop
//!   and the `TCK1` checkpoint format.
//! - [`metrics`]: confusion matrices, one-vs-rest metrics and report
//!   rendering.
//! - [`cli`]: the `thermocrack` command line front end.
//!
//! Runnable walkthroughs of each stage live in the crate's `examples/`
//! directory (`cargo run --example <name>`).

pub mod cli;
pub mod dataset;
pub mod error;
pub mod imaging;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
