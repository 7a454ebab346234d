//! Quantum k-means for qubit readout discrimination.
//!
//! The crate is organised bottom-up:
//!
//! - [`simulator`]: a small pure-state simulator covering the gates a SwapTest needs.
//! - [`encoding`]: amplitude and angle encodings of classical feature vectors.
//! - [`distance`]: SwapTest circuits, overlap-based distances and batched execution.
//! - [`clustering`]: qk-means with qk-means++ seeding, plus a classical k-means oracle.
//! - [`metrics`]: assignment fidelity, Fowlkes-Mallows and stratified cross-validation.
//! - [`iqdata`]: synthetic IQ readout shots, dataset assembly and the shot-table file format.
//! - [`crosstalk`]: Pearson-correlation crosstalk analysis and flagging.
//! - [`complexity`]: the classical/quantum cost model and job-count checks.

pub mod clustering;
pub mod complexity;
pub mod crosstalk;
pub mod dataset;
pub mod distance;
pub mod encoding;
mod error;
pub mod iqdata;
pub mod metrics;
pub mod seed;
pub mod simulator;

pub use error::{Error, Result};
