//! Avalanche diagnostics for gradient dynamics during training.
//!
//! The toolkit turns per-batch gradients of small networks into cascade
//! statistics on a fixed scale-free graph over the flattened parameters,
//! then extracts the time-resolved effective cascade dimension D(t) by
//! finite-size scaling across model sizes, with bootstrap, leave-one-scale-out,
//! CCDF cutoff-scaling and shadow-probe controls.
//!
//! Module map:
//! - [`graph`]: deterministic Barabási–Albert substrate over the N parameters
//! - [`cascade`]: the thresholded-diffusion (OFC-style) avalanche probe
//! - [`train`]: from-scratch trainers for the two task families (ModAdd, XOR)
//! - [`synth`]: i.i.d. Gaussian gradient null baseline
//! - [`analysis`]: epoch aggregation, FSS over time, bootstrap/LOO, CCDF, crossings
//! - [`store`]: run directories, snapshot/record/trace file formats, ingestion

pub mod analysis;
pub mod cascade;
pub mod graph;
pub mod seeds;
pub mod stats;
pub mod store;
pub mod synth;
pub mod train;
