//! Diffusion adaptive estimation of sparse second-order Volterra kernels
//! over a sensor network.
//!
//! Each node of the network observes a noisy output of the same unknown
//! second-order Volterra plant and runs a two-step diffusion iteration:
//! a local adapt step on its own (or shared) data, and a combine step that
//! averages estimates over its neighborhood. The adapt step supports the
//! logarithmic-cost family (dLMLS, dLLAD, dLLMP), the dLMS/dLMP baselines,
//! and an optional zero-attraction term that pulls near-zero coefficients
//! to exactly zero for sparse plants. Measurement noise can be Gaussian or
//! symmetric alpha-stable, and a Monte-Carlo harness averages the network
//! mean-square deviation over independent runs.
//!
//! The `svnet` binary drives experiments from declarative config files and
//! writes per-iteration NMSD traces as CSV.

pub mod adapt;
pub mod cli;
pub mod config;
pub mod error;
pub mod noise;
pub mod seeds;
pub mod sim;
pub mod topology;
pub mod verify;
pub mod volterra;

pub use error::{Error, Result};
