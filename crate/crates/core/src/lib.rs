//! Velocity-porosity supermodel toolkit.
//!
//! * [`transforms`]: exact empirical rock-physics laws (RHG and seven
//!   lithology transforms with their validity boxes).
//! * [`synthgen`]: seeded training corpora and synthetic test logs.
//! * [`neuralnet`]: from-scratch tanh MLP with backpropagation and Adam.
//! * [`evaluation`]: normalized RMSE, error traces, zone attribution, sweeps.
//! * [`persistence`]: dataset/log CSV, sidecars and the text model format.
//! * [`experiment`]: end-to-end ladder reproductions.
//! * [`config`]: TOML experiment defaults.

pub mod config;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod neuralnet;
pub mod persistence;
pub mod rng;
pub mod synthgen;
pub mod transforms;

pub use error::{Error, Result};
