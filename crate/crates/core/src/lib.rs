//! Semiclassical simulation of cold atoms self-organizing in a single lossy
//! cavity mode driven by a transverse laser and a longitudinal pump.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod output;
pub mod rng;
pub mod runner;
pub mod scenarios;
pub mod sde;
pub mod trig;

pub use error::{Error, Result};
