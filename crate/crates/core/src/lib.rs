//! Link-level models for a sensor-to-access-point relay chain: an underwater
//! optical hop, an air/water FSO hop (direct or retro-reflected) and an RF
//! hop, plus Monte-Carlo cross-checks and the AUV/UAV beam tracker.

pub mod common;
pub mod error;
pub mod fso;
pub mod montecarlo;
pub mod performance;
pub mod quadrature;
pub mod rf;
pub mod sampling;
pub mod special;
pub mod tracking;
pub mod uwoc;

pub use error::{Error, Result};
