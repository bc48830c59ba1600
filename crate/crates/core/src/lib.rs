//! Coverage analysis of clustered non-coherent joint transmission in
//! multi-tier cellular networks.

pub mod config;
pub mod coverage;
pub mod error;
pub mod fading;
pub mod harness;
pub mod interference;
pub mod metrics;
pub mod numerics;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
