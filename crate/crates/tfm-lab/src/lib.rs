//! A laboratory for comparing one-dimensional (gas) and multi-dimensional
//! blockchain transaction fee mechanisms.
//!
//! The crate implements both mechanisms' base fee dynamics and block-building
//! optimizers, simulates demand shocks to measure price stabilization times,
//! checks welfare dominance of multi-dimensional pricing in stable states,
//! and exercises the reduction from multidimensional knapsack to revenue
//! maximization under invertible tipping functions.
//!
//! Start with the runnable programs in `examples/`, one per capability, or
//! the `tfm-lab` binary which drives full experiments from a TOML config.

pub mod allocator;
pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod mechanism;
pub mod sim;
pub mod tipping;

pub use error::{Error, Result};
