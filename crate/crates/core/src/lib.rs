//! Witnesses, classical bounds and quantum strategies for two-party
//! measurement-based perceptrons with restricted communication.

pub mod classical;
pub mod error;
pub mod optimize;
pub mod perceptron;
pub mod qmath;
pub mod quantum;
pub mod report;
pub mod witness;

pub use error::{Error, Result};
