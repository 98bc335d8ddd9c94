//! E-variables for k-sample tests in one-parameter exponential families.
//!
//! The crate provides the four block statistics (pseudo, conditional,
//! i.i.d.-projection and mixture-projection e-variables), reverse information
//! projection search with sup-expectation certificates, growth-rate and
//! fourth-order gap computations, and a sequential harness that turns block
//! e-values into an e-process over k streams.

pub mod config;
pub mod error;
pub mod evariables;
pub mod expfam;
pub mod growth;
pub mod marginal;
pub mod quad;
pub mod ripr;
pub mod sequential;
pub mod special;

pub use error::{Error, Result};

pub use expfam::{Alternative, FamilySpec};
pub use evariables::{Block, EValueKind, EValueResult};
pub use ripr::MixtureNull;
