//! Numerical laboratory for truncated Fock spaces.
//!
//! The crate provides dense state vectors and diagonal mixtures on truncated
//! single- and multi-mode Fock spaces ([`fock`]), generalized ladder operators
//! with the addition-then-subtraction indistinguishability measure ([`ladder`]),
//! beam-splitter transformations and quantum-scissors state preparation
//! ([`optics`]), and two simulated counting protocols that estimate
//! `⟨ψ|a a†|ψ⟩` from detector statistics ([`probe`]).

pub mod error;
pub mod fock;
pub mod ladder;
pub mod optics;
pub mod probe;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{FockDensity, FockState, TruncationReport};
pub use ladder::{CoefficientProfile, OperatorMatrix};
pub use optics::{BeamSplitter, ScissorsResult, SplitterConvention};
pub use probe::{AtomFieldState, CountRecord, JcConfig, JcMode, NdpaConfig, NdpaMode};
