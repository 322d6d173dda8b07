//! Heralded qubit transfer through a pair of spin chains.
//!
//! A logical qubit is stored as "which of two identical chains carries the
//! single excitation" (dual-rail encoding). The receiver repeatedly decodes
//! and measures the last site of the second rail; a positive outcome heralds
//! a perfect copy of the input, a negative one leaves the information in the
//! chains for the next attempt.
//!
//! All dynamics lives in the single-excitation sector of one chain, so the
//! reduced simulation tracks an `N`-component complex vector. The [`oracle`]
//! module re-derives every reduced-model statement from the full `2^N` /
//! `4^N` Hilbert space at small `N`.
//!
//! Units: `ħ = 1` and energies are measured in units of the coupling `J`
//! unless a [`ChainSpec`] says otherwise. Conversion to kelvin and
//! nanoseconds lives in [`analysis::units`].
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`). The aliases at the crate root fix it to `f64`.

pub mod analysis;
pub mod chain;
pub mod dataset;
mod error;
pub mod noise;
pub mod oracle;
pub mod protocol;
mod scalar;
pub mod scheduler;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Real;

pub type ChainSpec = chain::ChainSpec<f64>;
pub type SectorHamiltonian = chain::SectorHamiltonian<f64>;
pub type SpectralDecomposition = chain::SpectralDecomposition<f64>;
pub type Propagator = chain::Propagator<f64>;
pub type DualRailState = protocol::DualRailState<f64>;
pub type MeasurementRecord = protocol::MeasurementRecord<f64>;
pub type ProtocolResult = protocol::ProtocolResult<f64>;
pub type Schedule = scheduler::Schedule<f64>;
pub type GreedyOptions = scheduler::GreedyOptions<f64>;
pub type NoiseParams = noise::NoiseParams<f64>;
pub type AsymmetricRunResult = noise::AsymmetricRunResult<f64>;
pub type LogicalQubit = oracle::LogicalQubit<f64>;
pub type PowerLawFit = analysis::PowerLawFit<f64>;

/// Single-precision variants, mainly useful for large parameter sweeps where
/// `1e-6` accuracy is enough.
pub type SpectralDecomposition32 = chain::SpectralDecomposition<f32>;
pub type ChainSpec32 = chain::ChainSpec<f32>;
pub type Schedule32 = scheduler::Schedule<f32>;
