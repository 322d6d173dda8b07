//! Reduced dual-rail protocol: one complex amplitude per site.
//!
//! After the encoding gate the two rails hold `α|0⟩|1⟩ + β|1⟩|0⟩`, and the
//! excitation moves identically on both rails. The state is therefore
//! `Σ_n c_n |s(n)⟩` with `|s(n)⟩ = α|0⟩|n⟩ + β|n⟩|0⟩` for every input, and
//! the simulation only tracks `c`.
//!
//! `c` is never renormalized. A failed measurement zeroes `c_N`, so `|c_N|²`
//! read before the projection is already the joint probability "all earlier
//! attempts failed and this one succeeds". `P(l)` is the probability that
//! the first `l` attempts all failed, counting damping losses as failures.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::chain::SpectralDecomposition;
use crate::dataset::{Dataset, Value};
use crate::noise::{self, NoiseParams};
use crate::scheduler::Schedule;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord<T> {
    /// 1-based measurement index `l`.
    pub index: usize,
    /// Time since the previous measurement (or since encoding).
    pub interval: T,
    pub absolute_time: T,
    /// Joint probability that this attempt is the first success.
    pub step_success: T,
    /// `P(l)`.
    pub joint_failure: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualRailState<T> {
    amplitudes: Vec<Complex<T>>,
    records: Vec<MeasurementRecord<T>>,
    total_success: T,
    loss: T,
    elapsed: T,
    since_measurement: T,
}

impl<T: Real> DualRailState<T> {
    /// Excitation on site 1 of both rails, right after encoding.
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::TooFewSites(n_sites));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); n_sites];
        amplitudes[0] = Complex::new(T::one(), T::zero());
        Ok(Self {
            amplitudes,
            records: Vec::new(),
            total_success: T::zero(),
            loss: T::zero(),
            elapsed: T::zero(),
            since_measurement: T::zero(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn records(&self) -> &[MeasurementRecord<T>] {
        &self.records
    }

    pub fn total_success(&self) -> T {
        self.total_success
    }

    /// Probability lost to damping jumps so far.
    pub fn loss(&self) -> T {
        self.loss
    }

    pub fn elapsed(&self) -> T {
        self.elapsed
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `P(l)` after the last measurement, `1` before any.
    pub fn joint_failure(&self) -> T {
        self.records.last().map_or(T::one(), |r| r.joint_failure)
    }

    /// Probability that the excitation is currently on Bob's site.
    pub fn arrival_probability(&self) -> T {
        self.amplitudes[self.n_sites() - 1].norm_sqr()
    }

    fn check_dimension(&self, dec: &SpectralDecomposition<T>) -> Result<()> {
        if dec.n_sites() != self.n_sites() {
            return Err(Error::DimensionMismatch {
                state: self.n_sites(),
                spectrum: dec.n_sites(),
            });
        }
        Ok(())
    }

    /// `c ← F(τ)·c`.
    pub fn evolve(&mut self, dec: &SpectralDecomposition<T>, tau: T) -> Result<()> {
        self.check_dimension(dec)?;
        if !(tau > T::zero() && tau.is_finite()) {
            return Err(Error::NonPositiveInterval(tau.as_f64()));
        }
        dec.evolve_in_place(&mut self.amplitudes, tau);
        self.advance_clock(tau);
        Ok(())
    }

    pub(crate) fn advance_clock(&mut self, tau: T) {
        self.elapsed += tau;
        self.since_measurement += tau;
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    pub(crate) fn add_loss(&mut self, p: T) {
        self.loss += p;
    }

    /// Decode and measure Bob's rail-2 qubit. Returns the success
    /// probability of this attempt and projects onto the failure branch
    /// (without renormalizing).
    pub fn measure(&mut self) -> T {
        let last = self.n_sites() - 1;
        let step_success = self.amplitudes[last].norm_sqr();
        self.amplitudes[last] = Complex::new(T::zero(), T::zero());
        self.total_success += step_success;
        let record = MeasurementRecord {
            index: self.records.len() + 1,
            interval: self.since_measurement,
            absolute_time: self.elapsed,
            step_success,
            joint_failure: T::one() - self.total_success,
        };
        self.records.push(record);
        self.since_measurement = T::zero();
        step_success
    }
}

/// Measurement trajectory of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult<T> {
    pub n_sites: usize,
    pub records: Vec<MeasurementRecord<T>>,
    pub total_success: T,
    pub loss: T,
    #[serde(skip)]
    pub final_state: Option<DualRailState<T>>,
}

impl<T: Real> ProtocolResult<T> {
    pub fn from_state(state: DualRailState<T>) -> Self {
        Self {
            n_sites: state.n_sites(),
            records: state.records.clone(),
            total_success: state.total_success,
            loss: state.loss,
            final_state: Some(state),
        }
    }

    pub fn final_joint_failure(&self) -> T {
        self.records.last().map_or(T::one(), |r| r.joint_failure)
    }

    pub fn joint_failures(&self) -> Vec<T> {
        self.records.iter().map(|r| r.joint_failure).collect()
    }

    pub fn step_successes(&self) -> Vec<T> {
        self.records.iter().map(|r| r.step_success).collect()
    }

    /// Columns `l, tau_l, t_abs, step_success, P_l`.
    pub fn to_dataset(&self) -> Dataset {
        let mut ds = Dataset::new(["l", "tau_l", "t_abs", "step_success", "P_l"]);
        ds.meta("kind", "protocol");
        ds.meta("n_sites", self.n_sites);
        ds.meta("units", "natural (hbar = 1, J = 1)");
        for r in &self.records {
            ds.push([
                Value::Int(r.index as i64),
                Value::Float(r.interval.as_f64()),
                Value::Float(r.absolute_time.as_f64()),
                Value::Float(r.step_success.as_f64()),
                Value::Float(r.joint_failure.as_f64()),
            ]);
        }
        ds
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol result serializes")
    }
}

/// Alternates evolution and measurement over `schedule`. With `noise`, the
/// evolution is the symmetric no-jump evolution of [`noise::evolve_damped`].
pub fn run_schedule<T: Real>(
    dec: &SpectralDecomposition<T>,
    schedule: &Schedule<T>,
    noise: Option<&NoiseParams<T>>,
) -> Result<ProtocolResult<T>> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    if let Some(p) = noise {
        p.require_symmetric()?;
    }
    let mut state = DualRailState::new(dec.n_sites())?;
    for &tau in schedule.intervals() {
        match noise {
            Some(p) => noise::evolve_damped(&mut state, dec, tau, p)?,
            None => state.evolve(dec, tau)?,
        }
        state.measure();
    }
    Ok(ProtocolResult::from_state(state))
}
