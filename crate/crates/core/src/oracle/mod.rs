//! Brute-force reference in the full Hilbert space.
//!
//! Basis ordering: within one chain, site 1 is the most significant bit and
//! a set bit is an excitation (`σz = +1`). For two chains the index is
//! `x1·2^N + x2`, chain 1 most significant.
//!
//! Everything here uses dense `f64` linear algebra from `nalgebra`, which is
//! independent of the tridiagonal solver in
//! [`crate::chain`].

mod conformance;
mod dephasing;
mod dual_rail;
mod full;

pub use conformance::{
    run_conformance, Comparison, ConformanceCheck, ConformanceOptions, ConformanceReport, Observation,
    ASYMMETRIC_EXPECTED_SUCCESS, ASYMMETRIC_REFERENCE_J_KELVIN, ASYMMETRIC_REFERENCE_MEASUREMENTS, ASYMMETRIC_REFERENCE_N,
    ASYMMETRIC_REFERENCE_T1_NS, ASYMMETRIC_REFERENCE_T2_NS,
};
pub use dephasing::{dephasing_free_check, DephasingOperator, DfsReport, DfsRow, Rail};
pub use dual_rail::{dual_rail_protocol_full, Dephasing, FullProtocolResult, FullStep};
pub use full::{full_hamiltonian, full_transition_amplitude, FullChain, DUAL_CAP, SINGLE_CAP};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Input qubit `α|0⟩ + β|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalQubit<T> {
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
}

impl<T: Real> LogicalQubit<T> {
    pub fn new(alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        let tol = T::lit(1e-12).max(T::lit(64.0) * T::epsilon());
        let dev = (norm - T::one()).abs();
        if dev.is_nan() || dev > tol {
            return Err(Error::Unnormalized(norm.as_f64()));
        }
        Ok(Self { alpha, beta })
    }

    /// Normalizes `(α, β)` first.
    pub fn normalized(alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(norm > T::zero() && norm.is_finite()) {
            return Err(Error::Unnormalized(norm.as_f64()));
        }
        Self::new(alpha.unscale(norm), beta.unscale(norm))
    }

    pub fn equal_superposition() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self {
            alpha: Complex::new(h, T::zero()),
            beta: Complex::new(h, T::zero()),
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> T {
        (self.alpha.conj() * other.alpha + self.beta.conj() * other.beta).norm_sqr()
    }
}

pub(crate) fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewSites(n));
    }
    if n > cap {
        return Err(Error::OracleTooLarge { n, cap });
    }
    Ok(())
}

/// Bit mask of the 1-based `site` in an `n`-site chain.
#[inline]
pub(crate) fn site_mask(n: usize, site: usize) -> usize {
    1 << (n - site)
}

/// `σz` eigenvalue of `site` in basis state `x`.
#[inline]
pub(crate) fn sigma_z(x: usize, n: usize, site: usize) -> f64 {
    if x & site_mask(n, site) != 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_validation() {
        assert!(LogicalQubit::new(Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)).is_ok());
        assert!(matches!(
            LogicalQubit::new(Complex::new(0.6, 0.0), Complex::new(0.6, 0.0)),
            Err(Error::Unnormalized(_))
        ));
        let q = LogicalQubit::<f64>::normalized(Complex::new(3.0, 0.0), Complex::new(4.0, 0.0)).unwrap();
        assert!((q.alpha.re - 0.6).abs() < 1e-15);
        assert!((q.fidelity(&q) - 1.0).abs() < 1e-15);
        assert!(LogicalQubit::<f64>::normalized(Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn bit_conventions() {
        assert_eq!(site_mask(4, 1), 0b1000);
        assert_eq!(site_mask(4, 4), 0b0001);
        assert_eq!(sigma_z(0b0100, 4, 2), 1.0);
        assert_eq!(sigma_z(0b0100, 4, 3), -1.0);
    }
}
