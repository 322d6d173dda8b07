//! Natural units (`ħ = 1`, energies in units of `J`) versus kelvin and
//! nanoseconds.
//!
//! One natural time unit is `ħ/J`. With `J = k_B·J_K`,
//! `ħ/J = (ħ/k_B)/J_K` and `ħ/k_B = 7.6382e-3 ns·K`.

use crate::{Error, Result};

/// `ħ/k_B` in ns·K.
pub const HBAR_OVER_KB_NS_K: f64 = 7.6382e-3;

fn positive(x: f64, what: &'static str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonPositive(what))
    }
}

/// Length of one natural time unit in ns for a coupling of `coupling_kelvin`.
pub fn natural_time_unit_ns(coupling_kelvin: f64) -> Result<f64> {
    Ok(HBAR_OVER_KB_NS_K / positive(coupling_kelvin, "coupling (K)")?)
}

pub fn natural_time_to_ns(t_natural: f64, coupling_kelvin: f64) -> Result<f64> {
    Ok(t_natural * natural_time_unit_ns(coupling_kelvin)?)
}

pub fn ns_to_natural_time(t_ns: f64, coupling_kelvin: f64) -> Result<f64> {
    Ok(t_ns / natural_time_unit_ns(coupling_kelvin)?)
}

/// Damping rate in natural units from the ratio `J/Γ` given in K·ns.
pub fn gamma_to_natural(j_over_gamma_k_ns: f64) -> Result<f64> {
    Ok(HBAR_OVER_KB_NS_K / positive(j_over_gamma_k_ns, "J/Gamma (K ns)")?)
}

/// Rate in ns⁻¹ to natural units for a coupling of `coupling_kelvin`.
pub fn rate_ns_to_natural(rate_per_ns: f64, coupling_kelvin: f64) -> Result<f64> {
    if !(rate_per_ns >= 0.0 && rate_per_ns.is_finite()) {
        return Err(Error::InvalidRate);
    }
    Ok(rate_per_ns * natural_time_unit_ns(coupling_kelvin)?)
}

pub fn natural_rate_to_ns(rate_natural: f64, coupling_kelvin: f64) -> Result<f64> {
    Ok(rate_natural / natural_time_unit_ns(coupling_kelvin)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_unit_at_twenty_kelvin() {
        let ns = natural_time_to_ns(1.0, 20.0).unwrap();
        assert!((ns - 3.8191e-4).abs() < 1e-8);
    }

    #[test]
    fn round_trips() {
        for (t, j) in [(1.0, 20.0), (3274.2, 7.5), (1e-3, 2000.0)] {
            let back = ns_to_natural_time(natural_time_to_ns(t, j).unwrap(), j).unwrap();
            assert!(((back - t) / t).abs() < 1e-12);
            let r = rate_ns_to_natural(t, j).unwrap();
            assert!(((natural_rate_to_ns(r, j).unwrap() - t) / t).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_ratio() {
        let g = gamma_to_natural(50.0).unwrap();
        assert!((g - 1.52764e-4).abs() < 1e-9);
        assert!(gamma_to_natural(1e300).unwrap() < 1e-300);
        // J/Γ = 50 K·ns is J = 50 K with Γ = 1 ns⁻¹
        assert!((rate_ns_to_natural(1.0, 50.0).unwrap() - g).abs() < 1e-18);
        assert!(gamma_to_natural(0.0).is_err());
        assert!(natural_time_to_ns(1.0, -2.0).is_err());
    }
}
