//! Scaling laws, unit conversion and figure datasets.

mod figures;
mod fit;
pub mod units;

pub use figures::{reproduce_figure, FigureId, FigureParams};
pub use fit::{
    fit_peak_scaling, fit_power_law, fit_time_samples, fit_time_scaling, PowerLawFit, TimeSample,
    TimeScalingFit,
};

use crate::Real;

/// First-arrival law `|f_{N,1}|² ≈ 1.35·N^{-2/3}`.
pub const PEAK_PREFACTOR: f64 = 1.35;
pub const PEAK_EXPONENT: f64 = -2.0 / 3.0;
/// Fitted transfer-time law `t(P) = 0.33·N^{5/3}·|ln P|`.
pub const TIME_FIT_PREFACTOR: f64 = 0.33;
/// Heuristic counterpart obtained from the peak and round-trip estimates.
pub const TIME_HEURISTIC_PREFACTOR: f64 = 0.51;
pub const TIME_EXPONENT: f64 = 5.0 / 3.0;

pub fn peak_heuristic<T: Real>(n_sites: usize) -> T {
    T::lit(PEAK_PREFACTOR) * T::from_usize_lossy(n_sites).powf(T::lit(PEAK_EXPONENT))
}

/// `(1 - 1.35·N^{-2/3})^l`.
pub fn failure_heuristic<T: Real>(n_sites: usize, l: usize) -> T {
    (T::one() - peak_heuristic::<T>(n_sites)).powi(l as i32)
}

/// `prefactor · N^{5/3} · |ln P|` in natural time units.
pub fn transfer_time_law<T: Real>(prefactor: T, n_sites: usize, p: T) -> T {
    prefactor * T::from_usize_lossy(n_sites).powf(T::lit(TIME_EXPONENT)) * p.ln().abs()
}
