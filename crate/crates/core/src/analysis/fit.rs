use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, SpectralDecomposition};
use crate::scheduler::{time_to_failure_threshold, GreedyOptions};
use crate::{Error, Real, Result};

/// Least-squares fit of `y = prefactor · x^exponent` in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit<T> {
    pub prefactor: T,
    pub exponent: T,
    /// RMS of the residuals of `ln y`.
    pub residual: T,
    pub x_min: T,
    pub x_max: T,
    pub samples: usize,
}

impl<T: Real> PowerLawFit<T> {
    pub fn predict(&self, x: T) -> T {
        self.prefactor * x.powf(self.exponent)
    }
}

pub fn fit_power_law<T: Real>(x: &[T], y: &[T]) -> Result<PowerLawFit<T>> {
    if x.len() != y.len() {
        return Err(Error::InsufficientSamples {
            what: "matching y values",
            needed: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientSamples {
            what: "points for a power-law fit",
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !(*v > T::zero() && v.is_finite())) {
        return Err(Error::InvalidSample);
    }
    let n = T::from_usize_lossy(x.len());
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let sxx: T = lx.iter().map(|a| (*a - mx) * (*a - mx)).sum();
    if sxx == T::zero() {
        return Err(Error::InsufficientSamples {
            what: "distinct x values",
            needed: 2,
            got: 1,
        });
    }
    let sxy: T = lx.iter().zip(&ly).map(|(a, b)| (*a - mx) * (*b - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let rss: T = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let r = *b - intercept - exponent * *a;
            r * r
        })
        .sum();
    let x_min = x.iter().copied().fold(T::infinity(), T::min);
    let x_max = x.iter().copied().fold(T::neg_infinity(), T::max);
    Ok(PowerLawFit {
        prefactor: intercept.exp(),
        exponent,
        residual: (rss / n).sqrt(),
        x_min,
        x_max,
        samples: x.len(),
    })
}

fn distinct_sorted(values: &[usize]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Fits the height of the first arrival peak `|f_{N,1}|²` against `N`.
/// Needs at least five distinct chain lengths, all `≥ 20`.
pub fn fit_peak_scaling<T: Real>(n_values: &[usize]) -> Result<PowerLawFit<T>> {
    let ns = distinct_sorted(n_values);
    if ns.len() < 5 {
        return Err(Error::InsufficientSamples {
            what: "distinct chain lengths",
            needed: 5,
            got: ns.len(),
        });
    }
    if let Some(&n) = ns.iter().find(|&&n| n < 20) {
        return Err(Error::InsufficientSamples {
            what: "sites per chain in the peak fit",
            needed: 20,
            got: n,
        });
    }
    let heights = ns
        .par_iter()
        .map(|&n| Ok(SpectralDecomposition::<T>::from_spec(&ChainSpec::heisenberg(n))?.first_peak().probability))
        .collect::<Result<Vec<T>>>()?;
    let xs: Vec<T> = ns.iter().map(|&n| T::from_usize_lossy(n)).collect();
    fit_power_law(&xs, &heights)
}

/// Time for the greedy protocol on `n` sites to push `P(l)` below `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSample<T> {
    pub n_sites: usize,
    pub p_target: T,
    pub time: T,
    pub l_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeScalingFit<T> {
    /// Fit of `t / |ln P|` against `N`.
    pub fit: PowerLawFit<T>,
    pub samples: Vec<TimeSample<T>>,
}

/// Fits `t / |ln P| = c · N^a` over already measured samples.
pub fn fit_time_samples<T: Real>(samples: &[TimeSample<T>]) -> Result<PowerLawFit<T>> {
    let xs: Vec<T> = samples.iter().map(|s| T::from_usize_lossy(s.n_sites)).collect();
    let ys: Vec<T> = samples.iter().map(|s| s.time / s.p_target.ln().abs()).collect();
    fit_power_law(&xs, &ys)
}

/// Measures the greedy transfer time on the `N × P` grid and fits
/// `t = c · N^a · |ln P|`. Needs at least four chain lengths and targets
/// spanning at least two decades.
pub fn fit_time_scaling<T: Real>(
    n_values: &[usize],
    p_values: &[T],
    opts: &GreedyOptions<T>,
    l_cap: usize,
) -> Result<TimeScalingFit<T>> {
    let ns = distinct_sorted(n_values);
    if ns.len() < 4 {
        return Err(Error::InsufficientSamples {
            what: "distinct chain lengths",
            needed: 4,
            got: ns.len(),
        });
    }
    for &p in p_values {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::InvalidProbability(p.as_f64()));
        }
    }
    let (lo, hi) = p_values
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    let decades = if p_values.is_empty() { 0.0 } else { (hi / lo).log10().as_f64() };
    if decades < 2.0 - 1e-9 {
        return Err(Error::InsufficientSamples {
            what: "decades spanned by the failure targets",
            needed: 2,
            got: decades.max(0.0).floor() as usize,
        });
    }
    let samples = time_samples(&ns, p_values, opts, l_cap)?;
    Ok(TimeScalingFit {
        fit: fit_time_samples(&samples)?,
        samples,
    })
}

pub(crate) fn time_samples<T: Real>(
    ns: &[usize],
    p_values: &[T],
    opts: &GreedyOptions<T>,
    l_cap: usize,
) -> Result<Vec<TimeSample<T>>> {
    let grid: Vec<(usize, T)> = ns
        .iter()
        .flat_map(|&n| p_values.iter().map(move |&p| (n, p)))
        .collect();
    grid.par_iter()
        .map(|&(n, p)| {
            let dec = SpectralDecomposition::from_spec(&ChainSpec::heisenberg(n))?;
            let hit = time_to_failure_threshold(&dec, p, l_cap, opts)?;
            Ok(TimeSample {
                n_sites: n,
                p_target: p,
                time: hit.total_time,
                l_used: hit.l_used,
            })
        })
        .collect()
}
