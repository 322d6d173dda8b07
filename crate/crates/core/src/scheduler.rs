//! Measurement schedules.
//!
//! [`uniform_schedule`] waits one fixed interval `N` between attempts.
//! [`greedy_optimize`] picks each interval, given the current failure-branch
//! state, to maximize the next attempt's success probability: a grid scan
//! over a window followed by golden-section refinement of the best grid
//! point.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::chain::{phase, transit_time, SpectralDecomposition};
use crate::noise::{self, NoiseParams};
use crate::protocol::{DualRailState, ProtocolResult};
use crate::{Error, Real, Result};

/// Positive intervals `τ_1…τ_L` between measurements (natural time units).
///
/// Serializes as a plain JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>", bound = "T: Real")]
pub struct Schedule<T> {
    intervals: Vec<T>,
}

impl<T: Real> Schedule<T> {
    pub fn new(intervals: Vec<T>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if let Some(bad) = intervals.iter().find(|t| !(**t > T::zero() && t.is_finite())) {
            return Err(Error::NonPositiveInterval(bad.as_f64()));
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[T] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `t(l) = Σ_{i≤l} τ_i`.
    pub fn absolute_times(&self) -> Vec<T> {
        self.intervals
            .iter()
            .scan(T::zero(), |acc, &t| {
                *acc += t;
                Some(*acc)
            })
            .collect()
    }

    pub fn total_time(&self) -> T {
        self.intervals.iter().copied().sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.intervals).expect("schedule serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

impl<T: Real> TryFrom<Vec<T>> for Schedule<T> {
    type Error = Error;

    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(v)
    }
}

impl<T> From<Schedule<T>> for Vec<T> {
    fn from(s: Schedule<T>) -> Self {
        s.intervals
    }
}

/// `τ_i = N` for every attempt, i.e. `t(l) = N·l`.
pub fn uniform_schedule<T: Real>(n_sites: usize, l_max: usize) -> Result<Schedule<T>> {
    if n_sites < 2 {
        return Err(Error::TooFewSites(n_sites));
    }
    if l_max == 0 {
        return Err(Error::EmptySchedule);
    }
    Schedule::new(vec![T::from_usize_lossy(n_sites); l_max])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyOptions<T> {
    /// Candidate interval range; `None` means [`default_window`].
    pub window: Option<(T, T)>,
    pub grid_step: T,
    pub refine_tol: T,
}

impl<T: Real> Default for GreedyOptions<T> {
    fn default() -> Self {
        Self {
            window: None,
            grid_step: T::lit(0.05),
            refine_tol: T::lit(1e-6),
        }
    }
}

/// `(0.1, 3)` one-way transit times.
pub fn default_window<T: Real>(n_sites: usize) -> (T, T) {
    let transit: T = transit_time(n_sites);
    (T::lit(0.1) * transit, T::lit(3.0) * transit)
}

/// Finds the interval that maximizes the next attempt's success.
#[derive(Debug, Clone)]
pub struct IntervalSearch<'a, T> {
    dec: &'a SpectralDecomposition<T>,
    lo: T,
    hi: T,
    grid_step: T,
    refine_tol: T,
    /// Symmetric damping rate folded into the objective as `e^{-2Γτ}`.
    decay: T,
}

impl<'a, T: Real> IntervalSearch<'a, T> {
    pub fn new(dec: &'a SpectralDecomposition<T>, opts: &GreedyOptions<T>) -> Result<Self> {
        let (lo, hi) = opts.window.unwrap_or_else(|| default_window(dec.n_sites()));
        if !(lo.is_finite() && hi.is_finite() && lo > T::zero() && hi > lo) {
            return Err(Error::DegenerateWindow {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        if !(opts.grid_step > T::zero() && opts.refine_tol > T::zero()) {
            return Err(Error::InvalidResolution);
        }
        Ok(Self {
            dec,
            lo,
            hi,
            grid_step: opts.grid_step,
            refine_tol: opts.refine_tol,
            decay: T::zero(),
        })
    }

    pub fn with_decay(mut self, gamma: T) -> Self {
        self.decay = gamma;
        self
    }

    pub fn window(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    /// `w_k = v_k(N)·a_k`, so that `(F(τ)c)_N = Σ_k w_k e^{-iE_kτ}`.
    pub fn arrival_weights(&self, amplitudes: &[Complex<T>]) -> Vec<Complex<T>> {
        let last = self.dec.n_sites() - 1;
        self.dec
            .to_modes(amplitudes)
            .into_iter()
            .enumerate()
            .map(|(k, a)| a.scale(self.dec.mode(k)[last]))
            .collect()
    }

    /// Success probability of an attempt made `tau` after the current state.
    pub fn success_after(&self, weights: &[Complex<T>], tau: T) -> T {
        let amp: Complex<T> = self
            .dec
            .energies()
            .iter()
            .zip(weights)
            .map(|(&e, &w)| w * phase(e, tau))
            .sum();
        let damping = if self.decay > T::zero() {
            (-T::lit(2.0) * self.decay * tau).exp()
        } else {
            T::one()
        };
        amp.norm_sqr() * damping
    }

    pub fn best_interval(&self, amplitudes: &[Complex<T>]) -> T {
        let w = self.arrival_weights(amplitudes);
        let f = |t: T| self.success_after(&w, t);

        let span = (self.hi - self.lo) / self.grid_step;
        let count = (span + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
        let mut best_t = self.lo;
        let mut best_v = f(self.lo);
        for i in 1..=count {
            let t = self.lo + self.grid_step * T::from_usize_lossy(i);
            let v = f(t);
            // strict: ties go to the earlier time
            if v > best_v {
                best_t = t;
                best_v = v;
            }
        }

        let a = (best_t - self.grid_step).max(self.lo);
        let b = (best_t + self.grid_step).min(self.hi);
        let refined = golden_section_max(&f, a, b, self.refine_tol);
        if f(refined) > best_v {
            refined
        } else {
            best_t
        }
    }
}

fn golden_section_max<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    (a + b) / T::lit(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyRun<T> {
    pub schedule: Schedule<T>,
    pub result: ProtocolResult<T>,
}

/// Greedy schedule of `l_max` attempts, optionally under symmetric damping
/// (the objective then includes the `e^{-2Γτ}` factor).
pub fn greedy_run<T: Real>(
    dec: &SpectralDecomposition<T>,
    l_max: usize,
    opts: &GreedyOptions<T>,
    noise: Option<&NoiseParams<T>>,
) -> Result<GreedyRun<T>> {
    if l_max == 0 {
        return Err(Error::EmptySchedule);
    }
    let mut search = IntervalSearch::new(dec, opts)?;
    if let Some(p) = noise {
        p.require_symmetric()?;
        search = search.with_decay(p.gamma_1);
    }
    let mut state = DualRailState::new(dec.n_sites())?;
    let mut intervals = Vec::with_capacity(l_max);
    for _ in 0..l_max {
        let tau = search.best_interval(state.amplitudes());
        step(&mut state, dec, tau, noise)?;
        intervals.push(tau);
    }
    Ok(GreedyRun {
        schedule: Schedule::new(intervals)?,
        result: ProtocolResult::from_state(state),
    })
}

fn step<T: Real>(
    state: &mut DualRailState<T>,
    dec: &SpectralDecomposition<T>,
    tau: T,
    noise: Option<&NoiseParams<T>>,
) -> Result<T> {
    match noise {
        Some(p) => noise::evolve_damped(state, dec, tau, p)?,
        None => state.evolve(dec, tau)?,
    }
    Ok(state.measure())
}

pub fn greedy_optimize<T: Real>(
    dec: &SpectralDecomposition<T>,
    l_max: usize,
    opts: &GreedyOptions<T>,
) -> Result<Schedule<T>> {
    Ok(greedy_run(dec, l_max, opts, None)?.schedule)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReached<T> {
    pub total_time: T,
    pub l_used: usize,
    pub joint_failure: T,
    pub schedule: Schedule<T>,
}

/// Extends the greedy schedule one attempt at a time until
/// `P(l) ≤ p_target`. Fails with [`Error::ThresholdNotReached`] after
/// `l_cap` attempts.
pub fn time_to_failure_threshold<T: Real>(
    dec: &SpectralDecomposition<T>,
    p_target: T,
    l_cap: usize,
    opts: &GreedyOptions<T>,
) -> Result<ThresholdReached<T>> {
    if !(p_target > T::zero() && p_target < T::one()) {
        return Err(Error::InvalidProbability(p_target.as_f64()));
    }
    let search = IntervalSearch::new(dec, opts)?;
    let mut state = DualRailState::new(dec.n_sites())?;
    let mut intervals = Vec::new();
    while intervals.len() < l_cap {
        let tau = search.best_interval(state.amplitudes());
        step(&mut state, dec, tau, None)?;
        intervals.push(tau);
        if state.joint_failure() <= p_target {
            return Ok(ThresholdReached {
                total_time: state.elapsed(),
                l_used: intervals.len(),
                joint_failure: state.joint_failure(),
                schedule: Schedule::new(intervals)?,
            });
        }
    }
    Err(Error::ThresholdNotReached {
        p_target: p_target.as_f64(),
        l_used: intervals.len(),
        reached: state.joint_failure().as_f64(),
        total_time: state.elapsed().as_f64(),
    })
}
