//! Amplitude damping in the quantum-jump picture.
//!
//! Conditioned on no jump, symmetric damping at rate `Γ` multiplies the
//! single-excitation part of the state by `e^{-Γt}`; the no-jump Hamiltonian
//! commutes with the chain Hamiltonian inside the sector, so the conditional
//! evolution is exactly `e^{-Γτ}·F(τ)`. A jump sends both rails to the global
//! ground state, which never triggers a success, so it is bookkept only as
//! lost probability.
//!
//! With different rates on the two rails the spatial vector is still shared;
//! the logical components pick up separate scalar factors
//! `a(t) = e^{-Γ₂t}` (rail 2, amplitude `α`) and `b(t) = e^{-Γ₁t}` (rail 1,
//! amplitude `β`).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::chain::SpectralDecomposition;
use crate::oracle::LogicalQubit;
use crate::protocol::DualRailState;
use crate::scheduler::{GreedyOptions, IntervalSearch, Schedule};
use crate::{Error, Real, Result};

/// Damping rates in natural units (`J/ħ`). `gamma_1` acts on rail 1, the
/// rail that carries `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams<T> {
    pub gamma_1: T,
    pub gamma_2: T,
}

impl<T: Real> NoiseParams<T> {
    pub fn symmetric(gamma: T) -> Result<Self> {
        Self::new(gamma, gamma)
    }

    pub fn new(gamma_1: T, gamma_2: T) -> Result<Self> {
        let ok = |g: T| g.is_finite() && g >= T::zero();
        if !(ok(gamma_1) && ok(gamma_2)) {
            return Err(Error::InvalidRate);
        }
        Ok(Self { gamma_1, gamma_2 })
    }

    pub fn is_symmetric(&self) -> bool {
        self.gamma_1 == self.gamma_2
    }

    pub(crate) fn require_symmetric(&self) -> Result<T> {
        if !self.is_symmetric() {
            return Err(Error::AsymmetricNoise {
                gamma_1: self.gamma_1.as_f64(),
                gamma_2: self.gamma_2.as_f64(),
            });
        }
        Ok(self.gamma_1)
    }

    /// `1/|Γ₁ - Γ₂|`: the symmetric-part approximation holds for times
    /// well below this. Infinite for symmetric damping.
    pub fn asymmetry_time(&self) -> T {
        let d = (self.gamma_1 - self.gamma_2).abs();
        if d == T::zero() {
            T::infinity()
        } else {
            d.recip()
        }
    }
}

/// `c ← e^{-Γτ}·F(τ)·c`; the removed norm is added to the state's loss.
pub fn evolve_damped<T: Real>(
    state: &mut DualRailState<T>,
    dec: &SpectralDecomposition<T>,
    tau: T,
    noise: &NoiseParams<T>,
) -> Result<()> {
    let gamma = noise.require_symmetric()?;
    let before = state.norm_sqr();
    state.evolve(dec, tau)?;
    if gamma > T::zero() {
        let factor = (-gamma * tau).exp();
        state.amplitudes_mut().iter_mut().for_each(|c| *c = c.scale(factor));
        state.add_loss(before * (T::one() - factor * factor));
    }
    Ok(())
}

/// Heuristic limit `Π_{l≥1} (1 - 1.35·N^{-2/3}·e^{-2ΓN·l})` truncated after
/// `l_terms` factors. Each attempt is assumed to take one uniform interval
/// `N`.
pub fn p_infinity_estimate<T: Real>(n_sites: usize, gamma: T, l_terms: usize) -> T {
    if gamma <= T::zero() {
        return T::zero();
    }
    let n = T::from_usize_lossy(n_sites);
    let q = T::lit(1.35) * n.powf(T::lit(-2.0 / 3.0));
    let ratio = (-T::lit(2.0) * gamma * n).exp();
    let mut product = T::one();
    let mut damping = T::one();
    for _ in 0..l_terms {
        damping *= ratio;
        product *= T::one() - q * damping;
    }
    product
}

/// Relative error bound of [`p_infinity_estimate`] from dropping the factors
/// beyond `l_terms`: the tail satisfies
/// `ln Π_{l>L} ≥ -q·r^{L+1} / ((1-r)(1-q))` with `r = e^{-2ΓN}`.
pub fn p_infinity_truncation_bound<T: Real>(n_sites: usize, gamma: T, l_terms: usize) -> T {
    if gamma <= T::zero() {
        return T::zero();
    }
    let n = T::from_usize_lossy(n_sites);
    let q = T::lit(1.35) * n.powf(T::lit(-2.0 / 3.0));
    if q >= T::one() {
        return T::one();
    }
    let r = (-T::lit(2.0) * gamma * n).exp();
    let tail = q * r.powi(l_terms as i32 + 1) / ((T::one() - r) * (T::one() - q));
    T::one() - (-tail).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauOptions<T> {
    pub greedy: GreedyOptions<T>,
    /// Stop once an attempt succeeds with probability below this.
    pub stop_tol: T,
    pub l_cap: usize,
}

impl<T: Real> Default for PlateauOptions<T> {
    fn default() -> Self {
        Self {
            greedy: GreedyOptions::default(),
            stop_tol: T::lit(1e-12),
            l_cap: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau<T> {
    pub p_infinity: T,
    pub measurements: usize,
    pub total_time: T,
    pub total_success: T,
    pub loss: T,
    /// False if `l_cap` was hit before the per-attempt success fell below
    /// `stop_tol`.
    pub converged: bool,
}

/// Runs the damped protocol with greedy intervals until attempts stop
/// paying off, and returns the plateau of `P(l)`.
pub fn p_infinity_exact<T: Real>(
    dec: &SpectralDecomposition<T>,
    noise: &NoiseParams<T>,
    opts: &PlateauOptions<T>,
) -> Result<Plateau<T>> {
    let gamma = noise.require_symmetric()?;
    let search = IntervalSearch::new(dec, &opts.greedy)?.with_decay(gamma);
    let mut state = DualRailState::new(dec.n_sites())?;
    let mut converged = false;
    while state.records().len() < opts.l_cap {
        let tau = search.best_interval(state.amplitudes());
        evolve_damped(&mut state, dec, tau, noise)?;
        if state.measure() < opts.stop_tol {
            converged = true;
            break;
        }
    }
    Ok(Plateau {
        p_infinity: state.joint_failure(),
        measurements: state.records().len(),
        total_time: state.elapsed(),
        total_success: state.total_success(),
        loss: state.loss(),
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricStep<T> {
    pub index: usize,
    pub absolute_time: T,
    /// Joint success probability without damping, `|c_N|²`.
    pub undamped_success: T,
    /// Joint success probability for the run's input qubit.
    pub success: T,
    /// Conditional fidelity of Bob's decoded qubit with the input.
    pub fidelity: T,
    /// Same, for `α = β = 1/√2`.
    pub fidelity_equal_superposition: T,
    /// Minimum over the Bloch sphere, `4ab/(a+b)²`.
    pub fidelity_worst_case: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricRunResult<T> {
    pub noise: NoiseParams<T>,
    pub input: LogicalQubit<T>,
    pub steps: Vec<AsymmetricStep<T>>,
    /// Total success probability for the input qubit.
    pub total_success: T,
    /// Extremes of the total success probability over all inputs
    /// (excitation entirely on the more / less damped rail).
    pub total_success_min: T,
    pub total_success_max: T,
}

impl<T: Real> AsymmetricRunResult<T> {
    pub fn min_fidelity_worst_case(&self) -> T {
        self.steps
            .iter()
            .map(|s| s.fidelity_worst_case)
            .fold(T::one(), T::min)
    }
}

/// Worst-case conditional fidelity over inputs for rail factors `a`, `b`.
pub fn worst_case_fidelity<T: Real>(a: T, b: T) -> T {
    if a + b == T::zero() {
        return T::one();
    }
    T::lit(4.0) * a * b / ((a + b) * (a + b))
}

/// Fidelity of `(α a, β b)/norm` with `(α, β)`.
pub fn damped_fidelity<T: Real>(input: &LogicalQubit<T>, a: T, b: T) -> T {
    let pa = input.alpha.norm_sqr();
    let pb = input.beta.norm_sqr();
    let denom = pa * a * a + pb * b * b;
    if denom == T::zero() {
        return T::one();
    }
    let overlap = pa * a + pb * b;
    overlap * overlap / denom
}

/// Runs `schedule` with rail-dependent damping. `input` defaults to the
/// equal superposition.
pub fn asymmetric_run<T: Real>(
    dec: &SpectralDecomposition<T>,
    noise: &NoiseParams<T>,
    schedule: &Schedule<T>,
    input: Option<LogicalQubit<T>>,
) -> Result<AsymmetricRunResult<T>> {
    let input = input.unwrap_or_else(LogicalQubit::equal_superposition);
    let equal = LogicalQubit::equal_superposition();
    let mut state = DualRailState::new(dec.n_sites())?;
    let (pa, pb) = (input.alpha.norm_sqr(), input.beta.norm_sqr());
    let mut steps = Vec::with_capacity(schedule.len());
    let (mut total, mut total_min, mut total_max) = (T::zero(), T::zero(), T::zero());
    for &tau in schedule.intervals() {
        state.evolve(dec, tau)?;
        let undamped = state.measure();
        let t = state.elapsed();
        let a = (-noise.gamma_2 * t).exp();
        let b = (-noise.gamma_1 * t).exp();
        let success = (pa * a * a + pb * b * b) * undamped;
        total += success;
        total_min += a.min(b).powi(2) * undamped;
        total_max += a.max(b).powi(2) * undamped;
        steps.push(AsymmetricStep {
            index: steps.len() + 1,
            absolute_time: t,
            undamped_success: undamped,
            success,
            fidelity: damped_fidelity(&input, a, b),
            fidelity_equal_superposition: damped_fidelity(&equal, a, b),
            fidelity_worst_case: worst_case_fidelity(a, b),
        });
    }
    Ok(AsymmetricRunResult {
        noise: *noise,
        input,
        steps,
        total_success: total,
        total_success_min: total_min,
        total_success_max: total_max,
    })
}

/// Conditional decoded qubit `∝ (α a, β b)` for rail factors `a`, `b`.
pub fn damped_output<T: Real>(input: &LogicalQubit<T>, a: T, b: T) -> (Complex<T>, Complex<T>) {
    let alpha = input.alpha.scale(a);
    let beta = input.beta.scale(b);
    let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
    (alpha.unscale(norm), beta.unscale(norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainSpec;
    use crate::protocol::run_schedule;
    use crate::scheduler::{greedy_optimize, uniform_schedule};

    fn dec(n: usize) -> SpectralDecomposition<f64> {
        SpectralDecomposition::from_spec(&ChainSpec::heisenberg(n)).unwrap()
    }

    #[test]
    fn rates_validated() {
        assert!(NoiseParams::symmetric(-0.1).is_err());
        assert!(NoiseParams::new(0.1, f64::NAN).is_err());
        assert!(NoiseParams::symmetric(0.0).unwrap().is_symmetric());
        assert!((NoiseParams::<f64>::new(0.2, 0.1).unwrap().asymmetry_time() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_matches_plain_evolution() {
        let d = dec(6);
        let mut a = DualRailState::new(6).unwrap();
        let mut b = a.clone();
        a.evolve(&d, 2.5).unwrap();
        evolve_damped(&mut b, &d, 2.5, &NoiseParams::symmetric(0.0).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn norm_decays_and_loss_accounts() {
        let d = dec(6);
        let g = 0.07;
        let noise = NoiseParams::symmetric(g).unwrap();
        let mut s = DualRailState::new(6).unwrap();
        evolve_damped(&mut s, &d, 3.0, &noise).unwrap();
        assert!((s.norm_sqr() - (-2.0 * g * 3.0f64).exp()).abs() < 1e-12);
        for tau in [1.0, 2.0, 0.5] {
            s.measure();
            evolve_damped(&mut s, &d, tau, &noise).unwrap();
            assert!((s.total_success() + s.norm_sqr() + s.loss() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_rejected_in_symmetric_paths() {
        let d = dec(4);
        let noise = NoiseParams::new(0.1, 0.2).unwrap();
        let mut s = DualRailState::new(4).unwrap();
        assert!(matches!(evolve_damped(&mut s, &d, 1.0, &noise), Err(Error::AsymmetricNoise { .. })));
        let sched = uniform_schedule(4, 2).unwrap();
        assert!(run_schedule(&d, &sched, Some(&noise)).is_err());
    }

    #[test]
    fn damped_success_factorizes() {
        let d = dec(9);
        let sched = greedy_optimize(&d, 12, &GreedyOptions::default()).unwrap();
        let g = 0.01;
        let plain = run_schedule(&d, &sched, None).unwrap();
        let damped = run_schedule(&d, &sched, Some(&NoiseParams::symmetric(g).unwrap())).unwrap();
        for (p, q) in plain.records.iter().zip(&damped.records) {
            let want = (-2.0 * g * p.absolute_time).exp() * p.step_success;
            assert!((q.step_success - want).abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_limits() {
        assert_eq!(p_infinity_estimate(20, 0.0, 100), 0.0);
        let g = 1e-3;
        let mut prev = 0.0;
        for n in [5, 10, 20, 40, 80, 160, 320] {
            let p = p_infinity_estimate(n, g, 10_000);
            assert!(p > prev && p < 1.0);
            prev = p;
        }
        assert!(p_infinity_truncation_bound(40, 1.5e-4, 10_000) < 1e-12);
    }

    #[test]
    fn plateau_noiseless_converges() {
        let p = p_infinity_exact(&dec(12), &NoiseParams::symmetric(0.0).unwrap(), &PlateauOptions::default())
            .unwrap();
        assert!(p.converged);
        assert!(p.p_infinity < 1e-3);
    }

    #[test]
    fn plateau_grows_with_rate() {
        let d = dec(10);
        let mut prev = -1.0;
        for g in [1e-3, 5e-3, 2e-2] {
            let p = p_infinity_exact(&d, &NoiseParams::symmetric(g).unwrap(), &PlateauOptions::default())
                .unwrap();
            assert!(p.p_infinity > prev && p.p_infinity <= 1.0);
            assert!((p.p_infinity - (1.0 - p.total_success)).abs() < 1e-12);
            prev = p.p_infinity;
        }
    }

    #[test]
    fn asymmetric_reduces_to_symmetric() {
        let d = dec(8);
        let sched = greedy_optimize(&d, 8, &GreedyOptions::default()).unwrap();
        let g = 0.02;
        let sym = run_schedule(&d, &sched, Some(&NoiseParams::symmetric(g).unwrap())).unwrap();
        let asym = asymmetric_run(&d, &NoiseParams::new(g, g).unwrap(), &sched, None).unwrap();
        assert!((sym.total_success - asym.total_success).abs() < 1e-12);
        assert!(asym
            .steps
            .iter()
            .all(|s| (s.fidelity - 1.0).abs() < 1e-15 && (s.fidelity_worst_case - 1.0).abs() < 1e-15));
    }

    #[test]
    fn asymmetric_single_component_input() {
        let d = dec(8);
        let sched = greedy_optimize(&d, 8, &GreedyOptions::default()).unwrap();
        let noise = NoiseParams::new(0.05, 0.01).unwrap();
        let zero = LogicalQubit::new(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)).unwrap();
        let r = asymmetric_run(&d, &noise, &sched, Some(zero)).unwrap();
        assert!(r.steps.iter().all(|s| (s.fidelity - 1.0).abs() < 1e-15));
        assert!(r.total_success_min <= r.total_success && r.total_success <= r.total_success_max);
        let mut prev = 1.0;
        for s in &r.steps {
            assert!(s.fidelity_worst_case <= prev + 1e-15);
            assert!(s.fidelity_worst_case <= s.fidelity_equal_superposition);
            prev = s.fidelity_worst_case;
        }
    }

    #[test]
    fn worst_case_is_bloch_minimum() {
        let (a, b) = (0.9, 0.6);
        let wc = worst_case_fidelity(a, b);
        for i in 0..=200 {
            let p: f64 = i as f64 / 200.0;
            let q = LogicalQubit::new(Complex::new(p.sqrt(), 0.0), Complex::new(0.0, (1.0 - p).sqrt())).unwrap();
            assert!(damped_fidelity(&q, a, b) >= wc - 1e-14);
        }
        let eq = LogicalQubit::equal_superposition();
        assert!((damped_fidelity(&eq, a, b) - (a + b).powi(2) / (2.0 * (a * a + b * b))).abs() < 1e-15);
        assert_eq!(worst_case_fidelity(0.7, 0.7), 1.0);
    }
}
