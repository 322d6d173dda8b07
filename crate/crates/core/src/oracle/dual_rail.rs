use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::full::{FullChain, DUAL_CAP};
use super::{check_cap, sigma_z, site_mask, LogicalQubit};
use crate::chain::ChainSpec;
use crate::noise::NoiseParams;
use crate::scheduler::Schedule;
use crate::Result;

/// Diagonal phase noise applied to both rails after every evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum Dephasing {
    /// `Π_n exp(iφ_n (σz⁽¹⁾_n + σz⁽²⁾_n))`.
    Collective(Vec<f64>),
    /// `Π_n exp(iφ_n σz⁽¹⁾_n)`, acting on rail 1 only.
    Rail1Only(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullStep {
    pub index: usize,
    pub absolute_time: f64,
    /// Probability of the outcome 1 given all earlier outcomes were 0 and
    /// no jump occurred.
    pub conditional_success: f64,
    /// Joint probability that this is the first success.
    pub step_success: f64,
    /// Probability that no attempt so far succeeded; a jump counts as failure.
    pub joint_failure: f64,
    /// Bob's rail-1 qubit on the success branch (absent when that branch
    /// has zero weight).
    pub decoded: Option<LogicalQubit<f64>>,
    pub fidelity: Option<f64>,
    /// Weight of the success branch outside `span{|0⟩, |N⟩} ⊗ |N⟩`.
    pub success_leakage: f64,
    /// Largest amplitude outside the one-excitation sector before decoding.
    pub sector_leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullProtocolResult {
    pub n_sites: usize,
    pub input: LogicalQubit<f64>,
    pub steps: Vec<FullStep>,
    /// `max |amplitude|` on rail 1 outside `|0…0⟩` for all times, relevant
    /// for the `β = 0` input.
    pub max_rail1_excitation: f64,
}

impl FullProtocolResult {
    pub fn joint_failures(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.joint_failure).collect()
    }

    pub fn step_successes(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.step_success).collect()
    }
}

struct TwoRails {
    n: usize,
    amps: Vec<Complex64>,
}

impl TwoRails {
    fn dim(&self) -> usize {
        1 << self.n
    }

    fn idx(&self, x1: usize, x2: usize) -> usize {
        (x1 << self.n) | x2
    }

    /// `(U ⊗ U) ψ`.
    fn apply_local(&mut self, u: &DMatrix<Complex64>) {
        let dim = self.dim();
        let zero = Complex64::new(0.0, 0.0);
        let mut tmp = vec![zero; dim];
        // rail 2
        for x1 in 0..dim {
            let row = &mut self.amps[x1 * dim..(x1 + 1) * dim];
            for (r, t) in tmp.iter_mut().enumerate() {
                *t = (0..dim).map(|s| u[(r, s)] * row[s]).sum();
            }
            row.copy_from_slice(&tmp);
        }
        // rail 1
        for x2 in 0..dim {
            for (r, t) in tmp.iter_mut().enumerate() {
                *t = (0..dim).map(|s| u[(r, s)] * self.amps[s * dim + x2]).sum();
            }
            for (x1, t) in tmp.iter().enumerate() {
                self.amps[x1 * dim + x2] = *t;
            }
        }
    }

    fn map_diagonal(&mut self, f: impl Fn(usize, usize) -> Complex64) {
        let dim = self.dim();
        for x1 in 0..dim {
            for x2 in 0..dim {
                self.amps[x1 * dim + x2] *= f(x1, x2);
            }
        }
    }

    /// NOT on rail-2 `target` when rail-1 `control` equals `control_value`.
    fn controlled_not(&mut self, control: usize, control_value: bool, target: usize) {
        let dim = self.dim();
        let (cm, tm) = (site_mask(self.n, control), site_mask(self.n, target));
        for x1 in 0..dim {
            if ((x1 & cm) != 0) != control_value {
                continue;
            }
            for x2 in 0..dim {
                if x2 & tm == 0 {
                    let (i, j) = (self.idx(x1, x2), self.idx(x1, x2 | tm));
                    self.amps.swap(i, j);
                }
            }
        }
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Full two-chain simulation of the circuit: prepare `|ψ⟩₁⁽¹⁾|0⟩⁽²⁾`,
/// zero-controlled NOT encode, then per interval evolve, (damp, dephase),
/// CNOT decode at site `N`, and measure rail 2 at site `N`. The failure
/// branch is renormalized after every round.
pub fn dual_rail_protocol_full(
    spec: &ChainSpec<f64>,
    qubit: &LogicalQubit<f64>,
    schedule: &Schedule<f64>,
    noise: Option<&NoiseParams<f64>>,
    dephasing: Option<&Dephasing>,
) -> Result<FullProtocolResult> {
    spec.validate()?;
    let qubit = LogicalQubit::new(qubit.alpha, qubit.beta)?;
    check_cap(spec.n_sites, DUAL_CAP)?;
    let n = spec.n_sites;
    let chain = FullChain::new(spec)?;
    let dim = 1usize << n;
    let zero = Complex64::new(0.0, 0.0);

    let mut rails = TwoRails {
        n,
        amps: vec![zero; dim * dim],
    };
    let (i0, i1) = (rails.idx(0, 0), rails.idx(site_mask(n, 1), 0));
    rails.amps[i0] = qubit.alpha;
    rails.amps[i1] = qubit.beta;
    rails.controlled_not(1, false, 1);

    let bob = site_mask(n, n);
    let mut alive = 1.0;
    let mut total_success = 0.0;
    let mut elapsed = 0.0;
    let mut steps = Vec::with_capacity(schedule.len());
    let mut max_rail1 = 0.0f64;

    for &tau in schedule.intervals() {
        elapsed += tau;
        rails.apply_local(&chain.propagator(tau));
        if let Some(p) = noise {
            let (g1, g2) = (p.gamma_1, p.gamma_2);
            rails.map_diagonal(|x1, x2| {
                let rate = g1 * x1.count_ones() as f64 + g2 * x2.count_ones() as f64;
                Complex64::new((-rate * tau).exp(), 0.0)
            });
        }
        match dephasing {
            Some(Dephasing::Collective(phi)) => rails.map_diagonal(|x1, x2| {
                let angle: f64 = (1..=n).map(|m| phi[m - 1] * (sigma_z(x1, n, m) + sigma_z(x2, n, m))).sum();
                Complex64::from_polar(1.0, angle)
            }),
            Some(Dephasing::Rail1Only(phi)) => rails.map_diagonal(|x1, _| {
                let angle: f64 = (1..=n).map(|m| phi[m - 1] * sigma_z(x1, n, m)).sum();
                Complex64::from_polar(1.0, angle)
            }),
            None => {}
        }

        let mut sector_leakage = 0.0f64;
        for x1 in 0..dim {
            for x2 in 0..dim {
                let a = rails.amps[rails.idx(x1, x2)].norm();
                if x1.count_ones() + x2.count_ones() != 1 {
                    sector_leakage = sector_leakage.max(a);
                }
                if x1 != 0 {
                    max_rail1 = max_rail1.max(a);
                }
            }
        }

        rails.controlled_not(n, true, n);

        let mut p_success = 0.0;
        for x1 in 0..dim {
            for x2 in (0..dim).filter(|x2| x2 & bob != 0) {
                p_success += rails.amps[rails.idx(x1, x2)].norm_sqr();
            }
        }
        let a_out = rails.amps[rails.idx(0, bob)];
        let b_out = rails.amps[rails.idx(bob, bob)];
        let code_weight = a_out.norm_sqr() + b_out.norm_sqr();
        let decoded = LogicalQubit::normalized(a_out, b_out).ok();
        let fidelity = decoded.map(|d| qubit.fidelity(&d));

        let step_success = alive * p_success;
        total_success += step_success;

        for x1 in 0..dim {
            for x2 in (0..dim).filter(|x2| x2 & bob != 0) {
                let i = rails.idx(x1, x2);
                rails.amps[i] = zero;
            }
        }
        let p_fail_no_jump = rails.norm_sqr();
        alive *= p_fail_no_jump;
        if p_fail_no_jump > 0.0 {
            let s = p_fail_no_jump.sqrt();
            rails.amps.iter_mut().for_each(|a| *a /= s);
        }

        steps.push(FullStep {
            index: steps.len() + 1,
            absolute_time: elapsed,
            conditional_success: p_success,
            step_success,
            joint_failure: 1.0 - total_success,
            decoded,
            fidelity,
            success_leakage: p_success - code_weight,
            sector_leakage,
        });
    }

    Ok(FullProtocolResult {
        n_sites: n,
        input: qubit,
        steps,
        max_rail1_excitation: max_rail1,
    })
}
