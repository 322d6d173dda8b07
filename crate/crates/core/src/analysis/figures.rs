use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_time_samples, time_samples};
use super::units::gamma_to_natural;
use super::TIME_FIT_PREFACTOR;
use crate::chain::{ChainSpec, SpectralDecomposition};
use crate::dataset::{Dataset, Value};
use crate::noise::{p_infinity_estimate, p_infinity_exact, NoiseParams, PlateauOptions};
use crate::scheduler::{greedy_run, GreedyOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FigureId {
    /// `P(l)` against `l` for the greedy schedule.
    JointFailure,
    /// Time to reach a failure target against `N`.
    TransferTime,
    /// Damped plateau `P∞` against `N`.
    DampedPlateau,
}

impl FigureId {
    pub fn number(self) -> u32 {
        match self {
            Self::JointFailure => 2,
            Self::TransferTime => 3,
            Self::DampedPlateau => 4,
        }
    }
}

impl TryFrom<u32> for FigureId {
    type Error = Error;

    fn try_from(id: u32) -> Result<Self> {
        match id {
            2 => Ok(Self::JointFailure),
            3 => Ok(Self::TransferTime),
            4 => Ok(Self::DampedPlateau),
            other => Err(Error::UnknownFigure(other)),
        }
    }
}

/// Sweep parameters; `None` picks the per-figure default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FigureParams {
    pub n_values: Option<Vec<usize>>,
    /// Measurements per chain for the `P(l)` curves.
    pub l_max: Option<usize>,
    pub p_values: Option<Vec<f64>>,
    /// `J/Γ` in K·ns; the noiseless row is always added.
    pub j_over_gamma: Option<Vec<f64>>,
    pub l_cap: Option<usize>,
    #[serde(default)]
    pub greedy: GreedyOptions<f64>,
}

pub const DEFAULT_FIG2_N: [usize; 4] = [10, 20, 50, 100];
pub const DEFAULT_FIG2_L: usize = 50;
pub const DEFAULT_FIG3_N: [usize; 5] = [10, 15, 20, 30, 40];
pub const DEFAULT_FIG3_P: [f64; 3] = [0.1, 0.01, 0.001];
pub const DEFAULT_FIG4_N: [usize; 7] = [10, 15, 20, 25, 30, 35, 40];
pub const DEFAULT_FIG4_J_OVER_GAMMA: [f64; 4] = [10.0, 20.0, 50.0, 100.0];
const ESTIMATE_TERMS: usize = 10_000;

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn decomposition(n: usize) -> Result<SpectralDecomposition<f64>> {
    SpectralDecomposition::from_spec(&ChainSpec::heisenberg(n))
}

fn describe_greedy(ds: &mut Dataset, g: &GreedyOptions<f64>) {
    match g.window {
        Some((lo, hi)) => ds.meta("window", format!("{lo};{hi}")),
        None => ds.meta("window", "0.1..3 transit times (N/40..3N/4)"),
    };
    ds.meta("grid_step", g.grid_step);
    ds.meta("refine_tol", g.refine_tol);
}

/// Regenerates the dataset behind one of the figures. Sweeps run in
/// parallel; rows are merged in a fixed order so the output is identical for
/// any thread count.
pub fn reproduce_figure(id: FigureId, params: &FigureParams) -> Result<Dataset> {
    match id {
        FigureId::JointFailure => joint_failure(params),
        FigureId::TransferTime => transfer_time(params),
        FigureId::DampedPlateau => damped_plateau(params),
    }
}

fn joint_failure(p: &FigureParams) -> Result<Dataset> {
    let ns = p.n_values.clone().unwrap_or_else(|| DEFAULT_FIG2_N.to_vec());
    let l_max = p.l_max.unwrap_or(DEFAULT_FIG2_L);
    let curves = ns
        .par_iter()
        .map(|&n| Ok(greedy_run(&decomposition(n)?, l_max, &p.greedy, None)?.result.joint_failures()))
        .collect::<Result<Vec<_>>>()?;
    let mut ds = Dataset::new(["N", "l", "P_l"]);
    ds.meta("figure", 2)
        .meta("schedule", "greedy")
        .meta("n_values", join(&ns))
        .meta("l_max", l_max);
    describe_greedy(&mut ds, &p.greedy);
    for (&n, curve) in ns.iter().zip(curves) {
        for (l, pl) in curve.into_iter().enumerate() {
            ds.push([Value::Int(n as i64), Value::Int(l as i64 + 1), Value::Float(pl)]);
        }
    }
    Ok(ds)
}

fn transfer_time(p: &FigureParams) -> Result<Dataset> {
    let ns = p.n_values.clone().unwrap_or_else(|| DEFAULT_FIG3_N.to_vec());
    let ps = p.p_values.clone().unwrap_or_else(|| DEFAULT_FIG3_P.to_vec());
    let l_cap = p.l_cap.unwrap_or(100_000);
    let samples = time_samples(&ns, &ps, &p.greedy, l_cap)?;
    let fit = fit_time_samples(&samples)?;
    let mut ds = Dataset::new(["N", "P", "t_natural", "l_used", "t_fit", "t_reference"]);
    ds.meta("figure", 3)
        .meta("schedule", "greedy")
        .meta("n_values", join(&ns))
        .meta("p_values", join(&ps))
        .meta("fit_prefactor", format!("{:.16e}", fit.prefactor))
        .meta("fit_exponent", format!("{:.16e}", fit.exponent))
        .meta("fit_residual", format!("{:.16e}", fit.residual))
        .meta("reference_law", format!("{TIME_FIT_PREFACTOR}*N^(5/3)*|ln P|"));
    describe_greedy(&mut ds, &p.greedy);
    for s in &samples {
        let n = s.n_sites as f64;
        let lnp = s.p_target.ln().abs();
        ds.push([
            Value::Int(s.n_sites as i64),
            Value::Float(s.p_target),
            Value::Float(s.time),
            Value::Int(s.l_used as i64),
            Value::Float(fit.predict(n) * lnp),
            Value::Float(super::transfer_time_law(TIME_FIT_PREFACTOR, s.n_sites, s.p_target)),
        ]);
    }
    Ok(ds)
}

fn damped_plateau(p: &FigureParams) -> Result<Dataset> {
    let ns = p.n_values.clone().unwrap_or_else(|| DEFAULT_FIG4_N.to_vec());
    let ratios = p
        .j_over_gamma
        .clone()
        .unwrap_or_else(|| DEFAULT_FIG4_J_OVER_GAMMA.to_vec());
    let mut gammas: Vec<(f64, f64)> = ratios
        .iter()
        .map(|&r| Ok((r, gamma_to_natural(r)?)))
        .collect::<Result<_>>()?;
    gammas.push((f64::INFINITY, 0.0));
    let opts = PlateauOptions {
        greedy: p.greedy,
        l_cap: p.l_cap.unwrap_or(PlateauOptions::<f64>::default().l_cap),
        ..PlateauOptions::default()
    };
    let grid: Vec<(usize, f64, f64)> = gammas
        .iter()
        .flat_map(|&(r, g)| ns.iter().map(move |&n| (n, r, g)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(n, r, g)| {
            let plateau = p_infinity_exact(&decomposition(n)?, &NoiseParams::symmetric(g)?, &opts)?;
            Ok([
                Value::Int(n as i64),
                Value::Float(r),
                Value::Float(g),
                Value::Float(plateau.p_infinity),
                Value::Float(p_infinity_estimate(n, g, ESTIMATE_TERMS)),
                Value::Int(plateau.measurements as i64),
                Value::Float(plateau.total_time),
                Value::Int(plateau.converged as i64),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ds = Dataset::new([
        "N",
        "J_over_Gamma",
        "gamma_natural",
        "P_inf_exact",
        "P_inf_estimate",
        "measurements",
        "t_natural",
        "converged",
    ]);
    ds.meta("figure", 4)
        .meta("schedule", "greedy with damping")
        .meta("n_values", join(&ns))
        .meta("j_over_gamma_k_ns", join(&ratios))
        .meta("stop_tol", opts.stop_tol)
        .meta("l_cap", opts.l_cap)
        .meta("estimate_terms", ESTIMATE_TERMS);
    describe_greedy(&mut ds, &p.greedy);
    for row in rows {
        ds.push(row);
    }
    Ok(ds)
}
