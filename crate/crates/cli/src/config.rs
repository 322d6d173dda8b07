use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use dualrail::analysis::units::rate_ns_to_natural;
use dualrail::{ChainSpec, NoiseParams};

use crate::Cli;

/// Where the measurement intervals come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleSource {
    Greedy,
    Uniform,
    File(PathBuf),
}

impl ScheduleSource {
    pub fn parse(s: &str) -> Self {
        match s {
            "greedy" => Self::Greedy,
            "uniform" => Self::Uniform,
            path => Self::File(PathBuf::from(path)),
        }
    }
}

/// Settings read from `--config`; every field can be overridden by a flag.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub j_kelvin: Option<f64>,
    pub delta: Option<f64>,
    pub b_field: Option<f64>,
    pub schedule: Option<ScheduleSource>,
    pub l_max: Option<usize>,
    /// Symmetric rate in natural units.
    pub gamma: Option<f64>,
    pub gamma_ns: Option<f64>,
    pub gamma1_ns: Option<f64>,
    pub gamma2_ns: Option<f64>,
    pub p_target: Option<f64>,
    pub l_cap: Option<usize>,
    pub out: Option<PathBuf>,
    pub fig: Option<u32>,
    pub t_max: Option<f64>,
    pub t_step: Option<f64>,
    pub n_values: Option<Vec<usize>>,
    pub p_values: Option<Vec<f64>>,
    pub j_over_gamma: Option<Vec<f64>>,
    pub window: Option<(f64, f64)>,
    pub grid_step: Option<f64>,
}

/// Marks errors that come from bad user input.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
    }

    /// Applies command-line flags on top of the file settings.
    pub fn merge(mut self, cli: &Cli) -> Self {
        macro_rules! over {
            ($($field:ident),*) => {
                $(if let Some(v) = cli.$field.clone() { self.$field = Some(v); })*
            };
        }
        over!(n, j_kelvin, delta, b_field, l_max, gamma, gamma_ns, gamma1_ns, gamma2_ns, p_target, l_cap, out, fig, t_max, t_step, grid_step);
        if let Some(s) = &cli.schedule {
            self.schedule = Some(ScheduleSource::parse(s));
        }
        if !cli.n_values.is_empty() {
            self.n_values = Some(cli.n_values.clone());
        }
        if !cli.p_values.is_empty() {
            self.p_values = Some(cli.p_values.clone());
        }
        if !cli.j_over_gamma.is_empty() {
            self.j_over_gamma = Some(cli.j_over_gamma.clone());
        }
        if let [lo, hi] = cli.window[..] {
            self.window = Some((lo, hi));
        }
        self
    }

    pub fn n_sites(&self) -> anyhow::Result<usize> {
        self.n.ok_or_else(|| invalid("--n is required"))
    }

    pub fn chain(&self) -> anyhow::Result<ChainSpec> {
        Ok(ChainSpec::new(
            self.n_sites()?,
            1.0,
            self.delta.unwrap_or(1.0),
            self.b_field.unwrap_or(0.0),
        )?)
    }

    pub fn greedy(&self) -> anyhow::Result<dualrail::GreedyOptions> {
        let mut g = dualrail::GreedyOptions {
            window: self.window,
            ..Default::default()
        };
        if let Some(step) = self.grid_step {
            g.grid_step = step;
        }
        Ok(g)
    }

    fn physical_rate(&self, rate: f64, flag: &str) -> anyhow::Result<f64> {
        let j = self
            .j_kelvin
            .ok_or_else(|| invalid(format!("{flag} needs --j-kelvin to convert to natural units")))?;
        Ok(rate_ns_to_natural(rate, j)?)
    }

    /// Damping in natural units, if any was requested.
    pub fn noise(&self) -> anyhow::Result<Option<NoiseParams>> {
        let sources = [
            self.gamma.is_some(),
            self.gamma_ns.is_some(),
            self.gamma1_ns.is_some() || self.gamma2_ns.is_some(),
        ];
        if sources.iter().filter(|s| **s).count() > 1 {
            bail!(invalid("give only one of --gamma, --gamma-ns, or --gamma1-ns/--gamma2-ns"));
        }
        if let Some(g) = self.gamma {
            return Ok(Some(NoiseParams::symmetric(g)?));
        }
        if let Some(g) = self.gamma_ns {
            return Ok(Some(NoiseParams::symmetric(self.physical_rate(g, "--gamma-ns")?)?));
        }
        match (self.gamma1_ns, self.gamma2_ns) {
            (None, None) => Ok(None),
            (Some(g1), Some(g2)) => Ok(Some(NoiseParams::new(
                self.physical_rate(g1, "--gamma1-ns")?,
                self.physical_rate(g2, "--gamma2-ns")?,
            )?)),
            _ => bail!(invalid("--gamma1-ns and --gamma2-ns must be given together")),
        }
    }
}
