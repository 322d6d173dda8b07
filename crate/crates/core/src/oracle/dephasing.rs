use serde::{Deserialize, Serialize};

use super::full::DUAL_CAP;
use super::{check_cap, sigma_z, site_mask};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rail {
    One,
    Two,
}

/// Diagonal operator family probed at every site `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DephasingOperator {
    /// `S_{z,n} = σz⁽¹⁾_n + σz⁽²⁾_n`.
    Collective,
    /// `σz_n` on one rail only.
    RailLocal(Rail),
}

impl DephasingOperator {
    fn eigenvalue(self, n: usize, site: usize, x1: usize, x2: usize) -> f64 {
        match self {
            Self::Collective => sigma_z(x1, n, site) + sigma_z(x2, n, site),
            Self::RailLocal(Rail::One) => sigma_z(x1, n, site),
            Self::RailLocal(Rail::Two) => sigma_z(x2, n, site),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfsRow {
    pub site: usize,
    /// Expectation on `|m⟩⁽¹⁾|0⟩⁽²⁾`.
    pub rail1_eigenvalue: f64,
    /// Expectation on `|0⟩⁽¹⁾|m⟩⁽²⁾`.
    pub rail2_eigenvalue: f64,
    /// `max ‖Sψ - λψ‖` over the two logical states.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfsReport {
    pub n_sites: usize,
    pub excitation_site: usize,
    pub operator: DephasingOperator,
    pub rows: Vec<DfsRow>,
    pub pass: bool,
}

impl DfsReport {
    pub fn max_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.rail1_eigenvalue - r.rail2_eigenvalue).abs())
            .fold(0.0, f64::max)
    }
}

/// Checks that both logical states of `|s(m)⟩` are eigenstates of the
/// operator at every site with the same eigenvalue, so that any product of
/// `exp(iφ_n S_n)` is a global phase on the code space.
pub fn dephasing_free_check(n_sites: usize, m: usize, operator: DephasingOperator) -> Result<DfsReport> {
    check_cap(n_sites, DUAL_CAP)?;
    if m == 0 || m > n_sites {
        return Err(Error::SiteOutOfRange { site: m, n_sites });
    }
    let n = n_sites;
    let dim = 1usize << n;
    let logical = [(site_mask(n, m), 0usize), (0usize, site_mask(n, m))];
    let mut rows = Vec::with_capacity(n);
    for site in 1..=n {
        let mut eig = [0.0; 2];
        let mut residual = 0.0f64;
        for (slot, &(x1, x2)) in logical.iter().enumerate() {
            // ψ is a single basis vector; apply the diagonal operator
            // to the whole 4^N vector and compare with λψ.
            let psi_index = (x1 << n) | x2;
            let applied: Vec<f64> = (0..dim * dim)
                .map(|i| {
                    let v = if i == psi_index { 1.0 } else { 0.0 };
                    operator.eigenvalue(n, site, i >> n, i & (dim - 1)) * v
                })
                .collect();
            let lambda = applied[psi_index];
            let r = applied
                .iter()
                .enumerate()
                .map(|(i, &a)| (a - if i == psi_index { lambda } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            eig[slot] = lambda;
            residual = residual.max(r);
        }
        rows.push(DfsRow {
            site,
            rail1_eigenvalue: eig[0],
            rail2_eigenvalue: eig[1],
            residual,
        });
    }
    let pass = rows
        .iter()
        .all(|r| r.residual < 1e-12 && (r.rail1_eigenvalue - r.rail2_eigenvalue).abs() < 1e-12);
    Ok(DfsReport {
        n_sites,
        excitation_site: m,
        operator,
        rows,
        pass,
    })
}
