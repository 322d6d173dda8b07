use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{check_cap, sigma_z, site_mask};
use crate::chain::ChainSpec;
use crate::{Error, Result};

/// Largest single chain the oracle will build (`2^8` states).
pub const SINGLE_CAP: usize = 8;
/// Largest chain for two-rail simulations (`4^6` states).
pub const DUAL_CAP: usize = 6;

/// Dense XXZ Hamiltonian of one chain, shifted so `|0…0⟩` has energy 0.
pub fn full_hamiltonian(spec: &ChainSpec<f64>) -> Result<DMatrix<f64>> {
    spec.validate()?;
    check_cap(spec.n_sites, SINGLE_CAP)?;
    Ok(build(spec))
}

fn build(spec: &ChainSpec<f64>) -> DMatrix<f64> {
    let n = spec.n_sites;
    let dim = 1usize << n;
    let (j, delta, b) = (spec.coupling, spec.anisotropy, spec.field);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for x in 0..dim {
        let mut diag = b * (1..=n).map(|site| sigma_z(x, n, site)).sum::<f64>();
        for site in 1..n {
            diag -= j * delta * sigma_z(x, n, site) * sigma_z(x, n, site + 1);
            let pair = site_mask(n, site) | site_mask(n, site + 1);
            let bits = x & pair;
            if bits != 0 && bits != pair {
                // σxσx + σyσy = 2(σ⁺σ⁻ + σ⁻σ⁺)
                h[(x ^ pair, x)] += -2.0 * j;
            }
        }
        h[(x, x)] += diag;
    }
    let ground = -j * delta * (n as f64 - 1.0) - b * n as f64;
    for x in 0..dim {
        h[(x, x)] -= ground;
    }
    h
}

/// Eigendecomposition of one full chain, used to apply `e^{-iHt}`.
#[derive(Debug, Clone)]
pub struct FullChain {
    n_sites: usize,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl FullChain {
    pub fn new(spec: &ChainSpec<f64>) -> Result<Self> {
        let h = full_hamiltonian(spec)?;
        Ok(Self::from_matrix(spec.n_sites, h))
    }

    pub(crate) fn from_matrix(n_sites: usize, h: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h);
        Self {
            n_sites,
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// `e^{-iHt}` as a dense matrix.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let dim = self.dim();
        let phases: Vec<Complex64> = self.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect();
        let mut u = DMatrix::<Complex64>::zeros(dim, dim);
        for (k, ph) in phases.iter().enumerate() {
            let col = self.vectors.column(k);
            for r in 0..dim {
                let w = ph * col[r];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for s in 0..dim {
                    u[(r, s)] += w * col[s];
                }
            }
        }
        u
    }

    /// `e^{-iHt} ψ` through the eigenbasis.
    pub fn evolve(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let dim = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for k in 0..dim {
            let col = self.vectors.column(k);
            let a: Complex64 = (0..dim).map(|i| psi[i] * col[i]).sum();
            let a = a * Complex64::from_polar(1.0, -self.energies[k] * t);
            for i in 0..dim {
                out[i] += a * col[i];
            }
        }
        out
    }

    /// Basis state with one excitation at the 1-based `site`.
    pub fn excitation(&self, site: usize) -> Result<Vec<Complex64>> {
        if site == 0 || site > self.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[site_mask(self.n_sites, site)] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn transition_amplitude(&self, r: usize, s: usize, t: f64) -> Result<Complex64> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let start = self.excitation(s)?;
        self.excitation(r)?;
        Ok(self.evolve(&start, t)[site_mask(self.n_sites, r)])
    }
}

/// `⟨r|e^{-iHt}|s⟩` from the full `2^N` evolution.
pub fn full_transition_amplitude(spec: &ChainSpec<f64>, r: usize, s: usize, t: f64) -> Result<Complex64> {
    FullChain::new(spec)?.transition_amplitude(r, s, t)
}

/// Single-excitation block of the full matrix (rows/columns ordered by site).
pub(crate) fn sector_block(h: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |r, s| h[(site_mask(n, r + 1), site_mask(n, s + 1))])
}
