//! Single-excitation sector of one open spin chain.
//!
//! The chain Hamiltonian is the XXZ model in a uniform field,
//!
//! ```text
//! H = -J Σ_n (σx_n σx_{n+1} + σy_n σy_{n+1} + Δ σz_n σz_{n+1}) + B Σ_n σz_n
//! ```
//!
//! with `σz|1⟩ = +|1⟩`, shifted by its ferromagnetic ground energy so that
//! the all-down state `|0…0⟩` has energy zero. Restricted to the states
//! `|n⟩ = σ⁺_n|0…0⟩` it is the real symmetric tridiagonal matrix
//!
//! * off-diagonal `-2J`,
//! * diagonal `2JΔ·b(n) + 2B`, where `b(n)` is the number of bonds touching
//!   site `n` (1 at the ends, 2 in the bulk).
//!
//! Time evolution uses `e^{-iHt}`. All protocol observables depend on `|f|²`
//! or on products in which the sign of the exponent cancels.
//!
//! With this normalization the hopping amplitude is `2J`, so the fastest
//! magnons move at `4J` sites per unit time and the one-way transit time is
//! about `N/4` (see [`transit_time`]).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Sites are numbered `1..=n_sites` in the public amplitude API.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec<T> {
    pub n_sites: usize,
    pub coupling: T,
    pub anisotropy: T,
    pub field: T,
}

impl<T: Real> ChainSpec<T> {
    /// Isotropic Heisenberg chain, `J = 1`, no field.
    pub fn heisenberg(n_sites: usize) -> Self {
        Self {
            n_sites,
            coupling: T::one(),
            anisotropy: T::one(),
            field: T::zero(),
        }
    }

    pub fn new(n_sites: usize, coupling: T, anisotropy: T, field: T) -> Result<Self> {
        let spec = Self {
            n_sites,
            coupling,
            anisotropy,
            field,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::TooFewSites(self.n_sites));
        }
        if !(self.coupling.is_finite() && self.coupling > T::zero()) {
            return Err(Error::InvalidCoupling(self.coupling.as_f64()));
        }
        if !self.anisotropy.is_finite() {
            return Err(Error::NonFiniteParameter("anisotropy"));
        }
        if !self.field.is_finite() {
            return Err(Error::NonFiniteParameter("field"));
        }
        Ok(())
    }

    /// Number of bonds touching the 0-based site `i`.
    pub(crate) fn bonds_at(&self, i: usize) -> usize {
        usize::from(i > 0) + usize::from(i + 1 < self.n_sites)
    }
}

/// One-way wave-packet transit time `N / (4J)` for the hopping amplitude
/// `2J` used here.
pub fn transit_time<T: Real>(n_sites: usize) -> T {
    T::from_usize_lossy(n_sites) / T::lit(4.0)
}

/// Real symmetric tridiagonal sector matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorHamiltonian<T> {
    pub diagonal: Vec<T>,
    pub off_diagonal: Vec<T>,
}

impl<T: Real> SectorHamiltonian<T> {
    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    /// Matrix entry with 0-based indices.
    pub fn entry(&self, r: usize, s: usize) -> T {
        match r.abs_diff(s) {
            0 => self.diagonal[r],
            1 => self.off_diagonal[r.min(s)],
            _ => T::zero(),
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.dimension();
        (0..n)
            .map(|i| {
                let mut acc = self.diagonal[i] * x[i];
                if i > 0 {
                    acc += self.off_diagonal[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.off_diagonal[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }
}

pub fn build_sector_hamiltonian<T: Real>(spec: &ChainSpec<T>) -> Result<SectorHamiltonian<T>> {
    spec.validate()?;
    let two = T::lit(2.0);
    let j = spec.coupling;
    let diagonal = (0..spec.n_sites)
        .map(|i| two * j * spec.anisotropy * T::from_usize_lossy(spec.bonds_at(i)) + two * spec.field)
        .collect();
    let off_diagonal = vec![-two * j; spec.n_sites - 1];
    Ok(SectorHamiltonian {
        diagonal,
        off_diagonal,
    })
}

/// Eigensystem of the sector matrix: `energies` ascending, `modes` stored
/// mode-major so that `mode(k)[n] = v_k(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition<T> {
    energies: Vec<T>,
    modes: Vec<T>,
}

/// Full eigensystem by implicit QL with Wilkinson shifts (EISPACK `tql2`).
///
/// Each mode is normalized and signed so its first non-negligible component
/// is positive.
pub fn diagonalize<T: Real>(h: &SectorHamiltonian<T>) -> SpectralDecomposition<T> {
    let n = h.dimension();
    let mut d = h.diagonal.clone();
    let mut e: Vec<T> = h.off_diagonal.clone();
    e.push(T::zero());
    // z is row-major; column j converges to eigenvector j.
    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    tql2(&mut d, &mut e, &mut z, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));

    let cutoff = T::epsilon().sqrt();
    let mut energies = Vec::with_capacity(n);
    let mut modes = Vec::with_capacity(n * n);
    for &j in &order {
        energies.push(d[j]);
        let mut v: Vec<T> = (0..n).map(|row| z[row * n + j]).collect();
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        let lead = v.iter().copied().find(|x| x.abs() > cutoff).unwrap_or(T::one());
        let scale = if lead < T::zero() { -norm } else { norm };
        v.iter_mut().for_each(|x| *x /= scale);
        modes.extend(v);
    }
    SpectralDecomposition { energies, modes }
}

fn tql2<T: Real>(d: &mut [T], e: &mut [T], z: &mut [T], n: usize) {
    let two = T::lit(2.0);
    let eps = T::epsilon();
    let max_sweeps = 60 * n.max(1);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk = &mut z[k * n..(k + 1) * n];
                        h = zk[i + 1];
                        zk[i + 1] = s * zk[i] + c * h;
                        zk[i] = c * zk[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 || sweeps >= max_sweeps {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
}

impl<T: Real> SpectralDecomposition<T> {
    /// Builds and diagonalizes the sector matrix of `spec`.
    pub fn from_spec(spec: &ChainSpec<T>) -> Result<Self> {
        Ok(diagonalize(&build_sector_hamiltonian(spec)?))
    }

    pub fn n_sites(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn mode(&self, k: usize) -> &[T] {
        let n = self.n_sites();
        &self.modes[k * n..(k + 1) * n]
    }

    /// `max |Σ_n v_k(n) v_j(n) - δ_kj|`.
    pub fn orthonormality_defect(&self) -> T {
        let n = self.n_sites();
        let mut worst = T::zero();
        for k in 0..n {
            for j in k..n {
                let dot: T = self.mode(k).iter().zip(self.mode(j)).map(|(&a, &b)| a * b).sum();
                let target = if k == j { T::one() } else { T::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `max |Σ_k E_k v_k(r) v_k(s) - H_rs|`.
    pub fn reconstruction_residual(&self, h: &SectorHamiltonian<T>) -> T {
        let n = self.n_sites();
        let mut worst = T::zero();
        for r in 0..n {
            for s in 0..n {
                let rebuilt: T = (0..n).map(|k| self.energies[k] * self.mode(k)[r] * self.mode(k)[s]).sum();
                worst = worst.max((rebuilt - h.entry(r, s)).abs());
            }
        }
        worst
    }

    fn check_site(&self, site: usize) -> Result<usize> {
        if site == 0 || site > self.n_sites() {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites(),
            });
        }
        Ok(site - 1)
    }

    /// `f_{r,s}(t) = ⟨r|e^{-iHt}|s⟩ = Σ_k v_k(r) v_k(s) e^{-iE_k t}` with
    /// 1-based sites.
    pub fn transition_amplitude(&self, r: usize, s: usize, t: T) -> Result<Complex<T>> {
        let (r0, s0) = (self.check_site(r)?, self.check_site(s)?);
        if t < T::zero() {
            return Err(Error::NegativeTime(t.as_f64()));
        }
        Ok(self.amplitude_at(r0, s0, t))
    }

    pub(crate) fn amplitude_at(&self, r0: usize, s0: usize, t: T) -> Complex<T> {
        if t == T::zero() {
            let one = if r0 == s0 { T::one() } else { T::zero() };
            return Complex::new(one, T::zero());
        }
        (0..self.n_sites())
            .map(|k| {
                let mode = self.mode(k);
                phase(self.energies[k], t).scale(mode[r0] * mode[s0])
            })
            .sum()
    }

    /// `F(τ)` with `F_rs = f_{r,s}(τ)`.
    pub fn propagator_matrix(&self, tau: T) -> Result<Propagator<T>> {
        if tau < T::zero() {
            return Err(Error::NegativeTime(tau.as_f64()));
        }
        let n = self.n_sites();
        let phases: Vec<Complex<T>> = self.energies.iter().map(|&e| phase(e, tau)).collect();
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for (k, ph) in phases.iter().enumerate() {
            let mode = self.mode(k);
            for r in 0..n {
                let w = ph.scale(mode[r]);
                for s in 0..n {
                    data[r * n + s] += w.scale(mode[s]);
                }
            }
        }
        Ok(Propagator { n, data })
    }

    /// Mode coefficients `a_k = Σ_n v_k(n) c_n`.
    pub fn to_modes(&self, c: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n_sites())
            .map(|k| self.mode(k).iter().zip(c).map(|(&v, &x)| x.scale(v)).sum())
            .collect()
    }

    /// `c ← F(τ) c` in place, via the eigenbasis.
    pub(crate) fn evolve_in_place(&self, c: &mut [Complex<T>], tau: T) {
        let n = self.n_sites();
        let coeffs = self.to_modes(c);
        c.iter_mut().for_each(|x| *x = Complex::new(T::zero(), T::zero()));
        for (k, a) in coeffs.into_iter().enumerate() {
            let w = a * phase(self.energies[k], tau);
            let mode = self.mode(k);
            for i in 0..n {
                c[i] += w.scale(mode[i]);
            }
        }
    }

    /// Locates the first arrival at the far end: scans `|f_{N,1}(t)|²` on
    /// `(0, 1.5·N/2]` with step `0.01`, takes the largest interior local
    /// maximum and refines it by parabolic interpolation.
    pub fn first_peak(&self) -> Peak<T> {
        let n = self.n_sites();
        let weights: Vec<T> = (0..n).map(|k| self.mode(k)[n - 1] * self.mode(k)[0]).collect();
        let prob = |t: T| -> T {
            let amp: Complex<T> = self
                .energies
                .iter()
                .zip(&weights)
                .map(|(&e, &w)| phase(e, t).scale(w))
                .sum();
            amp.norm_sqr()
        };
        let h = T::lit(0.01);
        let t_end = T::lit(0.75) * T::from_usize_lossy(n);
        let steps = (t_end / h).floor().to_usize().unwrap_or(0).max(2);
        let grid: Vec<T> = (0..=steps + 1).map(|i| h * T::from_usize_lossy(i)).collect();
        let values: Vec<T> = grid.iter().map(|&t| prob(t)).collect();

        let mut best: Option<usize> = None;
        for i in 1..values.len() - 1 {
            if grid[i] > t_end {
                break;
            }
            let is_local_max = values[i] >= values[i - 1] && values[i] > values[i + 1];
            if is_local_max && best.is_none_or(|b| values[i] > values[b]) {
                best = Some(i);
            }
        }
        let i = best.unwrap_or_else(|| {
            (1..values.len() - 1)
                .max_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite"))
                .unwrap_or(1)
        });
        let (ym, y0, yp) = (values[i - 1], values[i], values[i + 1]);
        let curvature = ym - T::lit(2.0) * y0 + yp;
        let shift = if curvature < T::zero() {
            T::lit(0.5) * (ym - yp) / curvature
        } else {
            T::zero()
        };
        let t_refined = grid[i] + shift.max(-T::one()).min(T::one()) * h;
        let p_refined = prob(t_refined);
        if p_refined >= y0 {
            Peak {
                time: t_refined,
                probability: p_refined,
            }
        } else {
            Peak {
                time: grid[i],
                probability: y0,
            }
        }
    }
}

/// `e^{-iEt}`.
#[inline]
pub(crate) fn phase<T: Real>(energy: T, t: T) -> Complex<T> {
    let (s, c) = (energy * t).sin_cos();
    Complex::new(c, -s)
}

/// Location and height of the first arrival of `|f_{N,1}|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak<T> {
    pub time: T,
    pub probability: T,
}

/// Dense row-major complex `N×N` matrix of transition amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Propagator<T> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry with 0-based indices.
    pub fn get(&self, r: usize, s: usize) -> Complex<T> {
        self.data[r * self.n + s]
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                for s in 0..n {
                    data[r * n + s] += a * other.get(k, s);
                }
            }
        }
        Self { n, data }
    }

    pub fn apply(&self, c: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|r| (0..self.n).map(|s| self.get(r, s) * c[s]).sum())
            .collect()
    }

    /// `max |(F F†)_rs - δ_rs|`.
    pub fn unitarity_defect(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for r in 0..n {
            for s in 0..n {
                let v: Complex<T> = (0..n).map(|k| self.get(r, k) * self.get(s, k).conj()).sum();
                let target = if r == s { T::one() } else { T::zero() };
                worst = worst.max((v - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}
