//! Truncated Floquet matrix of the Bloch Hamiltonian and its biorthogonal eigensystem.
//!
//! With `phi(t) = sum_n exp(-i n omega t) u^n` and `n` in `[-N, N]`, the quasienergy
//! problem becomes a `2(2N+1)`-dimensional matrix eigenproblem whose `(n, l)` block is
//! `H^{(n-l)} - n omega delta_nl`. Row `2 (n + N) + beta` holds sublattice `beta` of
//! harmonic `n`.

mod eigen;
pub mod green;
pub mod scan;
pub mod spectral;

pub use eigen::{diagonalize_biorthogonal, first_zone_modes, Biorthogonal, FloquetEigensystem, FloquetMode};

use faer::Mat;

use crate::bands::{self, BandStructure};
use crate::error::{invalid, Result};
use crate::linalg::C64;
use crate::model::{floquet_harmonics, DriveParams, HarmonicSet};
use crate::modes::ModePair;

/// Default truncation `N_h`.
pub const DEFAULT_HARMONICS: usize = 40;
/// Truncation increment used by convergence checks.
pub const CONVERGENCE_STEP: usize = 5;

/// Drive parameters plus the Fourier harmonics needed to assemble Floquet matrices at any `k`.
#[derive(Debug, Clone)]
pub struct FloquetProblem {
    params: DriveParams,
    n_harmonics: usize,
    harmonics: HarmonicSet,
}

impl FloquetProblem {
    pub fn new(params: &DriveParams, n_harmonics: usize) -> Result<Self> {
        params.validate()?;
        if n_harmonics < 1 {
            return Err(invalid("n_harmonics must be >= 1"));
        }
        Ok(FloquetProblem {
            params: *params,
            n_harmonics,
            harmonics: floquet_harmonics(params, n_harmonics)?,
        })
    }

    /// Use a precomputed (e.g. truncated or static) harmonic table.
    pub fn from_harmonics(params: &DriveParams, n_harmonics: usize, harmonics: HarmonicSet) -> Result<Self> {
        params.validate()?;
        if n_harmonics < 1 {
            return Err(invalid("n_harmonics must be >= 1"));
        }
        Ok(FloquetProblem {
            params: *params,
            n_harmonics,
            harmonics,
        })
    }

    pub fn params(&self) -> &DriveParams {
        &self.params
    }

    pub fn n_harmonics(&self) -> usize {
        self.n_harmonics
    }

    pub fn harmonics(&self) -> &HarmonicSet {
        &self.harmonics
    }

    pub fn dim(&self) -> usize {
        2 * (2 * self.n_harmonics + 1)
    }

    pub fn matrix(&self, k: f64) -> Mat<C64> {
        let n = self.n_harmonics as i64;
        let dim = self.dim();
        let omega = self.params.omega;
        let blocks: Vec<_> = (-2 * n..=2 * n).map(|m| self.harmonics.bloch_harmonic(k, m)).collect();
        let mut a = Mat::<C64>::zeros(dim, dim);
        for (bi, hn) in (-n..=n).enumerate() {
            for (bj, hl) in (-n..=n).enumerate() {
                let h = &blocks[(hn - hl + 2 * n) as usize];
                for r in 0..2 {
                    for c in 0..2 {
                        a[(2 * bi + r, 2 * bj + c)] = h[(r, c)];
                    }
                }
            }
            for r in 0..2 {
                a[(2 * bi + r, 2 * bi + r)] -= C64::new(hn as f64 * omega, 0.0);
            }
        }
        if self.params.gamma0 == 0.0 {
            // the FFT leaves c_{-n} = conj(c_n) only up to rounding
            let sym = (&a + a.adjoint()) * faer::Scale(C64::new(0.5, 0.0));
            return sym;
        }
        a
    }

    pub fn eigensystem(&self, k: f64) -> Result<FloquetEigensystem> {
        let bi = diagonalize_biorthogonal(self.matrix(k).as_ref())?;
        Ok(FloquetEigensystem::new(k, self.n_harmonics, self.params.omega, bi))
    }

    /// The two physical Floquet modes at `k`. Only the right eigenproblem is solved; the
    /// duals follow from the 2x2 mode matrix.
    pub fn modes(&self, k: f64) -> Result<ModePair> {
        let (values, right) = eigen::right_eigen(self.matrix(k).as_ref())?;
        eigen::mode_pair_from_right(k, self.params.omega, self.n_harmonics, &values, &right)
    }

    /// Tracked band structure on `k_grid`.
    pub fn band_structure(&self, k_grid: &[f64]) -> Result<BandStructure> {
        bands::track(k_grid, self.params.a0, self.params.omega, |k| self.modes(k))
    }

    /// Largest change of the first-zone quasienergies at `k` when the truncation grows by
    /// [`CONVERGENCE_STEP`].
    pub fn truncation_error(&self, k: f64) -> Result<f64> {
        let bigger = FloquetProblem::new(&self.params, self.n_harmonics + CONVERGENCE_STEP)?;
        let a = self.modes(k)?;
        let b = bigger.modes(k)?;
        Ok(quasienergy_distance(&a, &b, self.params.omega))
    }
}

/// Distance between two quasienergy pairs, matched as sets and compared modulo `omega`.
pub fn quasienergy_distance(a: &ModePair, b: &ModePair, omega: f64) -> f64 {
    let d = |x: C64, y: C64| {
        let re = crate::linalg::fold(x.re - y.re, omega);
        (re * re + (x.im - y.im).powi(2)).sqrt()
    };
    let [a0, a1] = a.quasienergies;
    let [b0, b1] = b.quasienergies;
    let keep = d(a0, b0).max(d(a1, b1));
    let swap = d(a0, b1).max(d(a1, b0));
    keep.min(swap)
}

/// Assemble the Floquet matrix at `k` with `n_harmonics` replicas on each side.
pub fn build_floquet_matrix(params: &DriveParams, k: f64, n_harmonics: usize) -> Result<Mat<C64>> {
    Ok(FloquetProblem::new(params, n_harmonics)?.matrix(k))
}

/// Tracked Floquet band structure.
pub fn band_structure(params: &DriveParams, k_grid: &[f64], n_harmonics: usize) -> Result<BandStructure> {
    FloquetProblem::new(params, n_harmonics)?.band_structure(k_grid)
}

/// Smallest truncation in `start, start + step, ...` (up to `cap`) whose first-zone
/// quasienergies move by less than `tol` under a further `+CONVERGENCE_STEP`, probed at the
/// given momenta.
pub fn converged_truncation(params: &DriveParams, probe_k: &[f64], start: usize, cap: usize, tol: f64) -> Result<usize> {
    let mut n = start.max(1);
    loop {
        let p = FloquetProblem::new(params, n)?;
        let mut worst: f64 = 0.0;
        for &k in probe_k {
            worst = worst.max(p.truncation_error(k)?);
        }
        if worst < tol || n >= cap {
            return Ok(n);
        }
        n += CONVERGENCE_STEP;
    }
}

#[cfg(test)]
mod tests;
