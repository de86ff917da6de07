//! One-period propagator of the Bloch Hamiltonian, independent of any harmonic truncation.
//!
//! The period is split at the loss switching instants and each piece is covered by
//! midpoint slices, `U = prod exp(-i H(t_mid) dt)`, with the 2x2 exponentials in closed form.

use rayon::prelude::*;

use crate::bands::{self, BandStructure};
use crate::error::{invalid, Error, Result};
use crate::linalg::{fold, spinor_dot, Mat2, C64, I};
use crate::model::{bloch_hamiltonian, DriveParams};
use crate::modes::ModePair;

/// Default slice count; step halving changes `U(T)` by about 1e-9 at paper parameters.
pub const DEFAULT_STEPS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Monodromy {
    pub k: f64,
    pub matrix: Mat2,
    pub steps: usize,
    pub period: f64,
}

/// `(start, width)` slices covering one period with every switching instant on a boundary.
pub(crate) fn aligned_slices(params: &DriveParams, steps: usize) -> Vec<(f64, f64)> {
    let period = params.period();
    let mut breaks = vec![0.0];
    breaks.extend(params.kink_times().into_iter().filter(|&t| t > 0.0 && t < period));
    breaks.push(period);
    let mut slices = Vec::with_capacity(steps + breaks.len());
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        let n = ((steps as f64 * len / period).round() as usize).max(1);
        let dt = len / n as f64;
        for i in 0..n {
            slices.push((w[0] + i as f64 * dt, dt));
        }
    }
    slices
}

/// Time-ordered product of midpoint slice exponentials.
fn ordered_product(slices: &[(f64, f64)], h: impl Fn(f64) -> Mat2) -> Mat2 {
    slices.iter().fold(Mat2::identity(), |u, &(t0, dt)| {
        h(t0 + 0.5 * dt).scale(-I * dt).exp() * u
    })
}

pub fn monodromy(params: &DriveParams, k: f64, steps: usize) -> Result<Monodromy> {
    params.validate()?;
    if steps < 1000 {
        return Err(invalid(format!("monodromy needs >= 1000 steps, got {steps}")));
    }
    let u = ordered_product(&aligned_slices(params, steps), |t| {
        bloch_hamiltonian(params, k, t).matrix
    });
    Ok(Monodromy {
        k,
        matrix: u,
        steps,
        period: params.period(),
    })
}

/// Floquet multipliers `mu = exp(-i eps T)` turned into quasienergies with real parts in
/// `[-omega/2, omega/2)`, plus the corresponding t = 0 modes.
pub fn quasienergies_from_monodromy(m: &Monodromy, omega: f64) -> Result<ModePair> {
    let (mus, vecs) = m.matrix.eigen();
    if mus.iter().any(|mu| mu.norm() == 0.0 || !mu.norm().is_finite()) {
        return Err(Error::ZeroMultiplier);
    }
    let eps = mus.map(|mu| {
        // eps = i ln(mu) / T
        let e = I * mu.ln() / m.period;
        C64::new(fold(e.re, omega), e.im)
    });
    let gram = Mat2([
        [spinor_dot(&vecs[0], &vecs[0]), spinor_dot(&vecs[0], &vecs[1])],
        [spinor_dot(&vecs[1], &vecs[0]), spinor_dot(&vecs[1], &vecs[1])],
    ]);
    ModePair::from_right(m.k, eps, vecs, gram)
}

/// Convenience: modes at `k` from a fresh monodromy.
pub fn modes(params: &DriveParams, k: f64, steps: usize) -> Result<ModePair> {
    let m = monodromy(params, k, steps)?;
    quasienergies_from_monodromy(&m, params.omega)
}

/// Tracked band structure from monodromy eigenpairs.
pub fn band_structure(params: &DriveParams, k_grid: &[f64], steps: usize) -> Result<BandStructure> {
    params.validate()?;
    bands::track(k_grid, params.a0, params.omega, |k| modes(params, k, steps))
}

/// Monodromy modes over a k grid, computed in parallel.
pub fn modes_on_grid(params: &DriveParams, k_grid: &[f64], steps: usize) -> Result<Vec<ModePair>> {
    k_grid.par_iter().map(|&k| modes(params, k, steps)).collect()
}
