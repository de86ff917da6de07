//! Band-resolved spectral occupation density `I(E, k)` and the shift pumped per cycle.

use serde::{Deserialize, Serialize};

use super::FloquetProblem;
use crate::bands::BandStructure;
use crate::error::{invalid, Result};
use crate::linalg::{fold, Spinor, C64, ONE, ZERO};
use crate::model::DriveParams;
use crate::modes::ModePair;

/// Floor broadening of the Lorentzians.
pub const DEFAULT_ETA: f64 = 0.02;
/// Coefficients below this magnitude drop the corresponding cross terms.
pub const CROSS_TERM_CUTOFF: f64 = 1e-6;

/// Which sublattice amplitude is injected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralInput {
    A,
    B,
    #[serde(skip)]
    Custom(Spinor),
}

impl SpectralInput {
    pub fn spinor(self) -> Spinor {
        match self {
            SpectralInput::A => [ONE, ZERO],
            SpectralInput::B => [ZERO, ONE],
            SpectralInput::Custom(s) => s,
        }
    }
}

/// Intensity on an `(E, k)` grid, stored row-major with one row per `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMap {
    pub e_grid: Vec<f64>,
    pub k_grid: Vec<f64>,
    pub omega: f64,
    pub intensity: Vec<f64>,
    /// Per-band diagonal contributions when the map was built from Floquet modes.
    pub band_intensity: Option<[Vec<f64>; 2]>,
    pub normalized: bool,
}

impl SpectralMap {
    pub fn zeros(e_grid: Vec<f64>, k_grid: Vec<f64>, omega: f64) -> Self {
        let n = e_grid.len() * k_grid.len();
        SpectralMap {
            e_grid,
            k_grid,
            omega,
            intensity: vec![0.0; n],
            band_intensity: None,
            normalized: false,
        }
    }

    pub fn n_e(&self) -> usize {
        self.e_grid.len()
    }

    pub fn n_k(&self) -> usize {
        self.k_grid.len()
    }

    pub fn at(&self, ik: usize, ie: usize) -> f64 {
        self.intensity[ik * self.n_e() + ie]
    }

    pub fn row(&self, ik: usize) -> &[f64] {
        let n = self.n_e();
        &self.intensity[ik * n..(ik + 1) * n]
    }

    fn de(&self) -> f64 {
        if self.e_grid.len() < 2 {
            return self.omega;
        }
        (self.e_grid[self.e_grid.len() - 1] - self.e_grid[0]) / (self.e_grid.len() - 1) as f64
    }

    /// `sum_E dE I(E, k) / omega` for each `k`.
    pub fn weights_per_k(&self) -> Vec<f64> {
        let de = self.de();
        (0..self.n_k())
            .map(|ik| self.row(ik).iter().sum::<f64>() * de / self.omega)
            .collect()
    }

    /// Rescale each `k` row so that `sum_E dE I / omega = 1`; band maps share the factor.
    /// Rows with zero weight are left untouched.
    pub fn normalize_per_k(&mut self) {
        let w = self.weights_per_k();
        let ne = self.n_e();
        for (ik, &wk) in w.iter().enumerate() {
            if wk > 0.0 {
                let s = 1.0 / wk;
                self.intensity[ik * ne..(ik + 1) * ne].iter_mut().for_each(|x| *x *= s);
                if let Some(bands) = &mut self.band_intensity {
                    for b in bands.iter_mut() {
                        b[ik * ne..(ik + 1) * ne].iter_mut().for_each(|x| *x *= s);
                    }
                }
            }
        }
        self.normalized = true;
    }

    /// Energy of the strongest grid cell in each `k` row.
    pub fn peak_energies(&self) -> Vec<f64> {
        (0..self.n_k())
            .map(|ik| {
                let row = self.row(ik);
                let (ie, _) = row
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
                self.e_grid[ie]
            })
            .collect()
    }

    /// A single band filled homogeneously: one normalised Lorentzian per `k`.
    pub fn homogeneous(bs: &BandStructure, e_grid: &[f64], band: usize, eta: f64) -> Result<Self> {
        if band > 1 {
            return Err(invalid(format!("band index {band} out of range")));
        }
        check_e_grid(e_grid)?;
        let ne = e_grid.len();
        let mut map = SpectralMap::zeros(e_grid.to_vec(), bs.k_grid.clone(), bs.omega);
        let mut per_band = [vec![0.0; map.intensity.len()], vec![0.0; map.intensity.len()]];
        for (ik, eps) in bs.bands[band].quasienergies.iter().enumerate() {
            for (ie, &e) in e_grid.iter().enumerate() {
                let l = lorentzian(e, *eps, bs.omega, eta);
                per_band[band][ik * ne + ie] = l.norm_sqr();
            }
        }
        map.intensity = per_band[band].clone();
        map.band_intensity = Some(per_band);
        map.normalize_per_k();
        Ok(map)
    }
}

fn check_e_grid(e_grid: &[f64]) -> Result<()> {
    if e_grid.len() < 2 {
        return Err(invalid("energy grid needs at least two points"));
    }
    if e_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("energy grid must be strictly increasing"));
    }
    Ok(())
}

/// Uniform energy grid covering `[-omega/2, omega/2)`.
pub fn uniform_e_grid(n: usize, omega: f64) -> Vec<f64> {
    (0..n).map(|i| -0.5 * omega + omega * i as f64 / n as f64).collect()
}

/// `1 / (wrap(E - Re eps) - i Im eps + i eta)`.
fn lorentzian(e: f64, eps: C64, omega: f64, eta: f64) -> C64 {
    ONE / C64::new(fold(e - eps.re, omega), -eps.im + eta)
}

/// `C_a = <dual_a|psi0>` for a sublattice input.
pub fn expansion_coefficients(modes: &ModePair, input: SpectralInput) -> [C64; 2] {
    modes.coefficients(&input.spinor())
}

/// Spectral occupation density from already tracked modes.
pub fn spectral_density_from_bands(bs: &BandStructure, e_grid: &[f64], input: SpectralInput, eta: f64) -> Result<SpectralMap> {
    check_e_grid(e_grid)?;
    let ne = e_grid.len();
    let mut map = SpectralMap::zeros(e_grid.to_vec(), bs.k_grid.clone(), bs.omega);
    let mut per_band = [vec![0.0; map.intensity.len()], vec![0.0; map.intensity.len()]];
    for (ik, modes) in bs.modes.iter().enumerate() {
        let c = expansion_coefficients(modes, input);
        let g = &modes.gram;
        let eps = [bs.bands[0].quasienergies[ik], bs.bands[1].quasienergies[ik]];
        let cross = c.iter().all(|x| x.norm() >= CROSS_TERM_CUTOFF);
        for (ie, &e) in e_grid.iter().enumerate() {
            let l = eps.map(|x| lorentzian(e, x, bs.omega, eta));
            let mut total = 0.0;
            for a in 0..2 {
                let diag = c[a].norm_sqr() * g[(a, a)].re * l[a].norm_sqr();
                per_band[a][ik * ne + ie] = diag;
                total += diag;
            }
            if cross {
                // sum over beta != alpha of conj(C_b) C_a S_ba conj(L_b) L_a
                let t = c[1].conj() * c[0] * g[(1, 0)] * l[1].conj() * l[0];
                total += 2.0 * t.re;
            }
            map.intensity[ik * ne + ie] = total;
        }
    }
    map.band_intensity = Some(per_band);
    Ok(map)
}

/// Spectral occupation density for a single-sublattice input on tracked Floquet bands.
pub fn spectral_density(
    params: &DriveParams,
    k_grid: &[f64],
    e_grid: &[f64],
    input: SpectralInput,
    n_harmonics: usize,
    eta: f64,
) -> Result<SpectralMap> {
    if !(eta > 0.0) {
        return Err(invalid("eta must be positive"));
    }
    let bs = FloquetProblem::new(params, n_harmonics)?.band_structure(k_grid)?;
    spectral_density_from_bands(&bs, e_grid, input, eta)
}

/// Group velocity `d Re eps / dk` of one band by centred differences of the unfolded curve,
/// closed periodically across the zone.
pub fn group_velocity(bs: &BandStructure, band: usize) -> Vec<f64> {
    let b = &bs.bands[band];
    let (k, u) = (&bs.k_grid, &b.unfolded);
    let n = k.len();
    let zone = 2.0 * std::f64::consts::PI / bs.a0;
    let shift = b.unfolded_end - u[0];
    (0..n)
        .map(|i| {
            let (kp, up) = if i + 1 < n { (k[i + 1], u[i + 1]) } else { (k[0] + zone, b.unfolded_end) };
            let (km, um) = if i > 0 { (k[i - 1], u[i - 1]) } else { (k[n - 1] - zone, u[n - 1] - shift) };
            (up - um) / (kp - km)
        })
        .collect()
}

/// `L / a0 = int dE/omega int dk a0/(2 pi) I_a(E, k) v_a(k) T / a0` for band `band`.
pub fn pumped_shift(bs: &BandStructure, map: &SpectralMap, band: usize) -> Result<f64> {
    if band > 1 {
        return Err(invalid(format!("band index {band} out of range")));
    }
    if map.k_grid != bs.k_grid {
        return Err(invalid("spectral map and band structure use different k grids"));
    }
    let source = match &map.band_intensity {
        Some(b) => &b[band],
        None => &map.intensity,
    };
    let ne = map.n_e();
    let de = map.de();
    let v = group_velocity(bs, band);
    let k = &bs.k_grid;
    let n = k.len();
    let zone = 2.0 * std::f64::consts::PI / bs.a0;
    let period = 2.0 * std::f64::consts::PI / bs.omega;
    let mut total = 0.0;
    for i in 0..n {
        let kp = if i + 1 < n { k[i + 1] } else { k[0] + zone };
        let km = if i > 0 { k[i - 1] } else { k[n - 1] - zone };
        let dk = 0.5 * (kp - km);
        let filling = source[i * ne..(i + 1) * ne].iter().sum::<f64>() * de / map.omega;
        total += dk / (2.0 * std::f64::consts::PI) * filling * v[i] * period;
    }
    Ok(total)
}
