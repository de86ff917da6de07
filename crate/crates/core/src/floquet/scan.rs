//! Gap over an `(omega, gamma0)` grid.

use rayon::prelude::*;

use super::{converged_truncation, FloquetProblem};
use crate::bands::{uniform_k_grid, GAP_CLOSED_TOL};
use crate::error::{invalid, Result};
use crate::model::DriveParams;

/// Settings for [`gap_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct GapScanOptions {
    pub n_k: usize,
    /// Fixed truncation; `None` applies the convergence rule.
    pub n_harmonics: Option<usize>,
    pub start_harmonics: usize,
    pub max_harmonics: usize,
    pub convergence_tol: f64,
    pub closed_tol: f64,
}

impl Default for GapScanOptions {
    fn default() -> Self {
        GapScanOptions {
            n_k: 256,
            n_harmonics: None,
            start_harmonics: 15,
            max_harmonics: 60,
            convergence_tol: 1e-8,
            closed_tol: GAP_CLOSED_TOL,
        }
    }
}

/// One grid cell: a gap or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub enum GapCell {
    Gap(f64),
    Failed(String),
}

impl GapCell {
    pub fn gap(&self) -> Option<f64> {
        match self {
            GapCell::Gap(g) => Some(*g),
            GapCell::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapScanResult {
    pub omega_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub n_harmonics: usize,
    pub closed_tol: f64,
    /// Row-major, one row per `omega`.
    pub cells: Vec<GapCell>,
    /// First `gamma0` (in grid order) whose gap is closed, per `omega`.
    pub thresholds: Vec<Option<f64>>,
}

impl GapScanResult {
    pub fn cell(&self, i_omega: usize, i_gamma: usize) -> &GapCell {
        &self.cells[i_omega * self.gamma_grid.len() + i_gamma]
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.gap().is_none()).count()
    }
}

/// Truncation chosen by the convergence rule, probed at the smallest `omega` and largest `gamma0`.
pub fn scan_truncation(template: &DriveParams, omega_grid: &[f64], gamma_grid: &[f64], opts: &GapScanOptions) -> Result<usize> {
    if let Some(n) = opts.n_harmonics {
        return Ok(n);
    }
    let omega = omega_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let gamma = gamma_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let p = template.with_omega(omega).with_gamma0(gamma);
    let pi = std::f64::consts::PI / p.a0;
    converged_truncation(&p, &[-pi, 0.0, 0.5 * pi], opts.start_harmonics, opts.max_harmonics, opts.convergence_tol)
}

pub fn gap_scan(template: &DriveParams, omega_grid: &[f64], gamma_grid: &[f64], opts: &GapScanOptions) -> Result<GapScanResult> {
    if omega_grid.is_empty() || gamma_grid.is_empty() {
        return Err(invalid("gap scan grids must be nonempty"));
    }
    template.validate()?;
    for &o in omega_grid {
        template.with_omega(o).validate()?;
    }
    for &g in gamma_grid {
        template.with_gamma0(g).validate()?;
    }
    let n_h = scan_truncation(template, omega_grid, gamma_grid, opts)?;
    let k_grid = uniform_k_grid(opts.n_k, template.a0);
    let points: Vec<(f64, f64)> = omega_grid
        .iter()
        .flat_map(|&o| gamma_grid.iter().map(move |&g| (o, g)))
        .collect();
    let cells: Vec<GapCell> = points
        .par_iter()
        .map(|&(o, g)| {
            let p = template.with_omega(o).with_gamma0(g);
            match FloquetProblem::new(&p, n_h).and_then(|fp| fp.band_structure(&k_grid)) {
                Ok(bs) => GapCell::Gap(bs.gap),
                Err(e) => GapCell::Failed(e.to_string()),
            }
        })
        .collect();
    let ng = gamma_grid.len();
    let thresholds = (0..omega_grid.len())
        .map(|io| {
            (0..ng)
                .find(|&ig| matches!(cells[io * ng + ig].gap(), Some(g) if g < opts.closed_tol))
                .map(|ig| gamma_grid[ig])
        })
        .collect();
    Ok(GapScanResult {
        omega_grid: omega_grid.to_vec(),
        gamma_grid: gamma_grid.to_vec(),
        n_harmonics: n_h,
        closed_tol: opts.closed_tol,
        cells,
        thresholds,
    })
}
