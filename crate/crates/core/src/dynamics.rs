//! Real-space evolution of `i dpsi/dt = H(t) psi` with fixed-step RK4.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::floquet::spectral::{uniform_e_grid, SpectralMap};
use crate::linalg::{Spinor, C64, I, ONE, ZERO};
use crate::model::{chain_from_sample, drive_at, site_position, Boundary, ChainHamiltonian, DriveParams, Sublattice};

/// Outer cells monitored for reflections.
pub const EDGE_CELLS: usize = 2;
/// Edge amplitude allowed relative to the peak.
pub const EDGE_TOL: f64 = 1e-6;
/// Relative norm growth tolerated between samples before the norm counts as increasing.
pub const NORM_TOL: f64 = 1e-9;

/// Excited site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Input {
    pub cell: usize,
    pub sublattice: Sublattice,
}

impl Input {
    pub fn site(&self) -> usize {
        2 * self.cell + self.sublattice.offset()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagateOptions {
    pub n_cells: usize,
    pub n_cycles: usize,
    pub steps_per_cycle: usize,
    /// Keep every `store_every`-th step.
    pub store_every: usize,
    pub boundary: Boundary,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            n_cells: 201,
            n_cycles: 5,
            steps_per_cycle: 2000,
            store_every: 50,
            boundary: Boundary::Open,
        }
    }
}

impl PropagateOptions {
    fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(invalid("n_cells must be >= 2"));
        }
        if self.n_cycles < 1 {
            return Err(invalid("n_cycles must be >= 1"));
        }
        if self.steps_per_cycle < 500 {
            return Err(invalid(format!("steps_per_cycle must be >= 500, got {}", self.steps_per_cycle)));
        }
        if self.store_every == 0 || self.steps_per_cycle % self.store_every != 0 {
            return Err(invalid("store_every must divide steps_per_cycle"));
        }
        Ok(())
    }
}

/// Sampled amplitudes of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: DriveParams,
    pub n_cells: usize,
    pub boundary: Boundary,
    pub input: Option<Input>,
    pub steps_per_cycle: usize,
    pub store_every: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    /// One vector of `2 n_cells` amplitudes per stored time.
    pub states: Vec<Vec<C64>>,
    pub norms: Vec<f64>,
}

impl Trajectory {
    pub fn n_sites(&self) -> usize {
        2 * self.n_cells
    }

    pub fn samples_per_cycle(&self) -> usize {
        self.steps_per_cycle / self.store_every
    }

    pub fn n_cycles(&self) -> usize {
        (self.times.len() - 1) / self.samples_per_cycle()
    }

    /// Sample indices at `t = nT`, `n = 0, 1, ...`.
    pub fn cycle_indices(&self) -> Vec<usize> {
        (0..=self.n_cycles()).map(|n| n * self.samples_per_cycle()).collect()
    }

    /// Coordinate of site `i` in unit cells, measured from the injected site.
    pub fn position(&self, i: usize) -> f64 {
        let origin = self.input.map(|s| site_position(s.site(), self.params.a0)).unwrap_or(0.0);
        (site_position(i, self.params.a0) - origin) / self.params.a0
    }
}

fn rk4_step(params: &DriveParams, n_cells: usize, boundary: Boundary, t: f64, dt: f64, psi: &mut [C64], work: &mut [Vec<C64>; 5]) {
    let h = |t: f64| -> ChainHamiltonian { chain_from_sample(&drive_at(params, t), n_cells, boundary) };
    let deriv = |ham: &ChainHamiltonian, x: &[C64], out: &mut [C64]| {
        ham.apply_into(x, out);
        out.iter_mut().for_each(|v| *v *= -I);
    };
    let [k1, k2, k3, k4, tmp] = work;
    let h0 = h(t);
    let hm = h(t + 0.5 * dt);
    let h1 = h(t + dt);
    deriv(&h0, psi, k1);
    for i in 0..psi.len() {
        tmp[i] = psi[i] + k1[i] * (0.5 * dt);
    }
    deriv(&hm, tmp, k2);
    for i in 0..psi.len() {
        tmp[i] = psi[i] + k2[i] * (0.5 * dt);
    }
    deriv(&hm, tmp, k3);
    for i in 0..psi.len() {
        tmp[i] = psi[i] + k3[i] * dt;
    }
    deriv(&h1, tmp, k4);
    for i in 0..psi.len() {
        psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
    }
}

fn sq_norm(psi: &[C64]) -> f64 {
    psi.iter().map(|x| x.norm_sqr()).sum()
}

fn edge_ratio(psi: &[C64]) -> f64 {
    let n = psi.len();
    let e = 2 * EDGE_CELLS;
    let peak = psi.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let edge = psi[..e].iter().chain(&psi[n - e..]).map(|x| x.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        0.0
    } else {
        edge / peak
    }
}

/// Evolve an arbitrary initial state. Open chains abort when amplitude reaches the outer cells.
pub fn propagate_state(params: &DriveParams, psi0: Vec<C64>, input: Option<Input>, opts: &PropagateOptions) -> Result<Trajectory> {
    params.validate()?;
    opts.validate()?;
    if psi0.len() != 2 * opts.n_cells {
        return Err(invalid(format!("initial state has {} sites, expected {}", psi0.len(), 2 * opts.n_cells)));
    }
    let period = params.period();
    let dt = period / opts.steps_per_cycle as f64;
    let total = opts.n_cycles * opts.steps_per_cycle;
    let n_samples = total / opts.store_every + 1;
    let mut psi = psi0;
    let mut work: [Vec<C64>; 5] = std::array::from_fn(|_| vec![ZERO; psi.len()]);
    let mut times = Vec::with_capacity(n_samples);
    let mut states = Vec::with_capacity(n_samples);
    let mut norms = Vec::with_capacity(n_samples);
    times.push(0.0);
    norms.push(sq_norm(&psi));
    states.push(psi.clone());
    for step in 0..total {
        let t = step as f64 * dt;
        rk4_step(params, opts.n_cells, opts.boundary, t, dt, &mut psi, &mut work);
        if (step + 1) % opts.store_every == 0 {
            let t_next = (step + 1) as f64 * dt;
            if opts.boundary == Boundary::Open && edge_ratio(&psi) >= EDGE_TOL {
                let cycles = t_next / period;
                let reach = (opts.n_cells as f64 / 2.0) * (opts.n_cycles as f64 / cycles.max(1e-9));
                return Err(Error::LatticeTooSmall {
                    time: t_next,
                    suggested: (2.0 * reach).ceil() as usize + 2 * EDGE_CELLS + 1,
                });
            }
            times.push(t_next);
            norms.push(sq_norm(&psi));
            states.push(psi.clone());
        }
    }
    Ok(Trajectory {
        params: *params,
        n_cells: opts.n_cells,
        boundary: opts.boundary,
        input,
        steps_per_cycle: opts.steps_per_cycle,
        store_every: opts.store_every,
        dt,
        times,
        states,
        norms,
    })
}

/// Single-site excitation.
pub fn propagate(params: &DriveParams, input: Input, opts: &PropagateOptions) -> Result<Trajectory> {
    if input.cell >= opts.n_cells {
        return Err(invalid(format!("input cell {} outside lattice of {} cells", input.cell, opts.n_cells)));
    }
    let mut psi0 = vec![ZERO; 2 * opts.n_cells];
    psi0[input.site()] = ONE;
    propagate_state(params, psi0, Some(input), opts)
}

/// Lattice state `psi_{j,s} = exp(i k x_{j,s}) phi_s` on a ring of `n_cells` cells.
pub fn bloch_state(spinor: &Spinor, k: f64, n_cells: usize, a0: f64) -> Vec<C64> {
    (0..2 * n_cells)
        .map(|i| C64::from_polar(1.0, k * site_position(i, a0)) * spinor[i % 2])
        .collect()
}

/// `<x>(t)` in unit cells at every stored sample.
pub fn center_of_mass(traj: &Trajectory) -> Vec<f64> {
    let x: Vec<f64> = (0..traj.n_sites()).map(|i| traj.position(i)).collect();
    traj.states
        .iter()
        .zip(&traj.norms)
        .map(|(psi, &n)| psi.iter().zip(&x).map(|(a, xi)| a.norm_sqr() * xi).sum::<f64>() / n)
        .collect()
}

/// `<x>(nT)` for `n = 0 ..= n_cycles`.
pub fn cycle_positions(traj: &Trajectory) -> Vec<f64> {
    let com = center_of_mass(traj);
    traj.cycle_indices().into_iter().map(|i| com[i]).collect()
}

/// Ordinary least-squares slope and rms residual of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, rms)
}

/// Integer periods used for per-cycle fits: `T, 2T, ...` up to `5T`, dropping the first cycle.
fn fit_cycles(traj: &Trajectory) -> Result<Vec<usize>> {
    let last = traj.n_cycles().min(5);
    if last < 2 {
        return Err(invalid("need at least two full cycles for a per-cycle fit"));
    }
    Ok((1..=last).collect())
}

/// Slope of `<x>(nT)` over cycles 2 to 5, in cells per cycle.
pub fn displacement_per_cycle(traj: &Trajectory) -> Result<f64> {
    let pos = cycle_positions(traj);
    let n = fit_cycles(traj)?;
    let x: Vec<f64> = n.iter().map(|&i| i as f64).collect();
    let y: Vec<f64> = n.iter().map(|&i| pos[i]).collect();
    Ok(linear_fit(&x, &y).0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// `Gamma` in `<psi|psi> ~ exp(-Gamma t)`.
    pub rate: f64,
    /// rms residual of `ln <psi|psi>`.
    pub residual: f64,
}

/// Log-linear fit of the norm at integer periods over cycles 2 to 5.
pub fn norm_decay(traj: &Trajectory) -> Result<DecayFit> {
    for (i, w) in traj.norms.windows(2).enumerate() {
        if w[1] > w[0] * (1.0 + NORM_TOL) {
            return Err(Error::NonMonotoneNorm {
                t_prev: traj.times[i],
                t_next: traj.times[i + 1],
                prev: w[0],
                next: w[1],
            });
        }
    }
    let idx = traj.cycle_indices();
    let n = fit_cycles(traj)?;
    let x: Vec<f64> = n.iter().map(|&i| traj.times[idx[i]]).collect();
    let y: Vec<f64> = n.iter().map(|&i| traj.norms[idx[i]].ln()).collect();
    let (slope, _, rms) = linear_fit(&x, &y);
    Ok(DecayFit { rate: -slope, residual: rms })
}

/// Space-time Fourier intensity folded onto `n_k x n_e` points of the first zone.
///
/// Each sublattice is transformed separately with `exp(-i k x)` in space and `exp(i E t)` in
/// time; the time series is zero-padded so that FFT frequencies land on the energy grid, and
/// all replicas `E + m omega` are summed into the same bin.
pub fn spacetime_spectrum(traj: &Trajectory, n_k: usize, n_e: usize) -> Result<SpectralMap> {
    if traj.n_cycles() < 4 {
        return Err(invalid("space-time spectrum needs at least 4 cycles"));
    }
    if n_e <= traj.n_cycles() || n_k < 2 {
        return Err(invalid("energy grid must have more points than cycles and k grid at least 2"));
    }
    let a0 = traj.params.a0;
    let omega = traj.params.omega;
    let k_grid = crate::bands::uniform_k_grid(n_k, a0);
    let e_grid = uniform_e_grid(n_e, omega);
    let spc = traj.samples_per_cycle();
    let n_fft = n_e * spc;
    let n_t = traj.times.len();
    let mut planner = FftPlanner::<f64>::new();
    // exp(+i E t) with E_m = m omega / n_e is an inverse DFT
    let fft = planner.plan_fft_inverse(n_fft);
    let mut map = SpectralMap::zeros(e_grid, k_grid.clone(), omega);
    let n_cells = traj.n_cells;
    for (ik, &k) in k_grid.iter().enumerate() {
        for s in 0..2 {
            let phases: Vec<C64> = (0..n_cells)
                .map(|j| C64::from_polar(1.0, -k * site_position(2 * j + s, a0)))
                .collect();
            let mut series = vec![ZERO; n_fft];
            for (it, psi) in traj.states.iter().enumerate().take(n_t) {
                series[it] = (0..n_cells).map(|j| psi[2 * j + s] * phases[j]).sum();
            }
            fft.process(&mut series);
            for (m, v) in series.iter().enumerate() {
                // E_m = m omega / n_e, bin index relative to -omega/2
                let bin = (m + n_e / 2) % n_e;
                map.intensity[ik * n_e + bin] += v.norm_sqr();
            }
        }
    }
    Ok(map)
}
