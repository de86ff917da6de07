//! Continuity tracking of the two quasienergy bands across the Brillouin zone, the
//! projected quasienergy gap and band winding numbers.
//!
//! Bands are followed from `k = -pi/a0` to `k = +pi/a0` by the biorthogonal overlap
//! `|<dual_a(k_i)|right_b(k_i+1)>|` of the t = 0 modes, which is insensitive to the replica
//! a quasienergy happens to be folded into. Steps where the best assignment is ambiguous are
//! bisected up to [`MAX_REFINE`] times.
//!
//! The unfolded real part is accumulated along the track, so the winding number is
//! `[Re eps(pi) - Re eps(-pi)] / omega`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{fold, spinor_dot, C64};
use crate::modes::ModePair;

/// Smallest accepted tracking overlap.
pub const MIN_OVERLAP: f64 = 0.5;
/// Bisection levels tried on a tracking failure.
pub const MAX_REFINE: usize = 3;
/// Largest `|Z_raw - round(Z_raw)|` for which a winding number is defined.
pub const WINDING_TOL: f64 = 0.05;
/// Gaps below this (in units of `J0`) count as closed.
pub const GAP_CLOSED_TOL: f64 = 1e-3;
/// Default number of k points.
pub const DEFAULT_NK: usize = 256;

/// `n` points `-pi/a0 + 2 pi i / (n a0)`, covering `[-pi/a0, pi/a0)`.
pub fn uniform_k_grid(n: usize, a0: f64) -> Vec<f64> {
    (0..n).map(|i| (-PI + TAU * i as f64 / n as f64) / a0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Winding {
    pub raw: f64,
    pub z: i64,
    pub residual: f64,
}

impl Winding {
    pub fn from_raw(raw: f64) -> Self {
        let z = raw.round();
        Winding {
            raw,
            z: z as i64,
            residual: (raw - z).abs(),
        }
    }

    pub fn is_defined(&self) -> bool {
        self.residual <= WINDING_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    /// Quasienergy per grid point, real part folded into `[-omega/2, omega/2)`.
    pub quasienergies: Vec<C64>,
    /// Real part accumulated continuously along the track.
    pub unfolded: Vec<f64>,
    /// Unfolded real part at `k = +pi/a0`.
    pub unfolded_end: f64,
    pub winding: Winding,
}

impl Band {
    /// Decay rates `-2 Im eps`.
    pub fn decay_rates(&self) -> Vec<f64> {
        self.quasienergies.iter().map(|e| -2.0 * e.im).collect()
    }

    pub fn mean_im(&self) -> f64 {
        self.quasienergies.iter().map(|e| e.im).sum::<f64>() / self.quasienergies.len() as f64
    }
}

/// Two tracked bands over a k grid. Band 0 has the larger raw winding (the right mover in
/// the pumping regime).
#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub k_grid: Vec<f64>,
    pub omega: f64,
    pub a0: f64,
    pub bands: [Band; 2],
    /// t = 0 modes per grid point, ordered like `bands`.
    pub modes: Vec<ModePair>,
    /// Projected quasienergy gap.
    pub gap: f64,
    /// Number of bisection points inserted while tracking.
    pub refinements: usize,
}

impl BandStructure {
    pub fn gap_closed(&self) -> bool {
        self.gap < GAP_CLOSED_TOL
    }

    pub fn windings(&self) -> [Winding; 2] {
        [self.bands[0].winding, self.bands[1].winding]
    }

    /// Largest jump of the unfolded real part between adjacent grid points.
    pub fn max_step(&self) -> f64 {
        self.bands
            .iter()
            .flat_map(|b| {
                b.unfolded
                    .windows(2)
                    .map(|w| (w[1] - w[0]).abs())
                    .chain(std::iter::once((b.unfolded_end - b.unfolded[b.unfolded.len() - 1]).abs()))
            })
            .fold(0.0, f64::max)
    }
}

/// Projected gap of a band structure.
pub fn gap(bs: &BandStructure) -> f64 {
    bs.gap
}

/// Integer winding number of one band, with its residual.
pub fn winding_number(bs: &BandStructure, band: usize) -> Result<(i64, f64)> {
    if band > 1 {
        return Err(invalid(format!("band index {band} out of range")));
    }
    let w = bs.bands[band].winding;
    if !w.is_defined() {
        return Err(Error::WindingUndefined {
            band,
            raw: w.raw,
            residual: w.residual,
        });
    }
    Ok((w.z, w.residual))
}

fn overlap_matrix(prev: &ModePair, next: &ModePair) -> [[f64; 2]; 2] {
    let mut o = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            o[a][b] = spinor_dot(&prev.dual[a], &next.right[b]).norm();
        }
    }
    o
}

/// Orient `next` against `prev`; `Err(best overlap)` when the step is ambiguous.
fn align(prev: &ModePair, next: &ModePair, omega: f64) -> std::result::Result<ModePair, f64> {
    let o = overlap_matrix(prev, next);
    let keep = o[0][0] * o[1][1];
    let swap = o[0][1] * o[1][0];
    let (cand, best) = if keep >= swap {
        (next.clone(), o[0][0].min(o[1][1]))
    } else {
        (next.swapped(), o[0][1].min(o[1][0]))
    };
    // both bands must also move continuously
    let continuous = (0..2).all(|a| {
        fold(cand.quasienergies[a].re - prev.quasienergies[a].re, omega).abs() < 0.25 * omega
    });
    if best >= MIN_OVERLAP && continuous {
        Ok(cand)
    } else {
        Err(best)
    }
}

/// Follow the bands from `prev` to `next`, bisecting ambiguous steps. Appends the aligned
/// intermediate points and `next` to `path`.
fn advance<F>(prev: &ModePair, next: &ModePair, omega: f64, depth: usize, modes: &F, path: &mut Vec<ModePair>) -> Result<ModePair>
where
    F: Fn(f64) -> Result<ModePair>,
{
    match align(prev, next, omega) {
        Ok(a) => {
            path.push(a.clone());
            Ok(a)
        }
        Err(best) if depth >= MAX_REFINE => Err(Error::TrackingFailure {
            k_from: prev.k,
            k_to: next.k,
            overlap: best,
        }),
        Err(_) => {
            let mid = modes(0.5 * (prev.k + next.k))?;
            let mid = advance(prev, &mid, omega, depth + 1, modes, path)?;
            advance(&mid, next, omega, depth + 1, modes, path)
        }
    }
}

/// Track both bands over `k_grid` (ascending, covering `[-pi/a0, pi/a0)`) and close the
/// loop at `k = +pi/a0`.
pub fn track<F>(k_grid: &[f64], a0: f64, omega: f64, modes: F) -> Result<BandStructure>
where
    F: Fn(f64) -> Result<ModePair> + Sync,
{
    if k_grid.len() < 2 {
        return Err(invalid("k grid needs at least 2 points"));
    }
    if k_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("k grid must be strictly ascending"));
    }
    let k_end = PI / a0;
    if k_grid[k_grid.len() - 1] >= k_end || k_grid[0] < -k_end - 1e-12 {
        return Err(invalid("k grid must lie in [-pi/a0, pi/a0)"));
    }
    let mut ks = k_grid.to_vec();
    ks.push(k_end);
    let raw: Vec<ModePair> = ks.par_iter().map(|&k| modes(k)).collect::<Result<_>>()?;

    // path holds every tracked point including bisection midpoints
    let mut path = vec![raw[0].clone()];
    let mut on_grid = vec![0usize];
    let mut current = raw[0].clone();
    for next in &raw[1..] {
        current = advance(&current, next, omega, 0, &modes, &mut path)?;
        on_grid.push(path.len() - 1);
    }

    let mut unfolded = [vec![path[0].quasienergies[0].re], vec![path[0].quasienergies[1].re]];
    for w in path.windows(2) {
        for a in 0..2 {
            let d = fold(w[1].quasienergies[a].re - w[0].quasienergies[a].re, omega);
            let last = *unfolded[a].last().unwrap();
            unfolded[a].push(last + d);
        }
    }
    let gap = projected_gap(&unfolded, omega);

    let n = k_grid.len();
    let make_band = |a: usize| {
        let quasienergies = on_grid[..n]
            .iter()
            .map(|&i| {
                let e = path[i].quasienergies[a];
                C64::new(fold(e.re, omega), e.im)
            })
            .collect();
        let unf: Vec<f64> = on_grid[..n].iter().map(|&i| unfolded[a][i]).collect();
        let end = unfolded[a][on_grid[n]];
        let winding = Winding::from_raw((end - unf[0]) / omega);
        Band {
            quasienergies,
            unfolded: unf,
            unfolded_end: end,
            winding,
        }
    };
    let mut bands = [make_band(0), make_band(1)];
    let mut grid_modes: Vec<ModePair> = on_grid[..n].iter().map(|&i| path[i].clone()).collect();

    let b0 = &bands[0];
    let b1 = &bands[1];
    let swap = if (b0.winding.raw - b1.winding.raw).abs() > 1e-9 {
        b1.winding.raw > b0.winding.raw
    } else {
        b1.mean_im() > b0.mean_im()
    };
    if swap {
        bands.swap(0, 1);
        for m in grid_modes.iter_mut() {
            *m = m.swapped();
        }
    }

    Ok(BandStructure {
        k_grid: k_grid.to_vec(),
        omega,
        a0,
        bands,
        modes: grid_modes,
        gap,
        refinements: path.len() - ks.len(),
    })
}

/// Largest arc of `[-omega/2, omega/2)` that no band reaches, with each band linearly
/// interpolated between tracked points.
pub fn projected_gap(unfolded: &[Vec<f64>], omega: f64) -> f64 {
    let half = 0.5 * omega;
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    for band in unfolded {
        let lo = band.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = band.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo >= omega {
            return 0.0;
        }
        for w in band.windows(2) {
            let (a, b) = if w[0] <= w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            let start = fold(a, omega);
            let end = start + (b - a);
            if end >= half {
                arcs.push((start, half));
                arcs.push((-half, end - omega));
            } else {
                arcs.push((start, end));
            }
        }
    }
    if arcs.is_empty() {
        return omega;
    }
    arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = vec![arcs[0]];
    for &(s, e) in &arcs[1..] {
        let last = merged.last_mut().unwrap();
        if s <= last.1 {
            last.1 = last.1.max(e);
        } else {
            merged.push((s, e));
        }
    }
    let mut widest = merged[0].0 + omega - merged[merged.len() - 1].1;
    for w in merged.windows(2) {
        widest = widest.max(w[1].0 - w[0].1);
    }
    widest.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Mat2, ONE, ZERO};

    fn pair(k: f64, e0: C64, e1: C64) -> ModePair {
        ModePair::from_right(k, [e0, e1], [[ONE, ZERO], [ZERO, ONE]], Mat2::identity()).unwrap()
    }

    #[test]
    fn grid_covers_half_open_zone() {
        let g = uniform_k_grid(8, 2.0);
        assert_eq!(g.len(), 8);
        assert!((g[0] + PI / 2.0).abs() < 1e-15);
        assert!(g[7] < PI / 2.0);
    }

    #[test]
    fn constant_identical_bands() {
        let omega = 1.0;
        let bs = track(&uniform_k_grid(16, 1.0), 1.0, omega, |k| {
            Ok(pair(k, C64::new(0.1, 0.0), C64::new(0.1, 0.0)))
        })
        .unwrap();
        // a single occupied energy leaves the rest of the zone free
        assert!((gap(&bs) - omega).abs() < 1e-12);
        for b in 0..2 {
            assert_eq!(winding_number(&bs, b).unwrap(), (0, 0.0));
        }
    }

    #[test]
    fn counter_winding_linear_bands() {
        let omega = 1.1;
        let bs = track(&uniform_k_grid(64, 1.0), 1.0, omega, |k| {
            let e = omega * k / TAU;
            Ok(pair(k, C64::new(-e, -0.2), C64::new(e, -0.01)))
        })
        .unwrap();
        assert_eq!(bs.gap, 0.0);
        assert!(bs.gap_closed());
        assert_eq!(winding_number(&bs, 0).unwrap().0, 1);
        assert_eq!(winding_number(&bs, 1).unwrap().0, -1);
        assert!(bs.bands[0].mean_im() > bs.bands[1].mean_im());
        for b in &bs.bands {
            for e in &b.quasienergies {
                assert!(e.re >= -omega / 2.0 && e.re < omega / 2.0);
            }
        }
        assert!(bs.max_step() < omega / 4.0);
    }

    #[test]
    fn gapped_cosine_bands() {
        let omega = 1.0;
        let bs = track(&uniform_k_grid(128, 1.0), 1.0, omega, |k| {
            let e = 0.3 * (1.0 - k.cos()) / 2.0 + 0.05;
            Ok(pair(k, C64::new(e, 0.0), C64::new(-e, 0.0)))
        })
        .unwrap();
        // bands cover [-0.35, 0.35]; the free arc runs through the zone edge
        assert!((bs.gap - 0.3).abs() < 1e-12);
        let w = bs.windings();
        assert_eq!((w[0].z, w[1].z), (0, 0));
    }

    #[test]
    fn partial_winding_is_undefined() {
        let omega = 1.0;
        // the bands exchange their values across the zone: neither closes on itself
        let bs = track(&uniform_k_grid(64, 1.0), 1.0, omega, |k| {
            let e = 0.2 + 0.1 * k / PI;
            Ok(pair(k, C64::new(e, 0.0), C64::new(0.4 - e, 0.0)))
        })
        .unwrap();
        for b in 0..2 {
            let w = bs.bands[b].winding;
            assert!((w.raw.abs() - 0.2).abs() < 1e-12);
            assert!(matches!(winding_number(&bs, b), Err(Error::WindingUndefined { .. })));
        }
    }

    #[test]
    fn crossing_is_resolved_by_overlap() {
        // eigenvalues cross at k = 0 but the vectors stay put: tracking must not swap
        let omega = 2.0;
        let bs = track(&uniform_k_grid(33, 1.0), 1.0, omega, |k| {
            let e = 0.2 * k;
            Ok(pair(k, C64::new(e, 0.0), C64::new(-e, 0.0)))
        })
        .unwrap();
        let b = &bs.bands[0];
        let first = b.quasienergies[0].re;
        let last = b.quasienergies[32].re;
        assert!((first.signum() - last.signum()).abs() > 1.0, "band did not pass through the crossing");
    }

    #[test]
    fn ambiguous_vectors_fail_with_location() {
        // the eigenvectors jump at k = 0.05 to a basis that overlaps both old ones weakly
        let err = track(&uniform_k_grid(16, 1.0), 1.0, 1.0, |k| {
            let right = if k < 0.05 {
                [[ONE, ZERO], [ZERO, ONE]]
            } else {
                let c = C64::new(0.3, 0.0);
                [[c, c], [c, -c]]
            };
            ModePair::from_right(k, [C64::new(0.1, 0.0), C64::new(-0.1, 0.0)], right, Mat2::identity())
        })
        .unwrap_err();
        match err {
            Error::TrackingFailure { k_from, k_to, overlap } => {
                assert!(k_from < 0.05 && k_to >= 0.05);
                assert!(overlap < MIN_OVERLAP);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let f = |k: f64| Ok(pair(k, C64::new(0.0, 0.0), C64::new(0.1, 0.0)));
        assert!(track(&[0.0], 1.0, 1.0, f).is_err());
        assert!(track(&[0.0, -0.1], 1.0, 1.0, f).is_err());
        assert!(track(&[0.0, PI], 1.0, 1.0, f).is_err());
    }

    #[test]
    fn projected_gap_wraps() {
        let omega = 1.0;
        // one band spanning [0.3, 0.7] wraps to [0.3, 0.5) + [-0.5, -0.3]
        let g = projected_gap(&[vec![0.3, 0.7], vec![0.0, 0.0]], omega);
        assert!((g - 0.3).abs() < 1e-12);
        assert_eq!(projected_gap(&[vec![0.0, 1.0]], omega), 0.0);
    }
}
