use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::linalg::{fold, Mat2, Spinor, C64, ZERO};
use crate::modes::ModePair;

/// Relative tolerance for matching an eigenvalue to the conjugate of an adjoint eigenvalue.
pub const PAIRING_TOL: f64 = 1e-8;
/// Smallest `|<u~|u>|` of unit vectors accepted before biorthogonal normalisation.
pub const EP_TOL: f64 = 1e-8;

/// Eigenvalues with right eigenvectors (columns of `right`) and adjoint eigenvectors
/// (columns of `left`), normalised so that `left^H right = 1`.
#[derive(Debug, Clone)]
pub struct Biorthogonal {
    pub values: Vec<C64>,
    pub right: Mat<C64>,
    pub left: Mat<C64>,
}

impl Biorthogonal {
    /// `max_mn |<u~_m|u_n> - delta_mn|`.
    pub fn residual(&self) -> f64 {
        let g = self.left.adjoint() * &self.right;
        let n = self.values.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - want).norm());
            }
        }
        worst
    }
}

fn frobenius(a: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

fn column_norm(a: &Mat<C64>, j: usize) -> f64 {
    (0..a.nrows()).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt()
}

fn is_hermitian(a: MatRef<'_, C64>) -> bool {
    let n = a.nrows();
    for i in 0..n {
        for j in i..n {
            if a[(i, j)] != a[(j, i)].conj() {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues and unit right eigenvectors only.
pub(crate) fn right_eigen(a: MatRef<'_, C64>) -> Result<(Vec<C64>, Mat<C64>)> {
    let n = a.nrows();
    if is_hermitian(a) {
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let values = (0..n).map(|i| C64::new(evd.S()[i].re, 0.0)).collect();
        return Ok((values, evd.U().to_owned()));
    }
    let evd = a.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(((0..n).map(|i| evd.S()[i]).collect(), evd.U().to_owned()))
}

/// Columns whose eigenvalue has `Re eps` in `[-omega/2, omega/2)`, with values just below
/// `+omega/2` attributed to the next zone so each mode is counted once.
fn zone_indices(values: &[C64], omega: f64) -> Result<[usize; 2]> {
    let half = 0.5 * omega;
    let snap = 1e-9 * omega.max(1.0);
    let picked: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, e)| e.re >= -half - snap && e.re < half - snap)
        .map(|(j, _)| j)
        .collect();
    match picked[..] {
        [a, b] => Ok([a, b]),
        _ => Err(Error::TruncationTooSmall { found: picked.len() }),
    }
}

/// t = 0 modes straight from right eigenvectors, skipping the adjoint problem.
pub(crate) fn mode_pair_from_right(k: f64, omega: f64, n_harmonics: usize, values: &[C64], right: &Mat<C64>) -> Result<ModePair> {
    let idx = zone_indices(values, omega)?;
    let parts = idx.map(|j| harmonics_of(right, j, n_harmonics));
    let sum = |p: &[Spinor]| p.iter().fold([ZERO; 2], |acc, u| [acc[0] + u[0], acc[1] + u[1]]);
    let dot = |a: &[Spinor], b: &[Spinor]| -> C64 {
        a.iter().zip(b).map(|(x, y)| x[0].conj() * y[0] + x[1].conj() * y[1]).sum()
    };
    let gram = Mat2([
        [dot(&parts[0], &parts[0]), dot(&parts[0], &parts[1])],
        [dot(&parts[1], &parts[0]), dot(&parts[1], &parts[1])],
    ]);
    let eps = idx.map(|j| C64::new(fold(values[j].re, omega), values[j].im));
    ModePair::from_right(k, eps, [sum(&parts[0]), sum(&parts[1])], gram)
}

/// Groups of indices whose eigenvalues chain together within `tol`.
fn clusters(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut group = vec![start];
        let mut head = 0;
        while head < group.len() {
            let v = values[group[head]];
            for j in 0..n {
                if !seen[j] && (values[j] - v).norm() < tol {
                    seen[j] = true;
                    group.push(j);
                }
            }
            head += 1;
        }
        group.sort_unstable();
        out.push(group);
    }
    out
}

/// Right eigenvectors of `A`, adjoint eigenvectors of `A^H`, paired by `eps <-> conj(eps)`.
pub fn diagonalize_biorthogonal(a: MatRef<'_, C64>) -> Result<Biorthogonal> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::InvalidArgument("matrix must be square and non-empty".into()));
    }
    let norm = frobenius(a);
    if !norm.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }

    if is_hermitian(a) {
        let (values, right) = right_eigen(a)?;
        let left = right.clone();
        return Ok(Biorthogonal { values, right, left });
    }

    let evd = a.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let adj = a.adjoint().to_owned();
    let evd_adj = adj.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values: Vec<C64> = (0..n).map(|i| evd.S()[i]).collect();
    let adj_values: Vec<C64> = (0..n).map(|i| evd_adj.S()[i].conj()).collect();
    let tol = PAIRING_TOL * norm;

    let mut right = evd.U().to_owned();
    for i in 0..n {
        let rn = column_norm(&right, i);
        for r in 0..n {
            right[(r, i)] /= rn;
        }
    }
    let raw_left = evd_adj.U();
    let mut left = Mat::<C64>::zeros(n, n);
    let mut used = vec![false; n];
    for cluster in clusters(&values, tol) {
        let partners: Vec<usize> = (0..n)
            .filter(|&j| !used[j] && cluster.iter().any(|&i| (adj_values[j] - values[i]).norm() < tol))
            .collect();
        if partners.len() != cluster.len() {
            return Err(Error::DegenerateSpectrum {
                value: format!("{}", values[cluster[0]]),
                candidates: partners.len(),
                tolerance: tol,
            });
        }
        let m = cluster.len();
        let mut l = Mat::<C64>::zeros(n, m);
        for (c, &j) in partners.iter().enumerate() {
            used[j] = true;
            let ln = (0..n).map(|r| raw_left[(r, j)].norm_sqr()).sum::<f64>().sqrt();
            for r in 0..n {
                l[(r, c)] = raw_left[(r, j)] / ln;
            }
        }
        // within a cluster the adjoint basis is arbitrary: biorthogonalise via S = L^H R
        let s = Mat::<C64>::from_fn(m, m, |a, b| (0..n).map(|r| l[(r, a)].conj() * right[(r, cluster[b])]).sum());
        let inv = if m == 1 {
            Mat::<C64>::from_fn(1, 1, |_, _| C64::new(1.0, 0.0) / s[(0, 0)])
        } else {
            s.partial_piv_lu().inverse()
        };
        let worst = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| inv[(a, b)].norm())
            .fold(0.0, f64::max);
        if !(worst.is_finite() && worst < 1.0 / EP_TOL) {
            return Err(Error::ExceptionalPoint {
                value: format!("{}", values[cluster[0]]),
                overlap: 1.0 / worst,
            });
        }
        // L' = L S^{-H}, so L'^H R = I on the cluster
        for (b, &i) in cluster.iter().enumerate() {
            for r in 0..n {
                left[(r, i)] = (0..m).map(|a| l[(r, a)] * inv[(b, a)].conj()).sum();
            }
        }
    }
    Ok(Biorthogonal { values, right, left })
}

/// Biorthogonal eigensystem of the Floquet matrix at one `k`.
#[derive(Debug, Clone)]
pub struct FloquetEigensystem {
    pub k: f64,
    pub n_harmonics: usize,
    pub omega: f64,
    pub system: Biorthogonal,
}

impl FloquetEigensystem {
    pub fn new(k: f64, n_harmonics: usize, omega: f64, system: Biorthogonal) -> Self {
        FloquetEigensystem {
            k,
            n_harmonics,
            omega,
            system,
        }
    }

    pub fn dim(&self) -> usize {
        self.system.values.len()
    }

    pub fn quasienergies(&self) -> &[C64] {
        &self.system.values
    }

    pub fn biorthonormality_residual(&self) -> f64 {
        self.system.residual()
    }

    /// Harmonic components `u^n` of eigenvector `j`, for `n` in `[-N, N]`.
    pub fn right_harmonics(&self, j: usize) -> Vec<Spinor> {
        harmonics_of(&self.system.right, j, self.n_harmonics)
    }

    pub fn left_harmonics(&self, j: usize) -> Vec<Spinor> {
        harmonics_of(&self.system.left, j, self.n_harmonics)
    }
}

fn harmonics_of(m: &Mat<C64>, j: usize, n_harmonics: usize) -> Vec<Spinor> {
    (0..2 * n_harmonics + 1)
        .map(|b| [m[(2 * b, j)], m[(2 * b + 1, j)]])
        .collect()
}

/// A Floquet eigenvector with `Re eps` in the first zone.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMode {
    /// Column in the eigensystem.
    pub index: usize,
    /// Eigenvalue of the selected replica; its real part may sit within the snapping
    /// tolerance below `-omega/2`.
    pub quasienergy: C64,
    pub omega: f64,
    /// `u^n`, `n` in `[-N, N]`.
    pub right: Vec<Spinor>,
    /// `u~^n`.
    pub dual: Vec<Spinor>,
}

impl FloquetMode {
    pub fn n_harmonics(&self) -> usize {
        (self.right.len() - 1) / 2
    }

    /// Quasienergy with real part folded into `[-omega/2, omega/2)`.
    pub fn folded(&self) -> C64 {
        C64::new(fold(self.quasienergy.re, self.omega), self.quasienergy.im)
    }

    fn sum_at(parts: &[Spinor], omega: f64, t: f64) -> Spinor {
        let n = ((parts.len() - 1) / 2) as i64;
        let mut out = [ZERO; 2];
        for (i, u) in parts.iter().enumerate() {
            let h = i as i64 - n;
            let ph = C64::from_polar(1.0, -(h as f64) * omega * t);
            out[0] += u[0] * ph;
            out[1] += u[1] * ph;
        }
        out
    }

    /// Periodic mode function `phi(t) = sum_n exp(-i n omega t) u^n`.
    pub fn at(&self, t: f64) -> Spinor {
        Self::sum_at(&self.right, self.omega, t)
    }

    /// Dual mode function `phi~(t) = sum_n exp(-i n omega t) u~^n`.
    pub fn dual_at(&self, t: f64) -> Spinor {
        Self::sum_at(&self.dual, self.omega, t)
    }

    /// Full Floquet state `exp(-i eps t) phi(t)`.
    pub fn state_at(&self, t: f64) -> Spinor {
        let ph = (C64::new(0.0, -1.0) * self.quasienergy * t).exp();
        let p = self.at(t);
        [p[0] * ph, p[1] * ph]
    }

    /// The replica at `eps + m omega`, whose components are `u^{n+m}` (zero past the window).
    pub fn replica(&self, m: i64) -> FloquetMode {
        let shift = |parts: &[Spinor]| -> Vec<Spinor> {
            let len = parts.len() as i64;
            (0..len)
                .map(|i| {
                    let src = i + m;
                    if (0..len).contains(&src) {
                        parts[src as usize]
                    } else {
                        [ZERO; 2]
                    }
                })
                .collect()
        };
        FloquetMode {
            index: self.index,
            quasienergy: self.quasienergy + self.omega * m as f64,
            omega: self.omega,
            right: shift(&self.right),
            dual: shift(&self.dual),
        }
    }
}

/// The two physical modes of a Floquet eigensystem.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstZone {
    pub modes: [FloquetMode; 2],
}

impl FirstZone {
    /// Pack into a [`ModePair`] of t = 0 mode functions with duals from the inverse mode matrix.
    pub fn mode_pair(&self, es: &FloquetEigensystem) -> Result<ModePair> {
        let [m0, m1] = &self.modes;
        let gram = {
            let dot = |a: &FloquetMode, b: &FloquetMode| -> C64 {
                a.right
                    .iter()
                    .zip(&b.right)
                    .map(|(x, y)| x[0].conj() * y[0] + x[1].conj() * y[1])
                    .sum()
            };
            Mat2([[dot(m0, m0), dot(m0, m1)], [dot(m1, m0), dot(m1, m1)]])
        };
        ModePair::from_right(es.k, [m0.folded(), m1.folded()], [m0.at(0.0), m1.at(0.0)], gram)
    }
}

/// Select the representatives with `Re eps` in `[-omega/2, omega/2)`.
pub fn first_zone_modes(es: &FloquetEigensystem) -> Result<FirstZone> {
    let picked = zone_indices(es.quasienergies(), es.omega)?;
    let make = |j: usize| FloquetMode {
        index: j,
        quasienergy: es.quasienergies()[j],
        omega: es.omega,
        right: es.right_harmonics(j),
        dual: es.left_harmonics(j),
    };
    Ok(FirstZone {
        modes: [make(picked[0]), make(picked[1])],
    })
}
