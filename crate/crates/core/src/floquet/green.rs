//! Resolvent of the Floquet matrix in its biorthogonal eigenbasis.

use faer::Mat;

use super::FloquetEigensystem;
use crate::linalg::C64;

/// Default floor broadening.
pub const DEFAULT_ETA: f64 = 0.02;

/// `G(E) = sum_j |u_j><u~_j| / (E - eps_j + i eta)`, a `D x D` matrix in the harmonic-sublattice
/// basis. `energy` may itself be complex.
pub fn green_function(es: &FloquetEigensystem, energy: C64, eta: f64) -> Mat<C64> {
    let sys = &es.system;
    let n = sys.values.len();
    let z = energy + C64::new(0.0, eta);
    let weights: Vec<C64> = sys.values.iter().map(|&v| C64::new(1.0, 0.0) / (z - v)).collect();
    let mut scaled = sys.right.clone();
    for (j, w) in weights.iter().enumerate() {
        for r in 0..n {
            scaled[(r, j)] *= *w;
        }
    }
    &scaled * sys.left.adjoint()
}

/// `-Im Tr G(E) / pi`.
pub fn density_of_states(es: &FloquetEigensystem, energy: f64, eta: f64) -> f64 {
    let z = C64::new(energy, eta);
    let sys = &es.system;
    let n = sys.values.len();
    let mut tr = C64::new(0.0, 0.0);
    for j in 0..n {
        let overlap: C64 = (0..n).map(|r| sys.left[(r, j)].conj() * sys.right[(r, j)]).sum();
        tr += overlap / (z - sys.values[j]);
    }
    -tr.im / std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::FloquetProblem;
    use crate::model::DriveParams;
    use faer::linalg::solvers::DenseSolveCore;

    fn system(gamma0: f64, n_h: usize) -> FloquetEigensystem {
        let p = DriveParams::default().with_gamma0(gamma0);
        FloquetProblem::new(&p, n_h).unwrap().eigensystem(0.6).unwrap()
    }

    fn max_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
        let mut w: f64 = 0.0;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                w = w.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
        w
    }

    #[test]
    fn residue_is_the_spectral_projector() {
        let es = system(0.4, 6);
        let j = 3;
        let pole = es.system.values[j];
        let n = es.dim();
        let mut proj = Mat::<C64>::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                proj[(r, c)] = es.system.right[(r, j)] * es.system.left[(c, j)].conj();
            }
        }
        let mut last = f64::INFINITY;
        for d in [1e-3, 1e-5, 1e-7] {
            let e = pole + C64::new(d, 0.0);
            let g = green_function(&es, e, 0.0);
            let res = g * faer::Scale(C64::new(d, 0.0));
            let err = max_diff(&res, &proj);
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-5, "residue error {last}");
    }

    #[test]
    fn hermitian_sum_rule() {
        let es = system(0.0, 4);
        let eta = DEFAULT_ETA;
        let (lo, hi) = (-60.0, 60.0);
        let n = 240_000;
        let h = (hi - lo) / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            let e = lo + (i as f64 + 0.5) * h;
            let g = green_function(&es, C64::new(e, 0.0), eta);
            let tr: C64 = (0..es.dim()).map(|r| g[(r, r)]).sum();
            total += -tr.im / std::f64::consts::PI * h;
        }
        let d = es.dim() as f64;
        assert!((total - d).abs() < 0.01 * d, "integral {total} vs {d}");
    }

    #[test]
    fn density_matches_trace() {
        let es = system(0.4, 4);
        for e in [-0.3, 0.1, 0.52] {
            let g = green_function(&es, C64::new(e, 0.0), 0.05);
            let tr: C64 = (0..es.dim()).map(|r| g[(r, r)]).sum();
            assert!((density_of_states(&es, e, 0.05) + tr.im / std::f64::consts::PI).abs() < 1e-10);
        }
    }

    #[test]
    fn static_limit_matches_direct_inversion() {
        let p = DriveParams::default().with_gamma0(0.4);
        let full = crate::model::floquet_harmonics(&p, 5).unwrap();
        let fp = FloquetProblem::from_harmonics(&p, 5, full.static_part()).unwrap();
        let a = fp.matrix(1.1);
        let es = fp.eigensystem(1.1).unwrap();
        let n = a.nrows();
        for e in [C64::new(0.2, 0.0), C64::new(-1.3, 0.1)] {
            let eta = 0.03;
            let mut m = Mat::<C64>::zeros(n, n);
            for j in 0..n {
                for i in 0..n {
                    m[(i, j)] = -a[(i, j)];
                }
                m[(j, j)] += e + C64::new(0.0, eta);
            }
            let direct = m.partial_piv_lu().inverse();
            let g = green_function(&es, e, eta);
            assert!(max_diff(&g, &direct) < 1e-9);
        }
    }
}
