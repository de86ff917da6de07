use super::*;
use crate::bands::uniform_k_grid;
use crate::error::Error;
use crate::oracle;
use proptest::prelude::*;
use std::f64::consts::PI;

fn reference_drive() -> DriveParams {
    DriveParams::default()
}

#[test]
fn matrix_layout() {
    let p = reference_drive();
    let fp = FloquetProblem::new(&p, 3).unwrap();
    let a = fp.matrix(0.4);
    assert_eq!(a.nrows(), 14);
    let h0 = fp.harmonics().bloch_harmonic(0.4, 0);
    let h1 = fp.harmonics().bloch_harmonic(0.4, 1);
    // block (n, l) = (1, 0) holds H^(1); diagonal block n = -3 is shifted by +3 omega
    for r in 0..2 {
        for c in 0..2 {
            assert_eq!(a[(2 * 4 + r, 2 * 3 + c)], h1[(r, c)]);
            let shift = if r == c { 3.0 * p.omega } else { 0.0 };
            assert_eq!(a[(r, c)], h0[(r, c)] + shift);
        }
    }
}

#[test]
fn static_drive_reproduces_bloch_eigenvalues() {
    let p = reference_drive();
    let full = crate::model::floquet_harmonics(&p, 4).unwrap();
    let stat = full.static_part();
    let fp = FloquetProblem::from_harmonics(&p, 4, stat.clone()).unwrap();
    let k = 0.8;
    let (want, _) = stat.bloch_harmonic(k, 0).eigen();
    let got = fp.modes(k).unwrap();
    for w in want {
        let folded = C64::new(crate::linalg::fold(w.re, p.omega), w.im);
        assert!(got.quasienergies.iter().any(|g| (g - folded).norm() < 1e-12));
    }
}

#[test]
fn biorthonormal_everywhere() {
    for gamma0 in [0.0, 0.4, 1.1] {
        let fp = FloquetProblem::new(&reference_drive().with_gamma0(gamma0), 20).unwrap();
        for k in [-PI, -1.2, 0.0, 2.5] {
            let es = fp.eigensystem(k).unwrap();
            assert!(es.biorthonormality_residual() < 1e-10, "gamma0 {gamma0} k {k}");
            let m = first_zone_modes(&es).unwrap().mode_pair(&es).unwrap();
            assert!(m.biorthonormality_residual() < 1e-10);
        }
    }
}

#[test]
fn hermitian_quasienergies_are_real() {
    let fp = FloquetProblem::new(&reference_drive().with_gamma0(0.0), 25).unwrap();
    for k in uniform_k_grid(16, 1.0) {
        let m = fp.modes(k).unwrap();
        for e in m.quasienergies {
            assert!(e.im.abs() < 1e-10);
        }
    }
}

#[test]
fn loss_makes_imaginary_parts_nonpositive() {
    let fp = FloquetProblem::new(&reference_drive(), 15).unwrap();
    for k in [-2.0, 0.3, 1.7] {
        for e in fp.eigensystem(k).unwrap().quasienergies() {
            assert!(e.im <= 1e-10);
        }
    }
}

#[test]
fn replicas_are_shifted_copies() {
    let p = reference_drive();
    let fp = FloquetProblem::new(&p, 30).unwrap();
    let es = fp.eigensystem(0.9).unwrap();
    let zone = first_zone_modes(&es).unwrap();
    let m = &zone.modes[0];
    let rep = m.replica(1);
    let target = rep.quasienergy;
    let (j, _) = es
        .quasienergies()
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
        .unwrap();
    assert!((es.quasienergies()[j] - target).norm() < 1e-8);
    let other = es.right_harmonics(j);
    // compare up to a phase, which is fixed by the largest component
    let (imax, _) = rep
        .right
        .iter()
        .enumerate()
        .max_by(|a, b| a.1[0].norm().total_cmp(&b.1[0].norm()))
        .unwrap();
    let phase = rep.right[imax][0] / other[imax][0];
    let err = rep
        .right
        .iter()
        .zip(&other)
        .map(|(a, b)| (a[0] - b[0] * phase).norm().max((a[1] - b[1] * phase).norm()))
        .fold(0.0, f64::max);
    // harmonic tails decay like n^-3, so vectors converge more slowly than eigenvalues
    assert!(err < 1e-5, "{err}");
}

#[test]
fn mode_function_is_periodic_and_dual_stays_normalised() {
    let fp = FloquetProblem::new(&reference_drive(), 30).unwrap();
    let es = fp.eigensystem(-0.7).unwrap();
    let zone = first_zone_modes(&es).unwrap();
    let t = fp.params().period();
    for m in &zone.modes {
        let a = m.at(0.3);
        let b = m.at(0.3 + t);
        assert!((a[0] - b[0]).norm() < 1e-12 && (a[1] - b[1]).norm() < 1e-12);
    }
}

#[test]
fn agrees_with_monodromy_oracle() {
    for gamma0 in [0.0, 0.4] {
        let p = reference_drive().with_gamma0(gamma0);
        let fp = FloquetProblem::new(&p, DEFAULT_HARMONICS).unwrap();
        for k in [-PI, -0.4, 1.9] {
            let a = fp.modes(k).unwrap();
            let b = oracle::modes(&p, k, oracle::DEFAULT_STEPS).unwrap();
            let d = quasienergy_distance(&a, &b, p.omega);
            assert!(d < 1e-8, "gamma0 {gamma0} k {k}: {d}");
        }
    }
}

#[test]
fn modes_agree_with_monodromy_eigenvectors() {
    let p = reference_drive();
    let fp = FloquetProblem::new(&p, DEFAULT_HARMONICS).unwrap();
    let k = 0.6;
    let a = fp.modes(k).unwrap();
    let m = oracle::monodromy(&p, k, oracle::DEFAULT_STEPS).unwrap();
    for b in 0..2 {
        // phi(0) is an eigenvector of U(T) with multiplier exp(-i eps T)
        let mu = (C64::new(0.0, -1.0) * a.quasienergies[b] * p.period()).exp();
        let v = m.matrix.apply(&a.right[b]);
        let err = (v[0] - mu * a.right[b][0]).norm().max((v[1] - mu * a.right[b][1]).norm());
        assert!(err < 1e-5 * crate::linalg::spinor_norm(&a.right[b]), "{err}");
    }
}

#[test]
fn fast_modes_match_full_eigensystem() {
    let fp = FloquetProblem::new(&reference_drive(), 20).unwrap();
    for k in [-1.0, 0.7] {
        let es = fp.eigensystem(k).unwrap();
        let full = first_zone_modes(&es).unwrap().mode_pair(&es).unwrap();
        let fast = fp.modes(k).unwrap();
        assert!(quasienergy_distance(&full, &fast, fp.params().omega) < 1e-12);
    }
}

#[test]
fn default_truncation_is_converged() {
    let p = reference_drive();
    let fp = FloquetProblem::new(&p, DEFAULT_HARMONICS).unwrap();
    for k in [-PI, 0.0, 1.0] {
        assert!(fp.truncation_error(k).unwrap() < 1e-8);
    }
}

#[test]
fn coefficients_reconstruct_input() {
    let fp = FloquetProblem::new(&reference_drive(), 20).unwrap();
    let m = fp.modes(0.2).unwrap();
    let psi = [C64::new(0.3, -0.2), C64::new(-1.0, 0.5)];
    let c = m.coefficients(&psi);
    for s in 0..2 {
        let r = c[0] * m.right[0][s] + c[1] * m.right[1][s];
        assert!((r - psi[s]).norm() < 1e-8);
    }
    let c = m.coefficients(&m.right[0]);
    assert!((c[0] - 1.0).norm() < 1e-10 && c[1].norm() < 1e-10);
}

#[test]
fn zone_selection_counts_modes() {
    let p = reference_drive();
    let es = FloquetProblem::new(&p, 5).unwrap().eigensystem(0.1).unwrap();
    let mut broken = es.clone();
    for v in broken.system.values.iter_mut() {
        *v += C64::new(100.0, 0.0);
    }
    assert!(matches!(first_zone_modes(&broken), Err(Error::TruncationTooSmall { found: 0 })));
}

#[test]
fn degenerate_matrix_is_reported() {
    let mut a = Mat::<C64>::zeros(2, 2);
    a[(0, 1)] = C64::new(1.0, 0.0);
    a[(1, 0)] = C64::new(1e-40, 0.0);
    assert!(matches!(
        diagonalize_biorthogonal(a.as_ref()),
        Err(Error::DegenerateSpectrum { .. } | Error::ExceptionalPoint { .. })
    ));
}

#[test]
fn close_but_distinct_eigenvalues_are_paired() {
    let mut a = Mat::<C64>::zeros(3, 3);
    a[(0, 0)] = C64::new(1.0, -0.5);
    a[(1, 1)] = C64::new(1.0 + 1e-12, -0.5);
    a[(2, 2)] = C64::new(-2.0, 0.0);
    a[(0, 2)] = C64::new(0.3, 0.0);
    let bi = diagonalize_biorthogonal(a.as_ref()).unwrap();
    assert!(bi.residual() < 1e-10);
}

#[test]
fn repeated_eigenvalue_gets_a_biorthogonal_basis() {
    let mut a = Mat::<C64>::zeros(4, 4);
    a[(0, 0)] = C64::new(0.5, -0.2);
    a[(1, 1)] = C64::new(0.5, -0.2);
    a[(2, 2)] = C64::new(-1.0, 0.0);
    a[(3, 3)] = C64::new(2.0, -0.1);
    a[(0, 2)] = C64::new(0.4, 0.1);
    a[(1, 3)] = C64::new(-0.3, 0.2);
    a[(0, 3)] = C64::new(0.7, 0.0);
    let bi = diagonalize_biorthogonal(a.as_ref()).unwrap();
    assert!(bi.residual() < 1e-10, "{}", bi.residual());
}

#[test]
fn gap_open_hermitian_closed_lossy() {
    let k = uniform_k_grid(128, 1.0);
    let open = band_structure(&reference_drive().with_gamma0(0.0), &k, 25).unwrap();
    assert!(open.gap > 1e-2);
    // the bands cross inside the zone, so neither tracked band closes on itself
    for b in &open.bands {
        assert!(!b.winding.is_defined(), "{:?}", b.winding);
    }
    let closed = band_structure(&reference_drive(), &k, 25).unwrap();
    assert!(closed.gap_closed());
    assert_eq!(closed.windings().map(|w| w.z), [1, -1]);
    // the right mover is the low-loss band
    assert!(closed.bands[0].mean_im() > closed.bands[1].mean_im());
}

#[test]
fn slow_drive_still_winds() {
    let p = reference_drive().with_omega(0.3);
    let bs = band_structure(&p, &uniform_k_grid(128, 1.0), 40).unwrap();
    assert_eq!(bs.bands[0].winding.z, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn biorthonormality_holds(k in -PI..PI, gamma0 in 0.0f64..1.2, omega in 0.8f64..2.0) {
        let p = reference_drive().with_gamma0(gamma0).with_omega(omega);
        let es = FloquetProblem::new(&p, 12).unwrap().eigensystem(k).unwrap();
        prop_assert!(es.biorthonormality_residual() < 1e-10);
        for e in es.quasienergies() {
            prop_assert!(e.im <= 1e-10);
        }
    }

    #[test]
    fn windings_cancel_when_closed(gamma0 in 0.4f64..1.0) {
        let bs = band_structure(&reference_drive().with_gamma0(gamma0), &uniform_k_grid(96, 1.0), 20).unwrap();
        if bs.gap_closed() && bs.bands.iter().all(|b| b.winding.is_defined()) {
            prop_assert_eq!(bs.bands[0].winding.z + bs.bands[1].winding.z, 0);
        }
    }
}
