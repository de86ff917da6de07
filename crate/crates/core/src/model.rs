//! Drive protocol of the lossy Rice-Mele chain and its Hamiltonians.
//!
//! Site ordering in real space is `A_0, B_0, A_1, B_1, ...`. The intra-cell bond
//! `(A_j, B_j)` carries `J1(t)`, the inter-cell bond `(B_j, A_{j+1})` carries `J2(t)`.
//! Sublattice `A` sits at `j * a0`, `B` at `j * a0 + a0 / 2`.
//!
//! The Bloch Hamiltonian uses Bloch states `psi_j ~ exp(i k x_j)` with those geometric
//! positions, so `H_k` is exactly the lattice Fourier transform of the real-space matrix
//! and `dRe(eps)/dk` is the physical group velocity (positive = toward larger `x`).

use std::f64::consts::{PI, TAU};

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{Mat2, C64, I, ZERO};

/// Parameters of the driven, lossy Rice-Mele model. Energies in units of `j0`, `hbar = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveParams {
    /// Onsite-potential amplitude.
    pub u0: f64,
    /// Hopping scale.
    pub j0: f64,
    /// Hopping-modulation depth.
    pub lambda: f64,
    /// Loss amplitude.
    pub gamma0: f64,
    /// Drive phase of the onsite potentials and losses.
    pub phi: f64,
    /// Driving frequency.
    pub omega: f64,
    /// Lattice constant.
    pub a0: f64,
}

impl Default for DriveParams {
    fn default() -> Self {
        DriveParams {
            u0: 1.0,
            j0: 1.0,
            lambda: 1.75,
            gamma0: 0.4,
            phi: 0.0,
            omega: 1.1,
            a0: 1.0,
        }
    }
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, bool); 7] = [
            ("u0 must be >= 0", self.u0 >= 0.0),
            ("j0 must be > 0", self.j0 > 0.0),
            ("lambda must be > 0", self.lambda > 0.0),
            ("gamma0 must be >= 0", self.gamma0 >= 0.0),
            ("omega must be > 0", self.omega > 0.0),
            ("a0 must be > 0", self.a0 > 0.0),
            ("phi must be finite", self.phi.is_finite()),
        ];
        for (msg, ok) in checks {
            if !ok {
                return Err(invalid(msg));
            }
        }
        let all_finite = [self.u0, self.j0, self.lambda, self.gamma0, self.omega, self.a0]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite || !self.period().is_finite() {
            return Err(invalid("parameters must be finite"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    pub fn with_gamma0(mut self, gamma0: f64) -> Self {
        self.gamma0 = gamma0;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    /// Instants in `[0, T)` where a loss rate switches on or off (`u_a = 0` or `u_b = 0`),
    /// sorted ascending.
    pub fn kink_times(&self) -> Vec<f64> {
        let t = self.period();
        // u_a(t) = 0 <=> omega t + phi = pi/2 + m pi; u_b is the same set shifted by T/2
        let mut out: Vec<f64> = (0..2)
            .map(|m| ((PI / 2.0 + m as f64 * PI - self.phi) / self.omega).rem_euclid(t))
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * t);
        out
    }
}

/// The six coupling functions at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub j1: f64,
    pub j2: f64,
    pub ua: f64,
    pub ub: f64,
    pub ga: f64,
    pub gb: f64,
}

impl DriveSample {
    pub fn get(&self, c: Coupling) -> f64 {
        match c {
            Coupling::J1 => self.j1,
            Coupling::J2 => self.j2,
            Coupling::Ua => self.ua,
            Coupling::Ub => self.ub,
            Coupling::Ga => self.ga,
            Coupling::Gb => self.gb,
        }
    }

    /// Complex onsite terms `u - i gamma` on `A` and `B`.
    pub fn onsite(&self) -> (C64, C64) {
        (C64::new(self.ua, -self.ga), C64::new(self.ub, -self.gb))
    }
}

/// Names of the six time-periodic couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coupling {
    J1,
    J2,
    Ua,
    Ub,
    Ga,
    Gb,
}

impl Coupling {
    pub const ALL: [Coupling; 6] = [
        Coupling::J1,
        Coupling::J2,
        Coupling::Ua,
        Coupling::Ub,
        Coupling::Ga,
        Coupling::Gb,
    ];

    fn index(self) -> usize {
        self as usize
    }

    /// The losses carry the step factor and are only continuous, not smooth.
    pub fn is_smooth(self) -> bool {
        !matches!(self, Coupling::Ga | Coupling::Gb)
    }
}

/// `(J1, u_a, gamma_a)` at `t`; the `B` functions are these at `t - T/2`.
fn a_couplings(p: &DriveParams, t: f64) -> (f64, f64, f64) {
    let phase = p.omega * t + p.phi;
    let cos = phase.cos();
    let ua = -p.u0 * cos;
    let j1 = p.j0 * (-p.lambda * (1.0 - (p.omega * t).sin())).exp();
    // step(0) = 0: no loss at the switching instant
    let ga = if ua > 0.0 { -p.gamma0 * cos } else { 0.0 };
    (j1, ua, ga)
}

/// All six couplings at time `t`.
pub fn drive_at(params: &DriveParams, t: f64) -> DriveSample {
    let (j1, ua, ga) = a_couplings(params, t);
    let (j2, ub, gb) = a_couplings(params, t - 0.5 * params.period());
    DriveSample {
        j1,
        j2,
        ua,
        ub,
        ga,
        gb,
    }
}

/// Bloch Hamiltonian at one `(k, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSample {
    pub k: f64,
    pub matrix: Mat2,
}

impl HamiltonianSample {
    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.matrix - self.matrix.adjoint()).max_abs()
    }

    /// `(H - H^dagger) / 2i`; negative semidefinite for pure loss.
    pub fn anti_hermitian_part(&self) -> Mat2 {
        (self.matrix - self.matrix.adjoint()).scale(C64::new(0.0, -0.5))
    }
}

/// Assemble `H_k` from (possibly complex, e.g. Fourier-harmonic) coupling values:
/// `(J1+J2) cos(k a0/2) sx - (J1-J2) sin(k a0/2) sy + diag(da, db)`.
pub(crate) fn bloch_matrix(j1: C64, j2: C64, da: C64, db: C64, k: f64, a0: f64) -> Mat2 {
    let (s, c) = (0.5 * k * a0).sin_cos();
    let sum = (j1 + j2) * c;
    let diff = (j1 - j2) * s;
    Mat2([[da, sum + I * diff], [sum - I * diff, db]])
}

pub fn bloch_hamiltonian(params: &DriveParams, k: f64, t: f64) -> HamiltonianSample {
    let d = drive_at(params, t);
    let (da, db) = d.onsite();
    HamiltonianSample {
        k,
        matrix: bloch_matrix(d.j1.into(), d.j2.into(), da, db, k, params.a0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    /// Ring closed by an extra `J2` bond between the last `B` and the first `A` site.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    pub fn offset(self) -> usize {
        match self {
            Sublattice::A => 0,
            Sublattice::B => 1,
        }
    }
}

/// Position of site `i` (ordering `A_0, B_0, ...`) in units of length.
pub fn site_position(i: usize, a0: f64) -> f64 {
    (i / 2) as f64 * a0 + if i % 2 == 1 { 0.5 * a0 } else { 0.0 }
}

/// Tridiagonal real-space Hamiltonian (plus an optional corner bond for rings).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainHamiltonian {
    /// `u - i gamma` per site.
    pub diag: Vec<C64>,
    /// `hop[i]` couples sites `i` and `i + 1`.
    pub hop: Vec<f64>,
    /// Bond between the last and the first site on a ring.
    pub wrap: Option<f64>,
}

impl ChainHamiltonian {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `out = H psi`.
    pub fn apply_into(&self, psi: &[C64], out: &mut [C64]) {
        let n = self.diag.len();
        for i in 0..n {
            out[i] = self.diag[i] * psi[i];
        }
        for (i, &h) in self.hop.iter().enumerate() {
            out[i] += psi[i + 1] * h;
            out[i + 1] += psi[i] * h;
        }
        if let Some(h) = self.wrap {
            out[0] += psi[n - 1] * h;
            out[n - 1] += psi[0] * h;
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let n = self.dim();
        let mut m = vec![vec![ZERO; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
        }
        for (i, &h) in self.hop.iter().enumerate() {
            m[i][i + 1] += h;
            m[i + 1][i] += h;
        }
        if let Some(h) = self.wrap {
            m[0][n - 1] += h;
            m[n - 1][0] += h;
        }
        m
    }
}

/// Open-chain Hamiltonian with `2 * n_cells` sites.
pub fn realspace_hamiltonian(
    params: &DriveParams,
    n_cells: usize,
    t: f64,
) -> Result<ChainHamiltonian> {
    realspace_hamiltonian_with(params, n_cells, t, Boundary::Open)
}

pub fn realspace_hamiltonian_with(
    params: &DriveParams,
    n_cells: usize,
    t: f64,
    boundary: Boundary,
) -> Result<ChainHamiltonian> {
    if n_cells < 2 {
        return Err(invalid(format!("n_cells must be >= 2, got {n_cells}")));
    }
    let d = drive_at(params, t);
    Ok(chain_from_sample(&d, n_cells, boundary))
}

pub(crate) fn chain_from_sample(d: &DriveSample, n_cells: usize, boundary: Boundary) -> ChainHamiltonian {
    let (da, db) = d.onsite();
    let n = 2 * n_cells;
    let diag = (0..n).map(|i| if i % 2 == 0 { da } else { db }).collect();
    let hop = (0..n - 1).map(|i| if i % 2 == 0 { d.j1 } else { d.j2 }).collect();
    let wrap = match boundary {
        Boundary::Open => None,
        Boundary::Periodic => Some(d.j2),
    };
    ChainHamiltonian { diag, hop, wrap }
}

/// Fourier coefficients `c_n`, `f(t) = sum_n c_n exp(-i n omega t)`, of the six couplings
/// for `n` in `[-m_max, m_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSet {
    m_max: usize,
    omega: f64,
    a0: f64,
    coeffs: [Vec<C64>; 6],
}

impl HarmonicSet {
    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn coefficient(&self, c: Coupling, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.m_max {
            return ZERO;
        }
        self.coeffs[c.index()][(n + self.m_max as i64) as usize]
    }

    /// Truncated Fourier series of one coupling at time `t`.
    pub fn evaluate(&self, c: Coupling, t: f64) -> C64 {
        let m = self.m_max as i64;
        (-m..=m)
            .map(|n| self.coefficient(c, n) * C64::from_polar(1.0, -(n as f64) * self.omega * t))
            .sum()
    }

    /// Keep only the time averages.
    pub fn static_part(&self) -> HarmonicSet {
        let mut out = self.clone();
        for v in out.coeffs.iter_mut() {
            for (i, z) in v.iter_mut().enumerate() {
                if i != self.m_max {
                    *z = ZERO;
                }
            }
        }
        out
    }

    /// The `n`-th Fourier harmonic of `H_k(t)`.
    pub fn bloch_harmonic(&self, k: f64, n: i64) -> Mat2 {
        let j1 = self.coefficient(Coupling::J1, n);
        let j2 = self.coefficient(Coupling::J2, n);
        let da = self.coefficient(Coupling::Ua, n) - I * self.coefficient(Coupling::Ga, n);
        let db = self.coefficient(Coupling::Ub, n) - I * self.coefficient(Coupling::Gb, n);
        bloch_matrix(j1, j2, da, db, k, self.a0)
    }
}

/// Sample each coupling uniformly over one period and take its discrete Fourier transform.
pub fn drive_harmonics(params: &DriveParams, m_max: usize, n_samples: usize) -> Result<HarmonicSet> {
    params.validate()?;
    if m_max == 0 {
        return Err(invalid("m_max must be >= 1"));
    }
    if !n_samples.is_power_of_two() || n_samples < 4 * m_max {
        return Err(invalid(format!(
            "n_samples must be a power of two >= 4 * m_max = {}, got {n_samples}",
            4 * m_max
        )));
    }
    let period = params.period();
    let samples: Vec<DriveSample> = (0..n_samples)
        .map(|s| drive_at(params, s as f64 * period / n_samples as f64))
        .collect();
    // c_n = (1/N) sum_s f_s exp(+2 pi i n s / N): an unnormalised inverse FFT
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n_samples);
    let scale = 1.0 / n_samples as f64;
    let coeffs = Coupling::ALL.map(|c| {
        let mut buf: Vec<C64> = samples.iter().map(|s| C64::new(s.get(c), 0.0)).collect();
        fft.process(&mut buf);
        let m = m_max as i64;
        (-m..=m)
            .map(|n| buf[n.rem_euclid(n_samples as i64) as usize] * scale)
            .collect()
    });
    Ok(HarmonicSet {
        m_max,
        omega: params.omega,
        a0: params.a0,
        coeffs,
    })
}

/// Harmonics used to assemble a Floquet matrix with `n_harmonics` replicas on each side:
/// blocks need orders up to `2 * n_harmonics`, and the loss kink needs fine sampling to keep
/// aliasing below 1e-9.
pub fn floquet_harmonics(params: &DriveParams, n_harmonics: usize) -> Result<HarmonicSet> {
    let m = (2 * n_harmonics).max(1);
    let n_samples = (8 * m).next_power_of_two().max(1 << 16);
    drive_harmonics(params, m, n_samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference_drive() -> DriveParams {
        DriveParams::default()
    }

    #[test]
    fn drive_at_t0() {
        let d = drive_at(&reference_drive(), 0.0);
        assert_eq!(d.ua, -1.0);
        assert!((d.ub - 1.0).abs() < 1e-15);
        assert_eq!(d.ga, 0.0);
        assert!((d.gb - 0.4).abs() < 1e-15);
    }

    #[test]
    fn j1_peaks_at_quarter_period() {
        let p = reference_drive();
        let d = drive_at(&p, p.period() / 4.0);
        assert!((d.j1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn j1_at_t0_matches_series_oracle() {
        // exp(-1.75) from its Taylor series, summed in reverse for accuracy
        let x: f64 = -1.75;
        let mut terms = vec![1.0f64];
        for n in 1..60 {
            let prev = *terms.last().unwrap();
            terms.push(prev * x / n as f64);
        }
        let oracle: f64 = terms.iter().rev().sum();
        let d = drive_at(&reference_drive(), 0.0);
        assert!((d.j1 - oracle).abs() < 1e-15);
        assert!((d.j1 - 0.1738).abs() < 5e-5);
    }

    #[test]
    fn step_is_zero_at_switching_instant() {
        let p = reference_drive();
        for tk in p.kink_times() {
            // cos is only ~1e-16 there; the loss must stay negligible
            let d = drive_at(&p, tk);
            assert!(d.ga.abs() < 1e-15 && d.gb.abs() < 1e-15);
        }
        let zero_onsite = DriveParams { u0: 0.0, ..reference_drive() };
        let d = drive_at(&zero_onsite, 1.234);
        assert_eq!((d.ga, d.gb), (0.0, 0.0));
    }

    #[test]
    fn kink_times_phi0() {
        let p = reference_drive();
        let t = p.period();
        let k = p.kink_times();
        assert_eq!(k.len(), 2);
        assert!((k[0] - t / 4.0).abs() < 1e-14);
        assert!((k[1] - 3.0 * t / 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(DriveParams { j0: 0.0, ..reference_drive() }.validate().is_err());
        assert!(DriveParams { omega: -1.0, ..reference_drive() }.validate().is_err());
        assert!(DriveParams { gamma0: -0.1, ..reference_drive() }.validate().is_err());
        assert!(DriveParams { lambda: 0.0, ..reference_drive() }.validate().is_err());
        assert!(DriveParams { a0: f64::NAN, ..reference_drive() }.validate().is_err());
        assert!(reference_drive().validate().is_ok());
    }

    #[test]
    fn bloch_special_momenta() {
        let p = reference_drive();
        let tq = p.period() / 4.0;
        let h = bloch_hamiltonian(&p, 0.0, tq);
        let d = drive_at(&p, tq);
        // k = 0: pure sigma_x coupling
        assert!((h.matrix[(0, 1)] - h.matrix[(1, 0)]).norm() < 1e-15);
        assert!((h.matrix[(0, 1)].re - (d.j1 + d.j2)).abs() < 1e-15);
        // k = pi / a0: sigma_x term vanishes
        let h = bloch_hamiltonian(&p, PI, 0.37);
        let d = drive_at(&p, 0.37);
        assert!(h.matrix[(0, 1)].re.abs() < 1e-15);
        assert!((h.matrix[(0, 1)].im - (d.j1 - d.j2)).abs() < 1e-15);
    }

    #[test]
    fn bloch_is_ring_fourier_transform() {
        // H_ring acting on a Bloch wave reproduces H_k on the amplitudes (a, b)
        let p = reference_drive();
        let n = 9;
        let t = 0.77;
        let ring = realspace_hamiltonian_with(&p, n, t, Boundary::Periodic).unwrap();
        let (a, b) = (C64::new(0.3, -0.8), C64::new(-0.5, 0.1));
        for m in 0..n {
            let k = TAU * m as f64 / n as f64;
            let psi: Vec<C64> = (0..2 * n)
                .map(|i| {
                    let amp = if i % 2 == 0 { a } else { b };
                    amp * C64::from_polar(1.0, k * site_position(i, p.a0))
                })
                .collect();
            let mut out = vec![ZERO; 2 * n];
            ring.apply_into(&psi, &mut out);
            let hk = bloch_hamiltonian(&p, k, t).matrix.apply(&[a, b]);
            // the ring closure costs a phase exp(i k N a0) = 1
            for i in 0..2 * n {
                let phase = C64::from_polar(1.0, k * site_position(i, p.a0));
                let expect = hk[i % 2] * phase;
                assert!((out[i] - expect).norm() < 1e-13, "k={k} site={i}");
            }
        }
    }

    #[test]
    fn open_chain_structure() {
        let p = reference_drive().with_gamma0(0.0);
        let h = realspace_hamiltonian(&p, 2, 0.3).unwrap();
        let m = h.to_dense();
        let mut bonds = 0;
        for i in 0..4 {
            for j in 0..4 {
                assert!((m[i][j] - m[j][i].conj()).norm() < 1e-15);
                if j > i && m[i][j].norm() > 0.0 {
                    bonds += 1;
                }
            }
        }
        assert_eq!(bonds, 3);
        assert!(realspace_hamiltonian(&p, 1, 0.0).is_err());

        let lossy = realspace_hamiltonian(&reference_drive(), 5, 0.0).unwrap();
        assert!(lossy.diag.iter().all(|z| z.im <= 0.0));
        assert!(lossy.diag.iter().any(|z| z.im < 0.0));
        assert!(lossy.wrap.is_none());
    }

    #[test]
    fn ua_harmonics_are_pure_cosine() {
        let p = DriveParams { phi: 0.4, ..reference_drive() };
        let h = drive_harmonics(&p, 8, 64).unwrap();
        let want_p1 = C64::from_polar(-p.u0 / 2.0, -p.phi);
        let want_m1 = C64::from_polar(-p.u0 / 2.0, p.phi);
        assert!((h.coefficient(Coupling::Ua, 1) - want_p1).norm() < 1e-14);
        assert!((h.coefficient(Coupling::Ua, -1) - want_m1).norm() < 1e-14);
        for n in [-8, -5, -2, 0, 2, 3, 8] {
            assert!(h.coefficient(Coupling::Ua, n).norm() < 1e-14, "n={n}");
        }
    }

    /// Composite Simpson rule over one period: independent of the FFT path.
    fn simpson_mean(f: impl Fn(f64) -> f64, period: f64, n: usize) -> f64 {
        let h = period / n as f64;
        let mut s = f(0.0) + f(period);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0 / period
    }

    #[test]
    fn static_harmonics_match_quadrature() {
        let p = reference_drive();
        let h = drive_harmonics(&p, 64, 1024).unwrap();
        let t = p.period();
        let j1_mean = simpson_mean(|s| drive_at(&p, s).j1, t, 200_000);
        assert!((h.coefficient(Coupling::J1, 0).re - j1_mean).abs() < 1e-12);
        // e^{-lambda} I0(lambda) with I0 from its power series
        let i0: f64 = (0..40)
            .map(|m| {
                let fact: f64 = (1..=m).map(|x| x as f64).product();
                (p.lambda / 2.0).powi(2 * m) / (fact * fact)
            })
            .sum();
        assert!((j1_mean - (-p.lambda).exp() * i0).abs() < 1e-12);
        assert!((j1_mean - 0.3345).abs() < 1e-4);

        // half-wave rectified cosine: mean gamma0 / pi; the kink limits the quadrature
        let ga_mean = simpson_mean(|s| drive_at(&p, s).ga, t, 400_000);
        assert!((ga_mean - p.gamma0 / PI).abs() < 1e-9);
        assert!((h.coefficient(Coupling::Ga, 0).re - ga_mean).abs() < 2e-6);
    }

    #[test]
    fn reconstruction_tolerances() {
        let p = reference_drive();
        let (m, ns) = (64, 1024);
        let h = drive_harmonics(&p, m, ns).unwrap();
        let t = p.period();
        for s in 0..ns {
            let ts = s as f64 * t / ns as f64;
            let d = drive_at(&p, ts);
            for c in Coupling::ALL {
                let err = (h.evaluate(c, ts) - d.get(c)).norm();
                if c.is_smooth() {
                    let scale = d.get(c).abs().max(1e-300);
                    let rel = if matches!(c, Coupling::Ua | Coupling::Ub) { err / p.u0 } else { err / scale };
                    assert!(rel < 1e-12, "{c:?} at sample {s}: {rel:e}");
                } else {
                    // partial sums of a rectified cosine converge like 1/m at the kinks
                    assert!(err < 2.0 * p.gamma0 / (PI * m as f64), "{c:?} at sample {s}: {err:e}");
                }
            }
        }
    }

    #[test]
    fn harmonics_reject_bad_sampling() {
        let p = reference_drive();
        assert!(drive_harmonics(&p, 64, 1000).is_err());
        assert!(drive_harmonics(&p, 64, 128).is_err());
        assert!(drive_harmonics(&p, 0, 128).is_err());
        assert!(drive_harmonics(&p, 16, 64).is_ok());
    }

    #[test]
    fn harmonics_of_real_functions_are_conjugate_symmetric() {
        let h = drive_harmonics(&DriveParams { phi: 0.3, ..reference_drive() }, 32, 256).unwrap();
        for c in Coupling::ALL {
            for n in 0..=32 {
                let d = h.coefficient(c, -n) - h.coefficient(c, n).conj();
                assert!(d.norm() < 1e-14);
            }
        }
    }

    fn params_strategy() -> impl Strategy<Value = DriveParams> {
        (0.0..2.0f64, 0.2..3.0f64, 0.0..1.5f64, -3.2..3.2f64, 0.05..3.0f64).prop_map(
            |(u0, lambda, gamma0, phi, omega)| DriveParams {
                u0,
                j0: 1.0,
                lambda,
                gamma0,
                phi,
                omega,
                a0: 1.0,
            },
        )
    }

    proptest! {
        #[test]
        fn half_period_swaps_sublattices(p in params_strategy(), frac in 0.0..1.0f64) {
            let t = frac * p.period();
            let now = drive_at(&p, t);
            let half = drive_at(&p, t - p.period() / 2.0);
            prop_assert_eq!(half.j1, now.j2);
            prop_assert_eq!(half.ua, now.ub);
            prop_assert_eq!(half.ga, now.gb);
            prop_assert!((half.j2 - now.j1).abs() < 1e-12);
            prop_assert!((half.ub - now.ua).abs() < 1e-12 * (1.0 + p.u0));
            prop_assert!((half.gb - now.ga).abs() < 1e-12 * (1.0 + p.gamma0));
        }

        #[test]
        fn periodic_and_physical(p in params_strategy(), frac in 0.0..1.0f64) {
            let t = frac * p.period();
            let a = drive_at(&p, t);
            let b = drive_at(&p, t + p.period());
            for c in Coupling::ALL {
                prop_assert!((a.get(c) - b.get(c)).abs() < 1e-12);
            }
            prop_assert!(a.j1 > 0.0 && a.j2 > 0.0);
            prop_assert!(a.ga >= 0.0 && a.gb >= 0.0);
        }

        #[test]
        fn hermitian_without_loss(p in params_strategy(), k in -PI..PI, t in 0.0..20.0f64) {
            let h = bloch_hamiltonian(&p.with_gamma0(0.0), k, t);
            prop_assert!(h.hermiticity_defect() == 0.0);
            // with loss the anti-Hermitian part is diag(-ga, -gb)
            let lossy = bloch_hamiltonian(&p, k, t);
            let ah = lossy.anti_hermitian_part();
            prop_assert!(ah[(0, 0)].re <= 0.0 && ah[(1, 1)].re <= 0.0);
            prop_assert!(ah[(0, 1)].norm() < 1e-15);
        }
    }
}
