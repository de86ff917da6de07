//! Physical (t = 0) Floquet modes at one momentum, shared by the Floquet-matrix and
//! monodromy routes.

use crate::error::{Error, Result};
use crate::linalg::{fold, spinor_dot, Mat2, Spinor, C64};

/// Two Floquet modes at one `k`: quasienergies, mode functions `phi_a(0)` and their duals
/// with `<dual_a|right_b> = delta_ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePair {
    pub k: f64,
    pub quasienergies: [C64; 2],
    pub right: [Spinor; 2],
    pub dual: [Spinor; 2],
    /// Replica-diagonal Gram matrix `S_ab = sum_n <u_a^n|u_b^n>` of the harmonic
    /// components, used as spectral weights.
    pub gram: Mat2,
}

impl ModePair {
    /// Build from two right mode vectors; the duals are the rows of the inverse mode matrix.
    pub fn from_right(k: f64, quasienergies: [C64; 2], right: [Spinor; 2], gram: Mat2) -> Result<Self> {
        let phi = Mat2::from_columns(right[0], right[1]);
        let n0 = crate::linalg::spinor_norm(&right[0]);
        let n1 = crate::linalg::spinor_norm(&right[1]);
        let normalized_det = phi.det().norm() / (n0 * n1);
        if !(normalized_det > 1e-8) {
            return Err(Error::ExceptionalPoint {
                value: format!("{:?}", quasienergies[0]),
                overlap: normalized_det,
            });
        }
        let inv = phi.inverse().expect("nonsingular");
        let dual = [0, 1].map(|a| {
            let r = inv.row(a);
            [r[0].conj(), r[1].conj()]
        });
        Ok(ModePair {
            k,
            quasienergies,
            right,
            dual,
            gram,
        })
    }

    /// Real parts folded into `[-omega/2, omega/2)`.
    pub fn folded_re(&self, omega: f64) -> [f64; 2] {
        self.quasienergies.map(|e| fold(e.re, omega))
    }

    pub fn swapped(&self) -> Self {
        let g = &self.gram.0;
        ModePair {
            k: self.k,
            quasienergies: [self.quasienergies[1], self.quasienergies[0]],
            right: [self.right[1], self.right[0]],
            dual: [self.dual[1], self.dual[0]],
            gram: Mat2([[g[1][1], g[1][0]], [g[0][1], g[0][0]]]),
        }
    }

    /// `max_ab |<dual_a|right_b> - delta_ab|`.
    pub fn biorthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((spinor_dot(&self.dual[a], &self.right[b]) - want).norm());
            }
        }
        worst
    }

    /// Expansion coefficients `C_a = <dual_a|psi0>`.
    pub fn coefficients(&self, psi0: &Spinor) -> [C64; 2] {
        [0, 1].map(|a| spinor_dot(&self.dual[a], psi0))
    }
}
