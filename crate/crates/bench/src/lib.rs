//! Workloads shared by the benchmarks.

use nhfp_core::bands::uniform_k_grid;
use nhfp_core::dynamics::PropagateOptions;
use nhfp_core::{DriveParams, Input, Sublattice};

/// Lossy default drive plus its Hermitian counterpart.
pub fn drives() -> [(&'static str, DriveParams); 2] {
    let lossy = DriveParams::default();
    [("lossy", lossy), ("hermitian", lossy.with_gamma0(0.0))]
}

pub fn k_grid(n: usize) -> Vec<f64> {
    uniform_k_grid(n, 1.0)
}

/// A short open-chain run injected at the centre `A` site.
pub fn short_run(n_cells: usize) -> (Input, PropagateOptions) {
    let opts = PropagateOptions {
        n_cells,
        n_cycles: 1,
        ..PropagateOptions::default()
    };
    (Input { cell: n_cells / 2, sublattice: Sublattice::A }, opts)
}
