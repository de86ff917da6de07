//! Floquet band theory and real-space dynamics of the driven lossy Rice-Mele lattice.

pub mod bands;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod model;
pub mod modes;
pub mod oracle;

pub use bands::{gap, uniform_k_grid, winding_number, Band, BandStructure, Winding};
pub use dynamics::{center_of_mass, norm_decay, propagate, spacetime_spectrum, Input, PropagateOptions, Trajectory};
pub use error::{Error, Result};
pub use floquet::scan::{gap_scan, GapCell, GapScanOptions, GapScanResult};
pub use floquet::spectral::{expansion_coefficients, pumped_shift, spectral_density, SpectralInput, SpectralMap};
pub use floquet::{build_floquet_matrix, FloquetEigensystem, FloquetProblem};
pub use linalg::{Mat2, Spinor, C64};
pub use model::{bloch_hamiltonian, drive_at, realspace_hamiltonian, Boundary, DriveParams, Sublattice};
pub use modes::ModePair;
