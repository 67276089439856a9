//! Spectral analysis of parametrized complex-symmetric Hamiltonians.
//!
//! The library models families of N-level Hamiltonians
//! `H(a) = diag(e_i(a) - (i/2) gamma_i) - W` with a real symmetric coupling
//! matrix `W`, tracks their complex eigenvalue/eigenvector trajectories under
//! the tuning parameter `a`, locates branch points (exceptional points) where
//! two eigenvalues coalesce, classifies avoided vs. free level crossings, and
//! quantifies wave-function mixing and bi-orthogonality.
//!
//! The `epscope` binary exposes this as `sweep`, `locate-ep` and `figure`
//! subcommands emitting deterministic CSV (and optional SVG) datasets.

pub mod config;
pub mod diagnostics;
pub mod eigen;
pub mod epfinder;
pub mod figures;
pub mod model;
pub mod output;
pub mod sweep;

pub use model::{ComplexMatrix, EnergyLaw, LevelSpec, ModelSpec};

/// Default tolerance for diagnostics checks, overridable via config or the
/// `EPSCOPE_TOLERANCE` environment variable.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
