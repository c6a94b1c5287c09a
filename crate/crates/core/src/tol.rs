//! Tolerances shared across the crate.

/// Algebraic identities (traces, normalizations, closed-form comparisons).
pub const ALGEBRAIC: f64 = 1e-12;
/// Spectral statements (eigenvalues, squares of observables, orthonormality).
pub const SPECTRAL: f64 = 1e-10;
/// Results of numerical optimization.
pub const OPTIMIZATION: f64 = 1e-6;
/// Argument tolerance for one-dimensional extremum refinement.
pub const ARGUMENT: f64 = 1e-9;
/// Convergence threshold on the witness value for see-saw iterations.
pub const SEE_SAW: f64 = 1e-10;
