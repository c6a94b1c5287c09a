//! Semi-device-independent (SDI) witness analysis from wave-particle duality.
//!
//! The crate evaluates the (4,2,2) prepare-and-measure witness `S` for a
//! Mach-Zehnder interferometer closed by a tunable beam splitter, relates it
//! to the interferometric distinguishability `D` and visibility `V`
//! (`max S = 2(D + V)` for the symmetric strategy), certifies the classical
//! and quantum bounds numerically, evaluates both security criteria and
//! analyses photon-count scan data with Poisson error propagation.
//!
//! Modules, bottom-up:
//!
//! * [`qcore`]: exact 2x2 linear algebra, qubit states, binary observables,
//!   Born rule and Helstrom discrimination.
//! * [`interferometer`]: the optical matrix model and the operational
//!   `D`/`V` estimators.
//! * [`witness`]: preparations, tunable measurements, correlators, `S`, `P_B`
//!   and the duality decomposition.
//! * [`bounds`]: classical enumeration, see-saw quantum optimization, Eve's
//!   guessing probability and the security verdicts.
//! * [`dataio`]: scan CSV ingestion, synthetic data and `D`/`V` estimation
//!   with error bars.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`exec::Execution`].

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dataio;
mod error;
pub mod exec;
pub mod interferometer;
pub mod qcore;
pub mod search;
pub mod tol;
pub mod witness;

pub use error::{Error, Result};
