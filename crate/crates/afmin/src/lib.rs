//! Descent solvers for linear inverse problems, built around one template:
//! at each step, minimize the objective plus a nonnegative auxiliary term
//! that vanishes at the previous iterate.
//!
//! The crate provides:
//!
//! * [`distances`] — KL, Hellinger, Pearson φ², weighted squared distances,
//!   plus the Bregman and φ-divergence constructions that generate them;
//! * [`model`] — problem instances, column normalization, and the coupling
//!   arrays the alternating solvers move through;
//! * [`framework`] — the generic descent loop, the alternating/proximal/
//!   majorization views of a method with adapters between them, and sampled
//!   monitors for the inequalities that certify convergence to the infimum;
//! * [`solvers`] — the concrete steps (landweber, weighted least-squares
//!   relaxation, and the four multiplicative KL-family operators) with
//!   full-solve drivers;
//! * [`diagnostics`] — numerical verification of the distance identities,
//!   monotonicity properties, limit characterizations, and the open-question
//!   probes, against independent oracles;
//! * [`synth`] — seeded random instances for sweeps.
//!
//! Sweeps and monitors run data-parallel over samples when the `parallel`
//! feature (default) is enabled; see [`exec`].

pub mod diagnostics;
pub mod distances;
pub mod error;
pub mod exec;
pub mod framework;
pub mod model;
pub mod report;
pub mod solvers;
pub mod synth;

pub use error::{Error, Result};
pub use report::CheckReport;
