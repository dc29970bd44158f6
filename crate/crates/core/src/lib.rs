//! Numerical verification of the spectrum of the linearized operators at
//! the ground state of the coupled cubic system in three dimensions.
//!
//! The crate computes the radial ground state `Q` of `-Δψ + ψ - ψ³ = 0`,
//! builds the scalar operators `L_c = -Δ + 1 - c Q²` (with `c = (3-β)/(1+β)`
//! for the family `L_β`), and checks their discrete spectrum, the threshold
//! behaviour at `λ = 1`, and the algebraic identities relating the coupled
//! system to its diagonal form.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ground_state;
pub mod hermite;
pub mod ode;
pub mod operators;
pub mod report;
pub mod resonance;
pub mod spectral;
pub mod system;
pub mod tolerances;

pub use error::{Error, Result};
pub use ground_state::{solve_ground_state, QPoint, QProfile};
pub use ode::{RadialGrid, RadialSolution};
pub use operators::{coupling_coefficient, effective_beta, MatrixOperatorSpec, OperatorSpec};
pub use report::{run_pipeline, RunConfig, SpectrumReport};
pub use resonance::{ResonanceResult, SturmRecord};
pub use spectral::{EigenMethod, EigenResult};
pub use system::CandidatePair;
