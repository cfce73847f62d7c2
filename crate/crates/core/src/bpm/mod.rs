//! Continuous waveguide array: paraxial beam propagation with a transverse
//! index gradient.
//!
//! The field obeys the Schrödinger-form paraxial equation
//!
//! ```text
//! i du/dz = -(1 / 2 k n_s) d^2u/dx^2 - k [dn(x) + F x] u
//! ```
//!
//! All lengths are in micrometres; the gradient `F` is an index change per
//! micrometre (`F[cm^-1] = 1e4 F[um^-1]`).

mod mode;
mod model;
mod propagate;

pub use mode::{solve_fundamental_mode, ModeProfile};
pub use model::{bloch_period, build_index_profile, BpmGrid, BpmModel};
pub use propagate::{bpm_propagate, BpmOptions, BpmRun, FieldSnapshots};

/// Micrometres per centimetre.
pub const UM_PER_CM: f64 = 1.0e4;
