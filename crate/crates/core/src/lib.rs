//! Coherence of optical cat states coupled to waveguide-lattice baths.
//!
//! The core is generic over the floating-point type through [`Real`]; the
//! unparameterized aliases at the crate root fix it to `f64`.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bpm;
pub mod cat;
pub mod error;
pub mod lattice;
pub mod revival;
pub mod scalar;
pub mod special;
pub mod spectrum;
pub mod tridiag;

pub use cat::{
    coherence_factor, coherent_overlap, estimate_g_from_counts, fringe_visibility, mixture_probability,
    photon_number_distribution, reduced_density_matrix, wigner_at, wigner_function,
};
pub use error::{Error, Result};
pub use lattice::{
    build_defect_lattice, build_ramp_lattice, hamiltonian_matrix, propagate, propagate_state, required_truncation,
    uniform_grid, PhaseConvention,
};
pub use revival::{detect_revivals, mean_spacing, zener_damping};
pub use scalar::Real;
pub use spectrum::{asymptotics, coupling_threshold, find_bound_states, golden_rule_rate, markovian_rate};

pub type LatticeModel = lattice::LatticeModel<f64>;
pub type LatticePropagator = lattice::LatticePropagator<f64>;
pub type PropagationResult = lattice::PropagationResult<f64>;
pub type BlochBath = spectrum::BlochBath<f64>;
pub type BoundState = spectrum::BoundState<f64>;
pub type BoundStateSet = spectrum::BoundStateSet<f64>;
pub type Asymptotics = spectrum::Asymptotics<f64>;
pub type Peak = revival::Peak<f64>;
pub type ZenerDamping = revival::ZenerDamping<f64>;
pub type CatState = cat::CatState<f64>;
pub type CoherenceTrace = cat::CoherenceTrace<f64>;
pub type ReducedCatState = cat::ReducedCatState<f64>;
pub type WignerMap = cat::WignerMap<f64>;
pub type BpmModel = bpm::BpmModel<f64>;
pub type BpmGrid = bpm::BpmGrid<f64>;
pub type BpmOptions = bpm::BpmOptions<f64>;
pub type BpmRun = bpm::BpmRun<f64>;
pub type ModeProfile = bpm::ModeProfile<f64>;
pub type SymTridiagonal = tridiag::SymTridiagonal<f64>;

pub type LatticeModelF32 = lattice::LatticeModel<f32>;
pub type PropagationResultF32 = lattice::PropagationResult<f32>;
pub type BlochBathF32 = spectrum::BlochBath<f32>;
pub type CatStateF32 = cat::CatState<f32>;
