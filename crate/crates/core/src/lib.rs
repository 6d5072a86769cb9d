//! Steady states, photon-current statistics and the thermodynamic uncertainty of
//! virtual-qubit thermal machines.
//!
//! A machine is a [`ModelSpec`]: a finite level set, one driven transition (the virtual
//! qubit `|Φ0⟩, |Φ1⟩`), a coupling `g` and a list of thermal reservoirs. The main entry
//! points are
//!
//! - [`validate_model`] for structural and thermodynamic admissibility,
//! - [`steady_report`] for the perturbative steady-state pieces,
//! - [`evaluate`] for currents, entropy production and `Q = Q_d + Q_c`,
//! - [`fcs::cumulants_numeric`] for the counting-statistics cross-check,
//! - [`optimize`] for profiles, sweeps and searches.
//!
//! ```
//! use turbox::{evaluate, zoo};
//!
//! let m = zoo::driven_qubit(1.0, 0.3, 0.25, 0.0).unwrap();
//! let rep = evaluate(&m).unwrap();
//! assert!(rep.Q_d >= 2.0);
//! ```

pub mod cli;
pub mod error;
pub mod family;
pub mod fcs;
pub mod linalg;
pub mod liouvillian;
pub mod model;
pub mod optimize;
pub mod steady;
pub mod tur;
pub mod validate;
pub mod zoo;

pub use error::{Error, Result};
pub use family::{params, Constraint, Family, Params};
pub use fcs::{cumulants_exact, cumulants_numeric, lambda_curve, tilted_liouvillian, ExactCumulants, FcsResult};
pub use linalg::{DenseOp, Superoperator, TOL_ABS, TOL_PSD, TOL_REL};
pub use liouvillian::{assemble_liouvillian, build_dissipator, population_generator, rotating_hamiltonian};
pub use model::{ModelDoc, ModelSpec, Reservoir, ReservoirDoc};
pub use steady::{
    coherent_block, coupling_for_ratio, diagonal_steady_state, full_steady_state, solve_xi, steady_report,
    strong_coupling_state, thermal_fixed_point, SteadyReport,
};
pub use tur::{
    classical_counterpart, currents, entropy_production, evaluate, uncertainty, variance_decomposition, TurReport,
};
pub use validate::{decoherence_rate, derive_photon_counts, validate_model, ValidationReport};
