//! Quadratic profile of the uncertainty in `r`, near-reversible criterion, and global search.

mod profile;
mod search;
mod sweep;

pub use profile::{carnot_criterion, quadratic_profile, CarnotEstimate, QuadraticProfile, CARNOT_STEPS};
pub use search::{minimize_q, multi_start, nelder_mead, Bound, Minimum, Optimum, SearchOptions, CARNOT_GUARD};
pub use sweep::{sweep, GridAxis, StudySpec, SweepRow, SweepTable, SWEEP_FORMAT_VERSION};
