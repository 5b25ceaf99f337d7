//! Sparse recovery with side information.
//!
//! The crate solves equality-constrained l1 recovery programs — plain
//! basis pursuit and its two side-information extensions, which add an l1
//! or squared-l2 similarity term toward a prior vector — and quantifies
//! when they succeed: closed-form upper bounds on the squared Gaussian
//! width of the relevant tangent cones, the measurement thresholds those
//! bounds imply, Monte-Carlo statistical-dimension estimates that verify
//! them, and reproducible phase-transition and similarity-weight sweeps.
//!
//! Modules:
//! - [`model`]: signals, priors, Gaussian ensembles, instance files.
//! - [`profile`]: per-component classification of a prior and the derived
//!   scalars the bounds consume.
//! - [`bounds`]: the width bounds, measurement thresholds, and the success
//!   probability floor.
//! - [`prox`]: closed-form proximal maps of the three penalties.
//! - [`solver`]: the splitting solver for the constrained programs.
//! - [`width`]: statistical-dimension estimation of the tangent cones.
//! - [`experiments`]: sweep protocols and their CSV output.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod model;
pub mod profile;
pub mod prox;
pub mod seed;
pub mod solver;
pub mod width;

pub use bounds::{
    all_bounds, cs_bound, l1l1_bound, l1l1_bound_for, l1l2_assumption, l1l2_bound,
    l1l2_bound_parts, lambda_m, minimal_measurements, success_probability_floor, BoundReport,
    Scheme,
};
pub use error::{Error, Result};
pub use experiments::{
    aggregate, run_beta_sweep, run_phase, standard_schemes, BetaSweepRecord, ExperimentRecord,
    PhaseConfig,
};
pub use model::{
    build_instance, generate_side_info, generate_signal, InstanceFile, MagnitudeLaw,
    MeasurementEnsemble, ProblemInstance, SideInfoSpec, SideInformation, SparseSignal,
    VarianceMode,
};
pub use profile::{
    classify, classify_with_tol, profile, profile_with_tol, ComponentClass, SideInfoProfile,
};
pub use solver::{
    solve, solve_system, AffineProjector, Objective, ObjectiveKind, RecoveryResult, SolverConfig,
};
pub use width::{
    dist_to_scaled_box, estimate_for_objective, estimate_statistical_dimension,
    subdifferential_box, SubdifferentialBox, WidthEstimate,
};
