//! Spectral machinery for diffusion state estimation on an interval or the
//! unit square: Dirichlet eigenbases (global or adapted to a subregion),
//! semigroup evolution, sensor output models, and the two observability
//! tests (group-wise rank test and regional Gramian), together with the
//! 1D pointwise case study and the sensor-placement screening predicates.
//!
//! Everything is deterministic and allocation-light; matrices are dense
//! `nalgebra` types sized by the truncation order.

pub mod basis;
pub mod casestudies;
pub mod domain;
pub mod error;
pub mod observability;
pub mod quad;
pub mod sensors;
pub mod state;

pub use basis::{build_basis, inner_product_region, Convention, EigenBasis, Mode, ModeIndex};
pub use casestudies::{
    corollary_41_predicate, corollary_42_predicate, corollary_43_predicate, counterexample_1d,
    multiplicity_condition_29, rational_detect, tan_condition, AxisHit, CorollaryReport,
    CounterExampleReport, RationalWitness, TanCondition,
};
pub use domain::{DomainSpec, Edge, Point, Region};
pub use error::{Error, Result};
pub use observability::{
    default_region_truncation, group_eigenvalues, kernel_witness, observability_constant,
    rank_test, reconstruct_initial_state, regional_gramian, Gramian, GroupMatrix, GroupedSpectrum,
    Method, Reconstruction, StrategicReport, Thresholds,
};
pub use sensors::{output_matrix, output_row, simulate_output, EvenShape, OutputMatrix,
    OutputTrajectory, Profile, Sensor, SensorGeometry, SensorSuite};
pub use state::{evolve, evolve_with_input, eval_state, restrict, PiecewiseConstant, SpectralState,
    TimeGrid};
