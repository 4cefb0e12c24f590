//! Numerical quasimeasure of noncompactness for bounded continuous functions
//! on `R^d`, a measure of nonconvexity for point clouds, Hammerstein integral
//! operators on a truncated grid and a fixed-point engine that certifies the
//! comparison inequalities along its iterates.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar for the common cases.
//!
//! ```
//! use qmn::{eta, FunctionEnsemble64, Grid64, SampledFunction64};
//!
//! let grid = Grid64::new(1, 1.0, 11).unwrap();
//! let members = [0.0, 0.25, 0.5, 0.75, 1.0]
//!     .iter()
//!     .map(|&c| SampledFunction64::constant(&grid, &[c]).unwrap())
//!     .collect();
//! let f = FunctionEnsemble64::new(members).unwrap();
//! assert_eq!(eta(&f, 1).unwrap(), 0.5);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod darbo;
pub mod ensemble;
pub mod error;
pub mod geometry;
pub mod hammerstein;
pub mod noncompactness;
pub mod sampling;
pub mod scalar;

pub use darbo::{
    certify, ensemble_iterate, picard_solve, picard_solve_with, Certificate, CertifyOptions, ComparisonFunction,
    DarboRecord, DarboTrace, EnsembleIteration, IterationAborted, PicardResult,
};
pub use ensemble::{
    convex_mix, make_saturating, restricted_distance, scale_ensemble, sup_distance, FunctionEnsemble, Grid, GridRef,
    SampledFunction, SaturatingSequence,
};
pub use error::{Error, Result};
pub use geometry::{
    hausdorff_distance, hull_distance, kcenter_radius, nonconvexity, HullProjection, KCenterMode, NonconvexityEstimate,
    PointCloud,
};
pub use hammerstein::{
    car4_norm, cone_check, estimate_q, solve_radius, Cone, HammersteinProblem, InnerProfile, Kernel, Nonlinearity,
    OuterFactor,
};
pub use noncompactness::{
    axiom_suite, axiom_suite_with, chi, chi0, eta, omega, omega0, quasimeasure, QuasimeasureParams, QuasimeasureReport,
};
pub use scalar::Scalar;

pub type PointCloud64 = PointCloud<f64>;
pub type Grid64 = Grid<f64>;
pub type SampledFunction64 = SampledFunction<f64>;
pub type FunctionEnsemble64 = FunctionEnsemble<f64>;
pub type SaturatingSequence64 = SaturatingSequence<f64>;
pub type QuasimeasureParams64 = QuasimeasureParams<f64>;
pub type HammersteinProblem64 = HammersteinProblem<f64>;
pub type DarboTrace64 = DarboTrace<f64>;

pub type PointCloud32 = PointCloud<f32>;
pub type Grid32 = Grid<f32>;
pub type SampledFunction32 = SampledFunction<f32>;
pub type FunctionEnsemble32 = FunctionEnsemble<f32>;
pub type SaturatingSequence32 = SaturatingSequence<f32>;
pub type QuasimeasureParams32 = QuasimeasureParams<f32>;
pub type HammersteinProblem32 = HammersteinProblem<f32>;
pub type DarboTrace32 = DarboTrace<f32>;
