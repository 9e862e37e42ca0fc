//! Variable smoothing for nonsmooth, weakly convex composite problems over
//! parametrized sets, with a sparse spectral clustering application on the
//! Grassmann manifold.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision for common use.

pub mod clustering;
pub mod error;
pub mod experiment;
pub mod parametrization;
pub mod penalties;
pub mod scalar;
pub mod solver;
pub mod ssc_model;
pub mod toy;
pub mod verify;

pub use error::{Error, Result};
pub use parametrization::{BasisMatrix, CayleyAt, ParamPoint};
pub use penalties::{PenaltyKind, PenaltySpec};
pub use scalar::Scalar;
pub use solver::{SmoothedProblem, SolverConfig, SolverPoint, SolverTrace};
pub use ssc_model::SscProblem;

pub type PenaltySpec64 = PenaltySpec<f64>;
pub type PenaltySpec32 = PenaltySpec<f32>;
pub type ParamPoint64 = ParamPoint<f64>;
pub type ParamPoint32 = ParamPoint<f32>;
pub type BasisMatrix64 = BasisMatrix<f64>;
pub type BasisMatrix32 = BasisMatrix<f32>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type SscProblem64 = SscProblem<f64>;
pub type SscProblem32 = SscProblem<f32>;
pub type SscTrace64 = SolverTrace<f64, ParamPoint<f64>>;
