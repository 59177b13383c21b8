//! Dynamic information design by backward induction over common-information
//! nodes, one linear program per node.
//!
//! Everything numeric is generic over [`Scalar`] (`f64` or `f32`); the
//! aliases below fix the common `f64` case.

pub mod beliefs;
pub mod error;
pub mod generate;
pub mod index;
pub mod lp;
pub mod model;
pub mod report;
pub mod scalar;
pub mod solver;
pub mod verify;

pub use error::{Diagnostic, Error, Result};
pub use scalar::Scalar;

pub type Spec = model::ProblemSpec<f64>;
pub type Tree = beliefs::CommonTree<f64>;
pub type Solution = solver::DesignerSolution<f64>;
pub type Lp = lp::LinearProgram<f64>;
pub type LpSolution = lp::LPSolution<f64>;

pub type Spec32 = model::ProblemSpec<f32>;
pub type Solution32 = solver::DesignerSolution<f32>;
