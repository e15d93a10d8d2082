//! Numerical analysis toolkit for a three-species predator-prey system
//! with Beddington-DeAngelis functional responses.
//!
//! One prey species supports two predators; the prey grows quasi-linearly
//! (saturating, never self-limiting to zero) and each predator feeds
//! through a response with mutual interference. The crate computes:
//!
//! - the exact vector field with hand-coded first and second derivatives
//!   ([`model`]),
//! - every equilibrium in closed form with feasibility diagnostics
//!   ([`equilibria`]),
//! - characteristic-polynomial and Routh-Hurwitz classification plus the
//!   persistence/boundedness/stability condition checkers ([`stability`]),
//! - the Hopf bifurcation point in the prey growth rate and the
//!   center-manifold quantity deciding the bifurcating cycle's stability
//!   ([`hopf`]),
//! - adaptive trajectory integration, attractor classification, parameter
//!   sweeps and convergence experiments ([`dynamics`]),
//! - a command-line front end with deterministic JSON/CSV reports
//!   ([`cli`]).
//!
//! The numerical core is generic over the scalar type through
//! [`scalar::Real`] (`f32` or `f64`); the aliases below pin the common
//! `f64` instantiations used by the CLI and the reports.

pub mod cli;
pub mod cubic;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod hopf;
pub mod linalg;
pub mod model;
pub mod presets;
pub mod reference;
pub mod scalar;
pub mod stability;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` instantiations of the core types.
pub type Params64 = model::Params<f64>;
pub type State64 = model::State<f64>;
pub type Deriv64 = model::Deriv<f64>;
pub type Jacobian64 = model::Jacobian3<f64>;
pub type Hessian64 = model::HessianTensor<f64>;
pub type Equilibrium64 = equilibria::Equilibrium<f64>;
pub type CharPoly64 = stability::CharPoly<f64>;
pub type StabilityReport64 = stability::StabilityReport<f64>;
pub type ConditionReport64 = stability::ConditionReport<f64>;
pub type HopfSearchResult64 = hopf::HopfSearchResult<f64>;
pub type CenterManifoldReport64 = hopf::CenterManifoldReport<f64>;
pub type IntegratorConfig64 = dynamics::IntegratorConfig<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type CycleEstimate64 = dynamics::CycleEstimate<f64>;
pub type SweepResult64 = dynamics::SweepResult<f64>;
