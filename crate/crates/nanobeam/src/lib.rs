//! Phase-space reaction-rate analysis of a compressed two-mode nanobeam.
//!
//! A hinged nanobeam under compressive strain buckles; truncating the
//! Euler–Bernoulli dynamics to its first two transverse modes yields a
//! two-degree-of-freedom Hamiltonian whose two buckled configurations play the
//! role of isomers separated by a symmetry-determined dividing surface. This
//! crate scales physical beam parameters into that model and carries out the
//! full transport analysis on it:
//!
//! - [`beam`]: strain → (α, β) reduction, modal stability, physical
//!   energy/time scales;
//! - [`hamiltonian`]: potential, equations of motion, equilibrium catalogue;
//! - [`integrator`]: symplectic propagation and dividing-surface crossings;
//! - [`invariant_plane`]: the integrable planes, the normal-hyperbolicity
//!   energy bound and turning-point analysis;
//! - [`sampling`]: flux-measure sampling of the dividing surface, directional
//!   flux and reactant density of states;
//! - [`rates`]: gap-time ensembles, lifetime distributions, statistical and
//!   corrected rates, reactive-flux correlation, and gap-time maps.
//!
//! The numeric core is generic over the scalar type through [`real::Real`];
//! the aliases below fix `f64`, the supported production precision.

pub mod beam;
pub mod elliptic;
pub mod error;
pub mod hamiltonian;
pub mod integrator;
pub mod invariant_plane;
pub mod quad;
pub mod rates;
pub mod real;
pub mod sampling;

pub use error::{Error, Result};
pub use real::Real;

/// Beam geometry and material in SI units (`f64`).
pub type Beam = beam::PhysicalBeam<f64>;
/// Derived scaling constants (`f64`).
pub type Constants = beam::DerivedConstants<f64>;
/// Labelled strain preset (`f64`).
pub type Case = beam::StrainCase<f64>;
/// Dimensionless model parameters (α, β) (`f64`).
pub type Params = hamiltonian::ModelParams<f64>;
/// Dimensionless phase-space point (`f64`).
pub type State = hamiltonian::ScaledState<f64>;
/// Equilibrium point with classification (`f64`).
pub type Equilibrium = hamiltonian::Equilibrium<f64>;
/// Fixed-step propagation settings (`f64`).
pub type Integrator = integrator::IntegratorConfig<f64>;
/// A point on the forward dividing surface (`f64`).
pub type Sample = sampling::DsSample<f64>;
/// Estimate with standard error (`f64`).
pub type Estimate = sampling::McEstimate<f64>;
/// One launched trajectory and its gap time (`f64`).
pub type Gap = rates::GapRecord<f64>;
/// Ensemble rate summary (`f64`).
pub type Statistics = rates::GapStatistics<f64>;
