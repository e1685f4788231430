//! Two-photon decay of hydrogen-like and helium-like ions.
//!
//! Second-order perturbation theory on top of the Dirac-Coulomb problem:
//! discrete pseudo-spectra from a dual-kinetic-balance B-spline basis,
//! electric/magnetic multipole matrix elements, and photon-photon angular
//! correlation functions W(theta, y) for arbitrary multipole truncation.

pub mod angular;
pub mod multipole;
pub mod specfun;
pub mod spectrum;
pub mod twophoton;
pub mod units;

pub use twophoton::{
    CorrelationResult, Engine, RateResult, TransitionKind, TransitionSpec, Truncation,
};
