//! Simulation and fitting toolkit for an electrically tuned quantum dot
//! coupled to a photonic-crystal cavity.
//!
//! The crate follows one chain of models:
//!
//! bias voltage → Schottky depletion field ([`electrostatics`]) →
//! quantum-confined Stark shift → cavity-QED spectra ([`cqed`]) →
//! time-domain switching of a probe laser ([`switching`]),
//!
//! plus least-squares recovery of model parameters ([`fitting`]) and the
//! file/CLI plumbing ([`io`], [`cli`]).
//!
//! Units are fixed across the crate: lengths in μm, fields in V/μm,
//! energies in meV, optical rates and detunings in angular GHz (rad/ns),
//! times in ns and drive frequencies in MHz. All conversions go through
//! [`units`].

// NaN-rejecting comparisons like `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cqed;
pub mod electrostatics;
pub mod error;
pub mod fitting;
pub mod io;
pub mod switching;
pub mod units;

pub use error::{Error, Result};
