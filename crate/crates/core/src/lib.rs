//! Spontaneous Raman scattering from coherently driven cavity-QED systems in
//! the ultrastrong coupling regime.
//!
//! The crate builds the dipole-gauge quantum Rabi Hamiltonian (plus a weakly
//! coupled sensor qubit), assembles a dressed-state master equation with a
//! periodic drive, solves for the time-averaged steady state with a Floquet
//! continued-fraction recursion, and reads emission spectra off the sensor.
//! An independent golden-rule module predicts Raman line positions and rates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dense;
pub mod dissipation;
pub mod error;
pub mod floquet;
pub mod model;
pub mod operators;
pub mod problem;
pub mod propagate;
pub mod raman;
pub mod spectrum;
pub mod sweep;
pub mod cli;
pub mod config;
pub mod output;
pub mod verify;

pub use error::{Error, Result};
