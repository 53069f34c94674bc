//! Desk-scale simulator for the radially/spherically symmetric viscous
//! shallow-water system with transported entropy, advanced in Lagrangian
//! mass coordinates, together with the diagnostics and verification
//! machinery for its conservation and entropy structure.

pub mod cli;
pub mod config;
pub mod error;
pub mod functionals;
pub mod initcond;
pub mod model;
pub mod snapshot;
pub mod solver;
pub mod verify;

pub use error::{Result, SimError};
