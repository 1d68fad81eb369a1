//! Divergence-stability analysis for Scott–Vogelius cubic velocity /
//! discontinuous quadratic pressure pairs on 2D triangulations.
//!
//! The pipeline runs [`mesh`] → [`classify`] → [`trees`] → [`solver`]; the
//! [`fields`] module builds the explicit local velocity fields and checks
//! their properties by exact polynomial evaluation.

pub mod classify;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod mesh;
pub mod report;
pub mod solver;
pub mod suite;
pub mod svg;
pub mod trees;

pub use error::{Error, Result};
