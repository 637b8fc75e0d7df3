//! Numerical toolkit for Kneser–Poulsen type inequalities: contraction
//! predicates, intersections of congruent balls and their spindle hulls,
//! exact planar measures, Monte Carlo measures, unconditional bodies, closed
//! form bounds and verification campaigns.

pub mod ball_bodies;
pub mod bounds;
pub mod circumball;
pub mod config;
pub mod error;
pub mod experiments;
pub mod measures;
pub mod par;
pub mod planar;
pub mod rng;
pub mod uncond;
pub mod vector;

pub use config::Configuration;
pub use error::{KpError, Result};
