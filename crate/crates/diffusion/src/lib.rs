//! Simulation of Brownian motion with periodic drift on Euclidean covers
//! `R^d -> T^d`: the Euler-Maruyama stepper, first-passage stopping times,
//! exit/balayage/sojourn estimators, and path lifting along the projection.
//!
//! Points are carried as (deck cell, fundamental-domain fraction), which
//! makes every estimator deck-equivariant bit-for-bit under RNG stream
//! replay.

pub mod bins;
pub mod drift;
pub mod estimators;
pub mod events;
pub mod kernels;
pub mod lift;
pub mod point;
pub mod region;
pub mod sim;

pub use bins::BoundaryBins;
pub use drift::DriftModel;
pub use point::CoverPoint;
pub use region::{RegionKind, RegionSpec};
