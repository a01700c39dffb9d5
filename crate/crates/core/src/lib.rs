//! Numerical core for one-bit sensing on the unit sphere.
//!
//! Points live on the sphere `S^n` in `R^{n+1}`. A collection of random
//! directions `θ_1, …, θ_m` induces the one-bit map `x ↦ sgn(⟨θ_j, x⟩)`
//! into the Hamming cube, and this crate provides the pieces needed to
//! measure how well that map preserves the normalized geodesic distance
//! `d(x, y) = arccos(x·y) / π`:
//!
//! * [`sphere`]: unit vectors, geodesics, wedges, transversal separation
//!   and the random samplers (uniform sphere, sparse, convex-sparse).
//! * [`onebit`]: measurement ensembles, sign patterns, Hamming distance,
//!   the linear `ℓ¹` map and the sign-product statistic.
//! * [`nets`]: greedy packings and coverings, nearest-center projection and
//!   brute-force VC checks for spherical caps.
//! * [`processes`]: gaussian and hemisphere mean widths, the symmetrized
//!   wedge process and Sudakov-type entropy checks.
//! * [`verify`]: small-cell, margin, RIP and embedding checks.
//!
//! The crate is `no_std` (it needs `alloc`). All randomness is drawn from
//! caller-supplied generators; [`rng::stream`] derives independent,
//! reproducible ChaCha streams from a master seed.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod linalg;
pub mod nets;
pub mod onebit;
pub mod processes;
pub mod rng;
pub mod sphere;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use onebit::{EnsembleKind, MeasurementEnsemble, SignPattern, LAMBDA};
pub use sphere::{Geodesic, PointSet, PointSource, SparseSpec, UnitVector};
