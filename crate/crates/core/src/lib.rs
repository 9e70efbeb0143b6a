//! Computational tools for holomorphic bracket-generating distributions:
//! exact Lie-theoretic constructions for canonical flag domains, curvature
//! certificates, complex flows with Chow connectivity, distance estimators,
//! and checkers for the structure of hyperbolic homogeneous pairs.

#![allow(clippy::needless_range_loop)]

pub mod chart;
pub mod curvature;
pub mod distances;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod flows;
pub mod grading;
pub mod hyperbolicity;
pub mod lie;
pub mod linalg;
pub mod optim;

pub use error::{Error, Result};
