//! Projected Baringhaus-Franz (pBF) two-sample test for functional data.
//!
//! The crate is organised around the pooled Gram matrix: curves go in
//! ([`curves`]), their pairwise inner products come out, and everything else
//! (the statistic, its permutation calibration, the spectral approximation of
//! its null law) works on that matrix alone.
//!
//! ```
//! use pbf::curves::{Curve, FunctionalSample};
//! use pbf::permute::permutation_test;
//! use pbf::statistic::PhiKind;
//!
//! let xs = vec![Curve::Coeff(vec![1.0, 0.0]), Curve::Coeff(vec![0.9, 0.1])];
//! let ys = vec![Curve::Coeff(vec![0.0, 1.0]), Curve::Coeff(vec![0.1, 1.2])];
//! let sample = FunctionalSample::from_groups(xs, ys, None).unwrap();
//! let result = permutation_test(&sample, PhiKind::L2, 99, 7).unwrap();
//! assert!(result.p_value > 0.0 && result.p_value <= 1.0);
//! ```

pub mod cli;
pub mod curves;
pub mod error;
pub mod harness;
pub mod permute;
pub mod rng;
pub mod simgen;
pub mod spectrum;
pub mod statistic;
pub mod stats;

pub use curves::{gram, Curve, FunctionalSample, GramMatrix, GridSpec, Labels, Quadrature};
pub use error::{Error, Result};
pub use permute::{permutation_test, TestResult};
pub use statistic::{pbf_statistic, PhiKind, StatisticValue};
