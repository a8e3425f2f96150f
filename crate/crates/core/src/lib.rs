//! Point counting, local densities and sieve experiments on affine quadrics
//! `q(x) = m`.
//!
//! The building blocks are [`forms`] (exact quadratic form arithmetic),
//! [`localcount`] (counts modulo prime powers and local densities),
//! [`lattice`] (integer points of bounded height), [`geosieve`] (prime-window
//! tail counts and coprimality) and [`halfsieve`] (binary form values along
//! a box). [`experiment`] ties them to CSV/JSON reports.

pub mod arith;
pub mod cache;
pub mod error;
pub mod experiment;
pub mod forms;
pub mod geosieve;
pub mod halfsieve;
pub mod lattice;
pub mod localcount;
pub mod poly;
pub mod report;

pub use error::{Error, Result};
pub use experiment::{ExperimentSpec, Kind};
pub use forms::{AffineQuadricInstance, BinaryForm, QuadraticForm, Rational};
pub use lattice::{HeightWindow, Norm};
pub use localcount::ClosedSubsetSpec;
pub use report::SieveReport;
