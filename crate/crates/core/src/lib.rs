//! Crossings and nestings of random matchings.
//!
//! Exact tables by enumeration, Toeplitz and Toeplitz-minus-Hankel
//! determinants at arbitrary precision, orthogonal polynomials on the unit
//! circle, the Hastings–McLeod solution of Painlevé II with the Tracy–Widom
//! laws it generates, and Monte Carlo for non-intersecting walks.

pub mod combinat;
pub mod error;
pub mod exec;

pub use error::{Error, Result};
pub use exec::Exec;
pub mod bigreal;
pub mod moments;
pub mod detkernel;
pub mod opflow;
pub mod quadrature;
pub mod painleve;
pub mod asympt;
pub mod walks;
