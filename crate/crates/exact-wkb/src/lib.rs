//! Exact WKB analysis on the Riemann sphere: formal WKB series, continuation
//! of their Borel transforms along paths on the spectral curve, Stokes graphs
//! and Borel-Laplace resummation.

pub mod error;
pub mod hbar_series;
pub mod jet;
pub mod ode;
pub mod borel_engine;
pub mod cli;
pub mod poly;
pub mod potential;
pub mod quad;
pub mod resummation;
pub mod spectral;
pub mod trajectories;
pub mod wkb;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
