//! Exact series engine for quantum and classical time-of-arrival observables.
//!
//! The crate builds the classical local arrival time `t_0(q, p)` from its
//! momentum recurrence, solves the time kernel equation for the quantum
//! arrival-time kernel `T(u, v)` as an exact power series, and connects the
//! two through the `T_hbar` transform and Weyl quantization. All symbolic work
//! is done over exact rationals; [`numeric`] holds the floating-point
//! validators (quadrature of the global arrival time, Poisson brackets).

pub mod error;
pub mod kernel;
pub mod numeric;
pub mod potential;
pub mod ratseries;
pub mod tables;
pub mod toa_local;
pub mod transforms;

pub use error::{Error, Result};
pub use kernel::{delta_table, solve_time_kernel, DeltaTable, TimeKernel};
pub use potential::PolynomialPotential;
pub use ratseries::{Monomial, Rational, Series, Space};
pub use toa_local::{local_toa_series, Arrival, LocalToaResult, TableSystem};
pub use transforms::{verify_correspondence, ComparisonReport, SystemClass};
