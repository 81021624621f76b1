//! Pseudospectral simulator for the nonlinear Schrödinger equation
//! `i∂ₜu + ½Δu = λ|u|^{p-1}u` on a periodic box, with diagnostics that check
//! the conservation laws, the virial identity and the pseudo-conformal law
//! as residual time series.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are what the command-line tool uses.

// `!(x > 0)` is how the validators reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod nonlinearity;
pub mod propagator;
pub mod report;
pub mod scalar;
pub mod scenarios;
pub mod solver;

pub use diagnostics::{sample, DiagnosticSample, InitialData};
pub use error::{Error, Result};
pub use grid::{Field, Grid, Spectrum};
pub use nonlinearity::Nonlinearity;
pub use report::{IdentityResidual, ResidualReport, ToleranceModel};
pub use scalar::Real;
pub use scenarios::{BlowupVerdict, ScenarioKind, ScenarioSpec};
pub use solver::{ConvergenceFit, Integrator, RunConfig, RunOutcome, TimeSeries};

pub use num_complex::Complex;

pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type Nonlinearity64 = Nonlinearity<f64>;
pub type RunConfig64 = RunConfig<f64>;
pub type TimeSeries64 = TimeSeries<f64>;
pub type DiagnosticSample64 = DiagnosticSample<f64>;
pub type ResidualReport64 = ResidualReport;

pub type Grid32 = Grid<f32>;
pub type Field32 = Field<f32>;
pub type RunConfig32 = RunConfig<f32>;
