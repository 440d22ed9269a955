//! Low-order Galerkin boundary elements for the Laplace and time-harmonic
//! Maxwell equations, together with the machinery to validate them:
//! Calderón-identity residuals, manufactured-solution error studies,
//! deterministic fault injection, and convergence-rate verdicts.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] — sphere and cube surface meshes and refinement;
//! * [`spaces`] — P0, P1, RWG and SNC spaces, interpolation and projection;
//! * [`quadrature`] — regular and Sauter–Schwab singular rules;
//! * [`galerkin`] — the dense matrix type and the assembly engine;
//! * [`laplace_ops`], [`maxwell_ops`] — boundary integral operators;
//! * [`solutions`] — manufactured solutions with closed-form traces;
//! * [`residuals`] — Calderón residuals and MMS solves;
//! * [`faults`] — artificial diagonal defects;
//! * [`linalg`] — CG, GMRES, LU, symmetric eigenvalues, energy norms;
//! * [`rates`] — rate fitting and verdicts;
//! * [`cli`] — the experiment runner behind the `calderon-lab` binary.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod faults;
pub mod galerkin;
pub mod laplace_ops;
pub mod linalg;
pub mod maxwell_ops;
pub mod mesh;
pub mod quadrature;
pub mod rates;
pub mod residuals;
pub mod solutions;
pub mod spaces;

pub use error::{Error, Result};
