//! Numerical laboratory for cohomogeneity-one gradient Ricci solitons
//! `Ric + Hess f = λ g`.
//!
//! - [`curvature`]: curvature of diagonal (flat level set) and warped
//!   (Einstein fiber) metrics in the adapted orthonormal frame.
//! - [`flat`]: the first-order soliton system for flat level sets, its
//!   integration, profile reconstruction and residuals.
//! - [`riccati`]: closed-form steady solutions via the scalar Riccati equation.
//! - [`warped`]: the warped-product system and its reference solutions
//!   (Gaussian cone, round cylinder, Bryant soliton).
//! - [`identities`]: Hamilton's conservation law and the elliptic scalar
//!   curvature identity as monitors along any profile.
//! - [`dims`]: isometry-dimension bounds.
//! - [`cli`]: the `soliton-lab` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod curvature;
pub mod dims;
pub mod error;
pub mod flat;
pub mod identities;
pub mod integrator;
pub mod profile_io;
pub mod riccati;
pub mod warped;

pub use curvature::{
    curvature, curvature_warped, shape_traces, CurvatureReport, DiagonalProfile, TraceData,
    WarpedProfile,
};
pub use error::{Error, Result};
pub use flat::{
    integrate, reconstruct, rhs, soliton_residual, CoefficientConvention, FlatSolitonState,
    FlatTrajectory,
};
pub use integrator::{IntegrateOptions, IntegrationResult, Termination, Tolerances};
pub use riccati::{
    blowup_time, reduce, residual_closed_form, solve_riccati, CaseTag, ClosedFormSteady,
    RiccatiReduction,
};
pub use warped::{
    bryant_series_start, integrate_warped, rhs_warped, warped_to_profile, SolitonModel,
    WarpedSolitonState,
};
