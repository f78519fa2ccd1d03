//! Numerical verification of the canonical expanding soliton construction
//! over exact Ricci flows, and of Harnack inequalities recast as membership
//! of the limit curvature in rank-constrained curvature cones.
//!
//! The crate is organised around the objects it verifies:
//!
//! * [`tensor`] — algebraic curvature tensors/forms on an inner-product
//!   space, the Λ² ↔ so(m) identification, Kulkarni–Nomizu products and
//!   complexified 2-vectors with rank.
//! * [`geometry`] — pointwise finite-difference differential geometry on
//!   coordinate charts: Christoffel symbols, curvature, Hessians,
//!   covariant derivatives and Laplacians.
//! * [`flows`] — a catalog of exact Ricci-flow solutions with closed-form
//!   curvature data.
//! * [`soliton`] — the expanding soliton metric built from a flow by
//!   treating time as a space direction, its closed-form geometry, the
//!   soliton defect, and the large-parameter limit objects.
//! * [`dynamics`] — the quadratic curvature reaction maps Q and F, the
//!   so(m) representation machinery, and a reference ODE integrator.
//! * [`cones`] — rank-constrained curvature cones: membership by
//!   alternating Hermitian minimization, boundary sampling, and the
//!   ODE-invariance checks at the boundary.
//! * [`harnack`] — Harnack verdicts (trace, matrix, rank-k) over the
//!   catalog models, plus reproducible JSON reports.



pub mod dynamics;
pub mod error;
pub mod flows;
pub mod geometry;

pub mod linalg;


pub mod tensor;
pub mod tol;

pub use error::{Error, Result};
