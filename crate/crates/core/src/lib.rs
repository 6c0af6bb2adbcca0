//! Numerical laboratory for Dirichlet problems driven by truncated
//! Laplacians 𝒫ₖ± — the partial sums of the ordered Hessian eigenvalues.
//!
//! The crate provides exact operator evaluation on small symmetric matrices
//! ([`matrix`]), closed-form and quadrature radial solutions with drift
//! ([`radial`]), convex-domain classification and barrier constructions
//! ([`geometry`]), a monotone wide-stencil grid solver with blow-up
//! detection ([`solver`]), and principal-eigenvalue estimation ([`eigen`]).

pub mod eigen;
pub mod error;
pub mod geometry;
pub mod grid;
mod la;
pub mod matrix;
pub mod quad;
pub mod radial;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
