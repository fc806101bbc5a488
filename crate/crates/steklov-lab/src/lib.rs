//! Numerical laboratory for the magnetic Steklov eigenproblem.
//!
//! The crate discretizes the quadratic form of the magnetic Laplacian
//! `(D + beta*A)^2` with P1 finite elements on triangulated model domains,
//! reduces it to a discrete Dirichlet-to-Neumann operator on the boundary
//! by Schur complement, and solves the generalized Hermitian eigenproblem
//! against the boundary mass matrix. Alongside the solver it provides the
//! Agmon metric machinery (the multiscale weight, the ball radius function,
//! weighted graph geodesics and their smooth regularization) used to audit
//! ground-state eigenvalue scaling and eigenfunction localization.

pub mod agmon;
pub mod config;
pub mod field;
pub mod geometry;
pub mod report;
pub mod solver;
pub mod vec2;
pub mod verify;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
