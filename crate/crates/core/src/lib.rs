//! Matrix symmetry as equivariance under a conjugated sign group.
//!
//! A real square matrix `A` is symmetric exactly when there is an orthogonal
//! `V` such that `A` commutes with every element of
//! `Γ = { Vᵀ σ V : σ diagonal with ±1 entries }`. This crate decides symmetry
//! that way ([`sign_group::symmetry_via_equivariance`]), builds and checks the
//! group `Γ`, and uses the group of a Hessian to form four-point stencils whose
//! value is `O(‖h‖⁴)` ([`stencil`]).
//!
//! Modules:
//! - [`linalg`]: dense matrices, Jacobi eigensolvers, the text matrix format.
//! - [`sign_group`]: sign patterns, `Γ`, equivariance decision procedures.
//! - [`expr`]: expression parser plus value/gradient/Hessian evaluation via
//!   dual and hyper-dual numbers.
//! - [`stencil`]: second differences, the four-point stencil, order fitting.
//! - [`demo`]: the worked three-variable example with its reference values.

pub mod demo;
pub mod expr;
pub mod linalg;
pub mod sign_group;
pub mod stencil;

pub use linalg::{ComplexMatrix, EigenDecomposition, JacobiOptions, RealMatrix};
pub use sign_group::{ConjugatedGroup, GroupElement, SignPattern};
