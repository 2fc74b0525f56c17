//! Numerics for the Hardy–Trudinger–Moser problem on the unit disc.
//!
//! Radial functions live on graded grids over `(0, 1)` and are discretized by
//! piecewise-linear elements. On top of that sit the Hardy forms and their
//! first eigenvalue, the subcritical maximizers and their blow-up diagnostics,
//! the Hardy Green function with its regular constant `A0`, annulus capacity,
//! and the explicit test functions whose energy beats the blow-up threshold.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubble;
pub mod capacity;
pub mod error;
pub mod extremal;
pub mod forms;
pub mod function;
pub mod green;
pub mod grid;
pub mod quadrature;
pub mod testfn;
pub mod tridiag;

pub use error::{Error, Result};
pub use forms::{assemble_forms, QuadraticForms};
pub use function::RadialFunction;
pub use grid::{build_grid, RadialGrid};
