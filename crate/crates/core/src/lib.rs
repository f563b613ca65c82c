//! Explicit monotone solver for superquadratic viscous Hamilton-Jacobi
//! equations, together with the truncation, barrier, and scaling
//! diagnostics used to study interior Hölder regularity of its solutions.

// `!(x > y)` is deliberate throughout: it rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Stencil loops index several arrays by the same axis or cell.
#![allow(clippy::needless_range_loop)]

pub mod grid;
pub mod problem;
pub mod smoothstep;
pub mod diagnostics;
pub mod solver;
pub mod barrier;
pub mod scaling;
