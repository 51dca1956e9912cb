//! Numerical laboratory for the large-time behaviour of unbounded viscosity
//! solutions of Hamilton-Jacobi equations `u_t + H(x, Du) = 0` in one space
//! dimension.
//!
//! * [`grid`]: grids, piecewise-linear sampled functions, window norms.
//! * [`hamiltonian`]: Hamiltonian families, convex conjugate, gauge,
//!   Kruzhkov transform, the strong-convexity check.
//! * [`variational`]: Oleinik-Lax solver, minimizer backtracking, staircase data.
//! * [`fd`]: monotone Lax-Friedrichs evolution and the `‖u_t‖∞` diagnostic.
//! * [`ergodic`]: Dirichlet ball problems and the bracket on `λ_min`.
//! * [`experiments`]: scripted reproductions with pass/fail verdicts.
//! * [`cli`]: the `hjlab` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ergodic;
pub mod error;
pub mod experiments;
pub mod fd;
pub mod grid;
pub mod hamiltonian;
pub mod numerics;
pub mod variational;

pub use error::{HjError, Result};
pub use grid::{interpolate, sup_norm_window, Extension, Grid1D, SampledFn, Window};
pub use hamiltonian::{
    check_h4, eval_hamiltonian, gauge_of_sublevel, kruzhkov, legendre_transform, H4Report,
    H4Status, HamiltonianSpec, KruzhkovDirection, LagrangianValue,
};
pub use variational::{
    backtrack_minimizer, build_staircase_u0, hopf_lax_evaluate, hopf_lax_solve, StaircaseSpec,
    TrajectoryResult,
};
