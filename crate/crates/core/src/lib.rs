//! Maximal solutions of Chern-Simons-Higgs type equations on finite weighted
//! graphs by monotone upper/lower-solution iteration, and location of the
//! critical coupling `λ_c` by bisection.
//!
//! Modules, bottom up:
//!
//! * [`graph`], [`calculus`]: weighted graphs with measure and their discrete
//!   calculus (μ-Laplacian, gradient form, integral, `W^{1,2}` norm);
//! * [`scalar`]: the map `g` and the two reaction terms;
//! * [`linear`]: the mean-zero Poisson solve and the shifted solve `(Δ − K)ψ = b`;
//! * [`solver`]: the monotone scheme, `λ_c` bisection and diagnostics.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod families;
pub mod graph;
pub mod linear;
pub mod scalar;
pub mod solver;
mod sparse;

pub use calculus::{
    check_max_principle, estimate_poincare_constant, gradient_form, integrate, laplacian,
    sobolev_norm, MaxPrincipleCheck, MaxPrincipleVerdict,
};
pub use error::{Error, Result};
pub use graph::{GraphFile, VertexFunction, Volume, WeightedGraph};
pub use linear::{dirac_source, solve_poisson, PoissonProblem, ShiftedOperator};
pub use scalar::{
    f_forward, g_inverse, lipschitz_bound, nonlinearity, Nonlinearity, NonlinearityKind,
};
pub use solver::{
    constant_lower_solution, diagnostics, find_critical, iterate_step, residual, solve_at,
    solve_at_critical, solve_reduced, CriticalOptions, CriticalResult, CriticalSolution,
    DiagnosticReport, Instance, IterationState, ProblemSpec, Reduced, Scheme, SolveOptions,
    SolveOutcome, Status, TraceEntry,
};
