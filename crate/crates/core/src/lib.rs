//! 1D finite-element toolkit for fractional-order Sobolev spaces.
//!
//! The crate assembles discrete inner products (Gram operators) for three
//! realizations of a fractional-order space on an interval — the integral
//! form on the whole line restricted to functions vanishing outside the
//! domain, the integral form on the domain only, and the spectral form
//! built from Dirichlet–Laplacian eigenpairs — and provides on top of them:
//!
//! * relaxed Dirichlet solves against nodal capacitary measures, torsion
//!   functions, fractional capacities of node sets, and the reconstruction
//!   of a measure from its torsion function ([`measures`]);
//! * a γ-convergence sequence harness witnessing that convergence of
//!   torsion functions controls convergence of all solutions ([`gamma`]);
//! * smoothing families for the `L^p` pseudo-norm, `0 ≤ p < 1`
//!   ([`smoothing`]);
//! * the reweighted (difference-of-convex) iteration for tracking-type
//!   objectives with `L^p` sparsity, including multiplier and measure
//!   extraction, optimality reports, and a `p → 0` continuation
//!   ([`solver`]).
//!
//! All meshes are uniform partitions of an interval with P1 elements and
//! homogeneous boundary conditions; degrees of freedom are the interior
//! nodes. Matrices are dense ([`nalgebra`]), which is the natural regime for
//! fractional operators.

pub mod error;
pub mod fe;
pub mod gamma;
pub mod gram;
pub mod measures;
pub mod mesh;
pub mod quadrature;
pub mod smoothing;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use fe::{
    l2_inner, lp_integral, lumped_masses, mass_matrix, stiffness_matrix, support_measure,
};
pub use gamma::{gamma_sequence_test, GammaSequenceReport};
pub use gram::{
    assemble, assemble_integral_omega, assemble_integral_tilde, assemble_spectral, gram_inner,
    offered_kinds, seminorm_oracle, GramOperator, SpaceKind, SpectralBasis,
};
pub use measures::{
    capacity, check_k_membership, measure_from_z, relaxed_dirichlet_solve, torsion_z,
    CapacityResult, MembershipReport, NodalMeasure, RelaxedDirichletSolution, RhsData,
};
pub use mesh::{FeFunction, Mesh1D};
pub use smoothing::{g_eps, g_eps_quadrature, SmoothingFamily};
pub use solver::{
    dc_solve, multiplier_lambda, mu_from_solution, optimality_report, p_to_zero_continuation,
    ContinuationReport, InitGuess, OptimalityReport, ProblemConfig, SolveReport,
};

/// Default relative threshold used when reporting supports of discrete
/// functions: a node belongs to the support of `v` when
/// `|v_i| > SUPPORT_REL_THRESHOLD * max|v|`.
pub const SUPPORT_REL_THRESHOLD: f64 = 1e-8;
