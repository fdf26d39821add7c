//! Geodesic flow on the triaxial family of self-dual Bianchi-IX gravitational
//! instantons and its Eguchi-Hanson limit.
//!
//! The flow is Liouville integrable: besides the Hamiltonian it conserves an
//! axial momentum, the total body angular momentum, and one extra quadratic
//! invariant. This crate provides
//!
//! * the metric profiles and their multicentre cross-check ([`metric`]),
//! * the full eight-dimensional phase-space flow in mixed
//!   momentum/angular-momentum variables with its Poisson tensor
//!   ([`full_flow`]),
//! * the reduced five-dimensional radial/Euler system, the radial polynomial
//!   and the time reparametrisation ([`reduced_flow`]),
//! * closed-form Euler-top solutions in Jacobi elliptic functions
//!   ([`euler_solutions`]),
//! * the Eguchi-Hanson limit with its cubic turning-point structure and
//!   closed-form reparametrised time ([`eguchi_hanson`]),
//! * the special-function kernels everything rests on ([`special`]),
//! * an embedded Runge-Kutta 5(4) integrator plus verification drivers that
//!   confront closed forms with numerics ([`integrate`], [`verify`]),
//! * and the command-line front end ([`cli`]).
//!
//! Start with the runnable examples in `examples/` for a tour.

pub mod cli;
pub mod eguchi_hanson;
pub mod error;
pub mod euler_solutions;
pub mod full_flow;
pub mod integrate;
pub mod metric;
pub mod reduced_flow;
pub mod special;
pub mod verify;

pub use eguchi_hanson::{
    eh_discriminant, eh_hamiltonian, eh_levels_from_state, eh_m12_solution, eh_rhs, eh_roots,
    eh_tau_closed, eh_tau_degenerate, eh_tau_quadrature, r_cubic, r_value, EhLevels, EhRotor,
    EhState,
};
pub use error::{Error, Result};
pub use euler_solutions::{
    classify_case, eval_solution, fit_solution, AngularLevels, CaseId, EulerSolution,
};
pub use verify::{
    sample_full_state, sample_reduced_state, verify_analytic_vs_numeric, verify_bracket_suite,
    verify_conservation, verify_eh_analytic, verify_eh_limit_consistency, verify_eh_roots,
    verify_eh_tau_agreement, verify_multicentre, verify_radial_identity, AnalyticComparison,
    BracketReport, ConservationReport, EhRootsReport, EhTauReport, MulticentreReport, DEFAULT_SEED,
};

pub use integrate::{
    integrate_eh, integrate_flow, integrate_full, integrate_ode, integrate_reduced, DriftReport,
    FlowRun, FlowSpec, IntegratorConfig, StepStats, Trajectory,
};

pub use full_flow::{
    bracket, from_mixed, hamiltonian, hamiltonian_canonical, integrals, invariant_gradient,
    invariant_value, poisson_tensor, rhs_full, to_mixed, CanonicalState, IntegralValues, Invariant,
    MixedState, INVARIANTS,
};
pub use metric::{
    eh_limit, multicentre_check, profile, profile_with_derivatives, validate_params, Degeneracy,
    EhLimit, MetricParams, MetricProfile, ProfileDerivatives,
};
pub use reduced_flow::{
    casimir, hamiltonian_reduced, levels_from_state, poisson_tensor_reduced, rhs_reduced,
    s_polynomial, tau_of_t, LevelSet, ReducedState,
};
pub use special::{
    adaptive_quad, elliptic_f, elliptic_k, elliptic_pi, elliptic_pi_complete, jacobi_sn_cn_dn,
    quad_sqrt_endpoint, Quadrature, SingularEnd,
};
