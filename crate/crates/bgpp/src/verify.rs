//! Seeded verification drivers tying the numerics to the analytics.
//!
//! Every check here is reproducible: states are drawn with a counter-based
//! PRNG from a caller-supplied seed, and the seed is echoed in each report.
//! The sampling domain keeps states away from coordinate trouble: radial
//! coordinate in (t_max + 0.1, t_max + 10), angles in (0.2, pi - 0.2),
//! momenta and angular momenta in [-3, 3].

use crate::eguchi_hanson::{
    eh_discriminant, eh_levels_from_state, eh_m12_solution, eh_rhs, eh_roots, eh_tau_closed,
    eh_tau_degenerate, eh_tau_quadrature, EhLevels, EhState,
};
use crate::error::{Error, Result};
use crate::euler_solutions::{eval_solution, fit_solution, CaseId};
use crate::full_flow::{
    bracket, invariant_gradient, poisson_tensor, Invariant, MixedState, INVARIANTS,
};
use crate::integrate::{integrate_eh, integrate_full, integrate_reduced, IntegratorConfig};
use crate::metric::{multicentre_check, MetricParams};
use crate::reduced_flow::{
    levels_from_state, poisson_tensor_reduced, rhs_reduced, s_polynomial, tau_of_t, LevelSet,
    ReducedState,
};
use nalgebra::{DMatrix, SVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Seed used by the command-line tools when none is given.
pub const DEFAULT_SEED: u64 = 42;

pub fn sample_full_state(params: &MetricParams, rng: &mut ChaCha8Rng) -> MixedState {
    let t_max = params.t_max();
    MixedState {
        t: rng.random_range((t_max + 0.1)..(t_max + 10.0)),
        p_t: rng.random_range(-3.0..3.0),
        m: [
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        ],
        phi: rng.random_range(0.2..(PI - 0.2)),
        theta: rng.random_range(0.2..(PI - 0.2)),
        psi: rng.random_range(0.2..(PI - 0.2)),
    }
}

pub fn sample_reduced_state(params: &MetricParams, rng: &mut ChaCha8Rng) -> ReducedState {
    let s = sample_full_state(params, rng);
    ReducedState {
        t: s.t,
        p_t: s.p_t,
        m: s.m,
    }
}

/// Commutation, independence and structure checks at seeded random states.
#[derive(Debug, Clone)]
pub struct BracketReport {
    pub seed: u64,
    pub n_states: usize,
    /// Largest |{F,G}| over the six pairs of full-flow integrals.
    pub full_max_bracket: f64,
    /// Largest Jacobi-identity residual of the full Poisson tensor,
    /// finite-difference version.
    pub full_jacobi_max: f64,
    /// Smallest ratio sigma_min/sigma_max of the 4x8 gradient matrix.
    pub full_min_rank_ratio: f64,
    /// Largest |{F,G}| over the three pairs of reduced integrals.
    pub reduced_max_bracket: f64,
    /// Largest ||J grad(C)|| for the reduced Casimir; structurally zero.
    pub reduced_casimir_max: f64,
    /// Smallest ratio sigma_min/sigma_max of the 3x5 gradient matrix.
    pub reduced_min_rank_ratio: f64,
    /// Smallest numerical rank of the reduced Poisson tensor; 4 away from M=0.
    pub reduced_tensor_rank: usize,
}

/// Gradient of a rotation-invariant integral on the reduced chart, read off
/// the full-chart gradient at dummy angles.
fn reduced_gradient(
    params: &MetricParams,
    state: &ReducedState,
    which: Invariant,
) -> Result<SVector<f64, 5>> {
    let full = MixedState {
        t: state.t,
        p_t: state.p_t,
        m: state.m,
        phi: 0.0,
        theta: PI / 2.0,
        psi: 0.0,
    };
    let g = invariant_gradient(params, &full, which)?;
    Ok(SVector::<f64, 5>::from_iterator(g.iter().take(5).copied()))
}

pub fn verify_bracket_suite(
    params: &MetricParams,
    n_states: usize,
    seed: u64,
) -> Result<BracketReport> {
    if n_states == 0 {
        return Err(Error::InvalidConfig("need at least one state".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = BracketReport {
        seed,
        n_states,
        full_max_bracket: 0.0,
        full_jacobi_max: 0.0,
        full_min_rank_ratio: f64::INFINITY,
        reduced_max_bracket: 0.0,
        reduced_casimir_max: 0.0,
        reduced_min_rank_ratio: f64::INFINITY,
        reduced_tensor_rank: usize::MAX,
    };

    for _ in 0..n_states {
        let s = sample_full_state(params, &mut rng);

        for (i, &f) in INVARIANTS.iter().enumerate() {
            for &g in &INVARIANTS[i + 1..] {
                let b = bracket(params, &s, f, g)?.abs();
                report.full_max_bracket = report.full_max_bracket.max(b);
            }
        }

        let mut grad = DMatrix::<f64>::zeros(4, 8);
        for (r, inv) in INVARIANTS.iter().enumerate() {
            let g = invariant_gradient(params, &s, *inv)?;
            for c in 0..8 {
                grad[(r, c)] = g[c];
            }
        }
        report.full_min_rank_ratio = report.full_min_rank_ratio.min(rank_ratio(&grad));

        report.full_jacobi_max = report.full_jacobi_max.max(jacobi_residual(&s)?);

        let rs = ReducedState {
            t: s.t,
            p_t: s.p_t,
            m: s.m,
        };
        let jr = poisson_tensor_reduced(&rs)?;
        let gh = reduced_gradient(params, &rs, Invariant::Energy)?;
        let gc = reduced_gradient(params, &rs, Invariant::TotalAngular)?;
        let gi = reduced_gradient(params, &rs, Invariant::WeightedAngular)?;
        for (f, g) in [(&gh, &gc), (&gh, &gi), (&gc, &gi)] {
            let b = (f.transpose() * jr * *g)[(0, 0)].abs();
            report.reduced_max_bracket = report.reduced_max_bracket.max(b);
        }
        report.reduced_casimir_max = report.reduced_casimir_max.max((jr * gc).norm());

        let mut rgrad = DMatrix::<f64>::zeros(3, 5);
        for (r, g) in [&gh, &gc, &gi].into_iter().enumerate() {
            for c in 0..5 {
                rgrad[(r, c)] = g[c];
            }
        }
        report.reduced_min_rank_ratio = report.reduced_min_rank_ratio.min(rank_ratio(&rgrad));

        let jmat = DMatrix::<f64>::from_fn(5, 5, |r, c| jr[(r, c)]);
        let sv = jmat.svd(false, false).singular_values;
        let top = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
        let rank = sv.iter().filter(|&&v| v > 1e-12 * top).count();
        report.reduced_tensor_rank = report.reduced_tensor_rank.min(rank);
    }
    Ok(report)
}

fn rank_ratio(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let hi = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    let lo = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

/// Max over (i,j,k) of the Jacobi combination sum_l (J_il d_l J_jk + cyclic)
/// with the tensor derivatives taken by central differences.
fn jacobi_residual(state: &MixedState) -> Result<f64> {
    let h = 1e-6;
    let v = state.to_vector();
    let j0 = poisson_tensor(state)?;
    let mut dj = [[[0.0_f64; 8]; 8]; 8];
    for (l, slot) in dj.iter_mut().enumerate() {
        let mut vp = v;
        let mut vm = v;
        vp[l] += h;
        vm[l] -= h;
        let jp = poisson_tensor(&MixedState::from_vector(&vp))?;
        let jm = poisson_tensor(&MixedState::from_vector(&vm))?;
        for r in 0..8 {
            for c in 0..8 {
                slot[r][c] = (jp[(r, c)] - jm[(r, c)]) / (2.0 * h);
            }
        }
    }
    let mut worst = 0.0_f64;
    for i in 0..8 {
        for j in 0..8 {
            for k in 0..8 {
                let mut t = 0.0;
                for l in 0..8 {
                    t += j0[(i, l)] * dj[l][j][k]
                        + j0[(j, l)] * dj[l][k][i]
                        + j0[(k, l)] * dj[l][i][j];
                }
                worst = worst.max(t.abs());
            }
        }
    }
    Ok(worst)
}

/// Worst conserved-quantity drift over seeded trajectories of both flows.
#[derive(Debug, Clone)]
pub struct ConservationReport {
    pub seed: u64,
    pub n_trajectories: usize,
    pub span: (f64, f64),
    /// Worst drift over the four full-flow integrals, scaled by
    /// max(1, |initial value|).
    pub full_worst_drift: f64,
    /// Same for the three reduced-flow integrals.
    pub reduced_worst_drift: f64,
}

pub fn verify_conservation(
    params: &MetricParams,
    n_trajectories: usize,
    span: (f64, f64),
    cfg: &IntegratorConfig,
    seed: u64,
) -> Result<ConservationReport> {
    if n_trajectories == 0 {
        return Err(Error::InvalidConfig("need at least one trajectory".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConservationReport {
        seed,
        n_trajectories,
        span,
        full_worst_drift: 0.0,
        reduced_worst_drift: 0.0,
    };
    for _ in 0..n_trajectories {
        let s = sample_full_state(params, &mut rng);
        let (_, drift) = integrate_full(params, &s, span, 101, cfg)?;
        report.full_worst_drift = report.full_worst_drift.max(drift.worst_relative());

        let rs = ReducedState {
            t: s.t,
            p_t: s.p_t,
            m: s.m,
        };
        let (_, drift) = integrate_reduced(params, &rs, span, 101, cfg)?;
        report.reduced_worst_drift = report.reduced_worst_drift.max(drift.worst_relative());
    }
    Ok(report)
}

/// Max relative defect of the radial identity (dt/dlambda)^2 = S(t) along a
/// reduced trajectory, sampled on an even lambda grid.
///
/// S is evaluated on each sample's own level set: the identity is a property
/// of the flow field at the visited state, so it must hold there regardless
/// of how much the transported levels have drifted (drift is bounded by the
/// conservation check, not this one).
pub fn verify_radial_identity(
    params: &MetricParams,
    state0: &ReducedState,
    span: (f64, f64),
    n_samples: usize,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let (traj, _) = integrate_reduced(params, state0, span, n_samples, cfg)?;
    let mut worst = 0.0_f64;
    for y in &traj.states {
        let st = ReducedState::from_vector(y);
        let levels = levels_from_state(params, &st)?;
        let t_dot = rhs_reduced(params, &st)?[0];
        let s = s_polynomial(params, &levels, st.t)?;
        worst = worst.max((t_dot * t_dot - s).abs() / s.abs().max(1.0));
    }
    Ok(worst)
}

/// Outcome of an analytic-versus-numeric angular-momentum comparison.
#[derive(Debug, Clone)]
pub struct AnalyticComparison {
    /// Modulus regime of the fitted closed form; absent for rotor-type runs.
    pub case: Option<CaseId>,
    /// Per-component max of |M_numeric - M_analytic| over the sample grid.
    pub per_component_max: [f64; 3],
    pub max_abs: f64,
    /// Monotone radial branches the sample grid was split into.
    pub n_branches: usize,
}

/// Locate the radial turning point S = 0 adjacent to `t_anchor`, searching
/// upward (outward branch) or downward toward the domain edge.
fn radial_turning_point(
    params: &MetricParams,
    levels: &LevelSet,
    t_anchor: f64,
    outward: bool,
) -> Result<f64> {
    let t_floor = params.t_max();
    if s_polynomial(params, levels, t_anchor)? <= 0.0 {
        return Ok(t_anchor);
    }
    let mut step = 1e-3 * (1.0 + t_anchor.abs());
    let mut inside = t_anchor;
    for _ in 0..80 {
        let probe = if outward {
            t_anchor + step
        } else {
            (t_anchor - step).max(t_floor)
        };
        if s_polynomial(params, levels, probe)? <= 0.0 {
            return bisect_s_root(params, levels, inside, probe);
        }
        if !outward && probe <= t_floor {
            // Positive S all the way down: the branch ends on the boundary.
            return Ok(t_floor);
        }
        inside = probe;
        step *= 2.0;
    }
    Err(Error::NoConvergence {
        what: "bracket around a radial turning point",
        iterations: 80,
    })
}

fn bisect_s_root(
    params: &MetricParams,
    levels: &LevelSet,
    mut inside: f64,
    mut outside: f64,
) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if s_polynomial(params, levels, mid)? > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

/// End-to-end check of the closed-form angular solution: integrate the
/// reduced flow in lambda, rebuild tau by quadrature branch by branch
/// (splitting where the radial momentum changes sign), evaluate the fitted
/// closed form at that tau and compare with the integrated components.
///
/// The sample grid must be fine enough that no full radial bounce hides
/// between consecutive samples.
pub fn verify_analytic_vs_numeric(
    params: &MetricParams,
    state0: &ReducedState,
    span: (f64, f64),
    n_samples: usize,
    cfg: &IntegratorConfig,
) -> Result<AnalyticComparison> {
    let levels = levels_from_state(params, state0)?;
    let solution = fit_solution(params, state0.m)?;
    let (traj, _) = integrate_reduced(params, state0, span, n_samples, cfg)?;

    let mut per_component_max = [0.0_f64; 3];
    let mut tau = 0.0_f64;
    let mut n_branches = 1usize;
    let mut prev = ReducedState::from_vector(&traj.states[0]);

    for y in &traj.states {
        let cur = ReducedState::from_vector(y);
        if cur.p_t * prev.p_t < 0.0 {
            // The radial direction flipped inside this gap: split the tau
            // quadrature at the turning point between the two samples.
            let outward = prev.p_t > 0.0;
            let anchor = if outward {
                prev.t.max(cur.t)
            } else {
                prev.t.min(cur.t)
            };
            let t_star = radial_turning_point(params, &levels, anchor, outward)?;
            tau += tau_of_t(params, &levels, prev.t, t_star)?.abs();
            tau += tau_of_t(params, &levels, t_star, cur.t)?.abs();
            n_branches += 1;
        } else {
            tau += tau_of_t(params, &levels, prev.t, cur.t)?.abs();
        }
        let analytic = eval_solution(&solution, tau)?;
        for c in 0..3 {
            per_component_max[c] = per_component_max[c].max((cur.m[c] - analytic[c]).abs());
        }
        prev = cur;
    }
    Ok(AnalyticComparison {
        case: solution.case(),
        per_component_max,
        max_abs: per_component_max.iter().fold(0.0_f64, |a, &b| a.max(b)),
        n_branches,
    })
}

/// Same comparison for the Eguchi-Hanson flow, with tau taken from the
/// closed-form elliptic expression (differences along each monotone branch;
/// the turning point is the exact outer cubic root).
pub fn verify_eh_analytic(
    gamma2: f64,
    state0: &EhState,
    span: (f64, f64),
    n_samples: usize,
    cfg: &IntegratorConfig,
) -> Result<AnalyticComparison> {
    let levels = eh_levels_from_state(gamma2, state0)?;
    let roots = eh_roots(gamma2, &levels)?;
    let rotor = eh_m12_solution(gamma2, state0)?;
    let (traj, _) = integrate_eh(gamma2, state0, span, n_samples, cfg)?;

    // Along a trajectory rho stays on the outer branch; values a hair below
    // the turning point are integrator roundoff.
    let closed = |rho: f64| eh_tau_closed(gamma2, &levels, rho.max(roots[2]));

    let mut per_component_max = [0.0_f64; 3];
    let mut tau = 0.0_f64;
    let mut n_branches = 1usize;
    let mut prev = EhState::from_vector(&traj.states[0]);
    let mut prev_closed = closed(prev.rho)?;

    for y in &traj.states {
        let cur = EhState::from_vector(y);
        let cur_closed = closed(cur.rho)?;
        if cur.p_rho * prev.p_rho < 0.0 {
            tau += prev_closed + cur_closed;
            n_branches += 1;
        } else {
            tau += (cur_closed - prev_closed).abs();
        }
        let analytic = rotor.eval(tau);
        for c in 0..3 {
            per_component_max[c] = per_component_max[c].max((cur.m[c] - analytic[c]).abs());
        }
        prev = cur;
        prev_closed = cur_closed;
    }
    Ok(AnalyticComparison {
        case: None,
        per_component_max,
        max_abs: per_component_max.iter().fold(0.0_f64, |a, &b| a.max(b)),
        n_branches,
    })
}

/// Max componentwise defect between the Eguchi-Hanson vector field and the
/// chain-rule image of the reduced field with a doubled parameter, at seeded
/// random states. The two must agree identically.
pub fn verify_eh_limit_consistency(
    gamma2: f64,
    t_distinct: f64,
    n_states: usize,
    seed: u64,
) -> Result<f64> {
    if n_states == 0 {
        return Err(Error::InvalidConfig("need at least one state".into()));
    }
    let repeated = t_distinct + gamma2;
    let params = crate::metric::validate_params(repeated, repeated, t_distinct, 1e-12)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n_states {
        let t = rng.random_range((repeated + 0.1)..(repeated + 10.0));
        let rho = (t - t_distinct).sqrt();
        let p_t = rng.random_range(-3.0..3.0);
        let m = [
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        ];
        let eh = eh_rhs(
            gamma2,
            &EhState {
                rho,
                p_rho: 2.0 * rho * p_t,
                m,
            },
        )?;
        let d = rhs_reduced(&params, &ReducedState { t, p_t, m })?;
        let rho_dot = d[0] / (2.0 * rho);
        let p_rho_dot = 2.0 * rho_dot * p_t + 2.0 * rho * d[1];
        let chained = [rho_dot, p_rho_dot, d[2], d[3], d[4]];
        for (c, ch) in chained.iter().enumerate() {
            worst = worst.max((eh[c] - ch).abs());
        }
    }
    Ok(worst)
}

/// Root structure of the Eguchi-Hanson radial cubic over a random sweep of
/// level sets with e > 0 and m3 != 0.
#[derive(Debug, Clone)]
pub struct EhRootsReport {
    pub seed: u64,
    pub n_levels: usize,
    /// Smallest discriminant met in the sweep; positivity means three
    /// simple real roots everywhere.
    pub min_discriminant: f64,
    /// Level sets whose roots broke -gamma < rho1 < 0 < rho2 < gamma < rho3.
    pub interlacing_failures: usize,
}

pub fn verify_eh_roots(n_levels: usize, seed: u64) -> Result<EhRootsReport> {
    if n_levels == 0 {
        return Err(Error::InvalidConfig("need at least one level set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_discriminant = f64::INFINITY;
    let mut interlacing_failures = 0usize;
    for _ in 0..n_levels {
        let gamma2: f64 = rng.random_range(0.3..3.0);
        let gamma = gamma2.sqrt();
        let magnitude = rng.random_range(0.1..2.0);
        let levels = EhLevels {
            e: rng.random_range(0.1..5.0),
            m3: if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            },
            mu2: rng.random_range(0.05..8.0),
        };
        min_discriminant = min_discriminant.min(eh_discriminant(gamma2, &levels)?);
        match eh_roots(gamma2, &levels) {
            Ok([r1, r2, r3]) => {
                let ok = -gamma < r1 && r1 < 0.0 && 0.0 < r2 && r2 < gamma && gamma < r3;
                if !ok {
                    interlacing_failures += 1;
                }
            }
            Err(_) => interlacing_failures += 1,
        }
    }
    Ok(EhRootsReport {
        seed,
        n_levels,
        min_discriminant,
        interlacing_failures,
    })
}

/// Closed-form Eguchi-Hanson tau against the desingularised reference
/// quadrature on random outer intervals, and the elementary logarithmic
/// formula against the same quadrature on the degenerate locus.
#[derive(Debug, Clone)]
pub struct EhTauReport {
    pub seed: u64,
    pub n_pairs: usize,
    pub max_relative_diff: f64,
    pub degenerate_max_relative_diff: f64,
}

pub fn verify_eh_tau_agreement(n_pairs: usize, seed: u64) -> Result<EhTauReport> {
    if n_pairs == 0 {
        return Err(Error::InvalidConfig("need at least one interval".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_relative_diff = 0.0_f64;
    for _ in 0..n_pairs {
        let gamma2 = rng.random_range(0.3..3.0);
        let magnitude = rng.random_range(0.1..2.0);
        let levels = EhLevels {
            e: rng.random_range(0.1..5.0),
            m3: if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            },
            mu2: rng.random_range(0.05..8.0),
        };
        let roots = eh_roots(gamma2, &levels)?;
        let a = roots[2] + rng.random_range(1e-3..10.0);
        let b = roots[2] + rng.random_range(1e-3..10.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let closed = eh_tau_closed(gamma2, &levels, hi)? - eh_tau_closed(gamma2, &levels, lo)?;
        let quad = eh_tau_quadrature(gamma2, &levels, lo, hi)?;
        let scale = closed.abs().max(f64::MIN_POSITIVE);
        max_relative_diff = max_relative_diff.max((closed - quad).abs() / scale);
    }
    let mut degenerate_max_relative_diff = 0.0_f64;
    for _ in 0..DEGENERATE_TAU_TRIALS {
        let gamma2: f64 = rng.random_range(0.3..3.0);
        let gamma = gamma2.sqrt();
        let e = rng.random_range(0.1..5.0);
        let levels = EhLevels {
            e,
            m3: 0.0,
            mu2: 2.0 * e * gamma,
        };
        let a = gamma + rng.random_range(0.2..2.0);
        let b = a + rng.random_range(0.1..5.0);
        // The degenerate tau rises from minus infinity at the bolt to zero
        // at infinite radius, so the elapsed time outward is deg(b) - deg(a).
        let closed =
            eh_tau_degenerate(gamma2, &levels, b)? - eh_tau_degenerate(gamma2, &levels, a)?;
        let quad = eh_tau_quadrature(gamma2, &levels, a, b)?;
        let scale = closed.abs().max(f64::MIN_POSITIVE);
        degenerate_max_relative_diff =
            degenerate_max_relative_diff.max((closed - quad).abs() / scale);
    }
    Ok(EhTauReport {
        seed,
        n_pairs,
        max_relative_diff,
        degenerate_max_relative_diff,
    })
}

/// Agreement between the diagonal metric and the multicentre pullback at
/// seeded random points, plus the finite-difference convergence order
/// observed on step halving.
#[derive(Debug, Clone)]
pub struct MulticentreReport {
    pub seed: u64,
    pub n_points: usize,
    pub h: f64,
    pub max_residual: f64,
    /// Median over a few points of log2(residual(2h') / residual(h')) at
    /// h' coarse enough for truncation error to dominate roundoff.
    pub observed_order: f64,
}

pub fn verify_multicentre(
    params: &MetricParams,
    n_points: usize,
    h: f64,
    seed: u64,
) -> Result<MulticentreReport> {
    if n_points == 0 {
        return Err(Error::InvalidConfig("need at least one point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_max = params.t_max();
    let mut points = Vec::with_capacity(n_points);
    let mut max_residual = 0.0_f64;
    for _ in 0..n_points {
        let t = rng.random_range((t_max + 0.1)..(t_max + 10.0));
        let theta = rng.random_range(0.2..(PI - 0.2));
        let psi = rng.random_range(0.2..(PI - 0.2));
        max_residual = max_residual.max(multicentre_check(params, t, theta, psi, h)?);
        points.push((t, theta, psi));
    }
    let mut orders: Vec<f64> = Vec::new();
    for &(t, theta, psi) in points.iter().take(5) {
        let coarse = multicentre_check(params, t, theta, psi, ORDER_H)?;
        let fine = multicentre_check(params, t, theta, psi, ORDER_H / 2.0)?;
        if fine > 0.0 {
            orders.push((coarse / fine).log2());
        }
    }
    orders.sort_by(|a, b| a.total_cmp(b));
    let observed_order = if orders.is_empty() {
        f64::NAN
    } else {
        orders[orders.len() / 2]
    };
    Ok(MulticentreReport {
        seed,
        n_points,
        h,
        max_residual,
        observed_order,
    })
}

// Finite-difference step used for the convergence-order probe; coarse enough
// that truncation error dwarfs rounding noise in the difference quotients.
const ORDER_H: f64 = 4e-3;

// Intervals checked on the degenerate locus per tau-agreement sweep.
const DEGENERATE_TAU_TRIALS: usize = 5;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate_ode;
    use crate::metric::validate_params;

    fn params_012() -> MetricParams {
        validate_params(0.0, 1.0, 2.0, 1e-12).unwrap()
    }

    #[test]
    fn bracket_suite_passes_on_seeded_states() {
        let params = params_012();
        let r = verify_bracket_suite(&params, 25, 7).unwrap();
        assert!(
            r.full_max_bracket < 1e-9,
            "brackets {:e}",
            r.full_max_bracket
        );
        assert!(r.full_jacobi_max < 1e-6, "jacobi {:e}", r.full_jacobi_max);
        assert!(
            r.full_min_rank_ratio > 1e-8,
            "rank {:e}",
            r.full_min_rank_ratio
        );
        assert!(r.reduced_max_bracket < 1e-9);
        assert_eq!(r.reduced_casimir_max, 0.0);
        assert!(r.reduced_min_rank_ratio > 1e-8);
        assert_eq!(r.reduced_tensor_rank, 4);
    }

    #[test]
    fn sampling_is_deterministic() {
        let params = params_012();
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        let sa = sample_full_state(&params, &mut a);
        let sb = sample_full_state(&params, &mut b);
        assert_eq!(sa.to_vector(), sb.to_vector());
    }

    #[test]
    fn eh_root_sweep_is_clean() {
        let r = verify_eh_roots(200, 11).unwrap();
        assert_eq!(r.interlacing_failures, 0);
        assert!(r.min_discriminant > 0.0, "disc {:e}", r.min_discriminant);
    }

    #[test]
    fn eh_tau_closed_forms_match_quadrature() {
        let r = verify_eh_tau_agreement(10, 13).unwrap();
        assert!(
            r.max_relative_diff < 1e-9,
            "generic {:e}",
            r.max_relative_diff
        );
        assert!(
            r.degenerate_max_relative_diff < 1e-9,
            "degenerate {:e}",
            r.degenerate_max_relative_diff
        );
    }

    #[test]
    fn conservation_over_short_span() {
        let params = params_012();
        let cfg = IntegratorConfig::default();
        let r = verify_conservation(&params, 3, (0.0, 2.0), &cfg, DEFAULT_SEED).unwrap();
        assert!(r.full_worst_drift < 1e-8, "full {:e}", r.full_worst_drift);
        assert!(
            r.reduced_worst_drift < 1e-8,
            "reduced {:e}",
            r.reduced_worst_drift
        );
    }

    #[test]
    fn radial_identity_along_trajectory() {
        let params = params_012();
        let cfg = IntegratorConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..Default::default()
        };
        let s0 = ReducedState {
            t: 3.0,
            p_t: 0.8,
            m: [0.9, -1.4, 2.1],
        };
        let worst = verify_radial_identity(&params, &s0, (0.0, 3.0), 31, &cfg).unwrap();
        assert!(worst < 1e-9, "radial identity defect {worst:e}");
    }

    #[test]
    fn analytic_matches_numeric_outbound() {
        let params = params_012();
        let cfg = IntegratorConfig::default();
        let s0 = ReducedState {
            t: 3.0,
            p_t: 0.8,
            m: [0.3, 0.4, 1.2],
        };
        let r = verify_analytic_vs_numeric(&params, &s0, (0.0, 4.0), 201, &cfg).unwrap();
        assert_eq!(r.case, Some(CaseId::I));
        assert_eq!(r.n_branches, 1);
        assert!(r.max_abs < 1e-6, "case I mismatch {:e}", r.max_abs);
    }

    #[test]
    fn analytic_matches_numeric_through_turning_point() {
        let params = params_012();
        let cfg = IntegratorConfig::default();
        let s0 = ReducedState {
            t: 3.0,
            p_t: -0.8,
            m: [1.2, 0.4, 0.3],
        };
        let r = verify_analytic_vs_numeric(&params, &s0, (0.0, 6.0), 401, &cfg).unwrap();
        assert_eq!(r.case, Some(CaseId::II));
        assert!(r.n_branches >= 2, "expected a bounce, got {}", r.n_branches);
        assert!(r.max_abs < 1e-6, "case II mismatch {:e}", r.max_abs);
    }

    #[test]
    fn eh_analytic_matches_numeric() {
        let cfg = IntegratorConfig::default();
        let s0 = EhState {
            rho: 3.0,
            p_rho: -1.0,
            m: [0.8, -0.5, 1.1],
        };
        let r = verify_eh_analytic(1.0, &s0, (0.0, 3.0), 301, &cfg).unwrap();
        assert!(r.max_abs < 1e-6, "rotor mismatch {:e}", r.max_abs);
        assert!(r.n_branches >= 2, "expected a bounce off the outer root");
        // M3 is conserved by both sides, so its column is near-exact.
        assert!(r.per_component_max[2] < 1e-9);
    }

    #[test]
    fn eh_limit_chain_rule_agrees() {
        let worst = verify_eh_limit_consistency(1.3, 0.4, 50, 11).unwrap();
        assert!(worst < 1e-12, "chain-rule defect {worst:e}");
    }

    #[test]
    fn multicentre_residual_and_order() {
        let params = params_012();
        let r = verify_multicentre(&params, 10, 1e-5, 3).unwrap();
        assert!(r.max_residual < 1e-6, "residual {:e}", r.max_residual);
        assert!(r.observed_order > 1.8, "order {}", r.observed_order);
    }

    #[test]
    fn integration_is_reversible() {
        let params = params_012();
        let s0 = ReducedState {
            t: 3.0,
            p_t: 0.8,
            m: [0.9, -1.4, 2.1],
        };
        let cfg = IntegratorConfig::default();
        let (fwd, _) = integrate_reduced(&params, &s0, (0.0, 3.0), 2, &cfg).unwrap();
        let end = fwd.states[1];
        let back = integrate_ode(
            |y| rhs_reduced(&params, &ReducedState::from_vector(y)).map(|d| -d),
            end,
            (0.0, 3.0),
            2,
            &cfg,
        )
        .unwrap();
        let diff = (back.states[1] - s0.to_vector()).abs().max();
        assert!(diff < 1e-8, "round trip defect {diff:e}");
    }
}
