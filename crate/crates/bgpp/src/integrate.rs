//! Embedded Runge-Kutta 5(4) integration of the three flows.
//!
//! One adaptive Dormand-Prince driver serves the full eight-dimensional
//! system, the reduced five-dimensional one and the Eguchi-Hanson limit. The
//! controller is the classic PI design: step acceptance by a mixed
//! absolute/relative RMS error norm, step-size update from the current and
//! previous error. Right-hand sides return `Result`, so a trial step that
//! wanders outside the chart (past the bolt, onto a coordinate pole) is
//! retried with half the step; if the step collapses the driver reports
//! where and why. Output is sampled by clipping steps to the requested
//! lambda grid, never by interpolation, so every reported state is a genuine
//! accepted step of the scheme.
//!
//! `fixed_step` bypasses the controller for convergence-order measurements.

use crate::eguchi_hanson::{eh_levels_from_state, eh_rhs, EhState};
use crate::error::{Error, Result};
use crate::full_flow::{integrals, rhs_full, MixedState};
use crate::metric::MetricParams;
use crate::reduced_flow::{levels_from_state, rhs_reduced, ReducedState};
use nalgebra::SVector;

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// First trial step; picked from the span when absent.
    pub h_initial: Option<f64>,
    /// Smallest step the controller may use before giving up.
    pub h_min: f64,
    pub h_max: Option<f64>,
    /// Disable the controller and march with this step.
    pub fixed_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 10_000_000,
            h_initial: None,
            h_min: 1e-12,
            h_max: None,
            fixed_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

/// Integration output: states on the requested lambda grid.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub lambda: Vec<f64>,
    pub states: Vec<SVector<f64, N>>,
    pub stats: StepStats,
}

/// Largest wander of each conserved quantity over a trajectory.
#[derive(Debug, Clone)]
pub struct DriftReport {
    pub names: Vec<&'static str>,
    pub initial: Vec<f64>,
    /// max_j |I(lambda_j) - I(lambda_0)|.
    pub max_drift: Vec<f64>,
}

impl DriftReport {
    /// Worst drift across all invariants, scaled by max(1, |initial|).
    pub fn worst_relative(&self) -> f64 {
        self.initial
            .iter()
            .zip(&self.max_drift)
            .map(|(i0, d)| d / i0.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Adaptive Dormand-Prince 5(4) over a lambda span, reporting the state at
/// `n_samples` evenly spaced points (endpoints included).
pub fn integrate_ode<const N: usize, F>(
    rhs: F,
    y0: SVector<f64, N>,
    span: (f64, f64),
    n_samples: usize,
    config: &IntegratorConfig,
) -> Result<Trajectory<N>>
where
    F: Fn(&SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let (a, b) = span;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite {
            what: "integration span",
        });
    }
    if b <= a {
        return Err(Error::InvalidConfig(format!(
            "lambda span must increase: got [{a}, {b}]"
        )));
    }
    if n_samples < 2 {
        return Err(Error::InvalidConfig(
            "need at least the two endpoint samples".into(),
        ));
    }
    if config.rel_tol <= 0.0 || config.abs_tol <= 0.0 {
        return Err(Error::InvalidConfig("tolerances must be positive".into()));
    }

    let grid: Vec<f64> = (0..n_samples)
        .map(|j| a + (b - a) * (j as f64) / ((n_samples - 1) as f64))
        .collect();

    let mut stats = StepStats::default();
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |y: &SVector<f64, N>| {
        evals.set(evals.get() + 1);
        rhs(y)
    };

    let mut lambda = a;
    let mut y = y0;
    let mut out_lambda = Vec::with_capacity(n_samples);
    let mut out_states = Vec::with_capacity(n_samples);
    out_lambda.push(lambda);
    out_states.push(y);

    let mut h = config
        .fixed_step
        .or(config.h_initial)
        .unwrap_or((b - a) * 1e-4)
        .min(config.h_max.unwrap_or(f64::INFINITY))
        .min(b - a);
    if h <= 0.0 {
        return Err(Error::InvalidConfig("step size must be positive".into()));
    }

    let mut k1 = eval(&y)?;
    let mut facold = 1e-4_f64;
    let mut next = 1usize;
    let mut just_rejected = false;

    while next < grid.len() {
        if stats.accepted + stats.rejected >= config.max_steps {
            return Err(Error::NoConvergence {
                what: "step budget of the integrator",
                iterations: config.max_steps,
            });
        }
        let target = grid[next];
        let mut h_try = h
            .min(target - lambda)
            .max(config.h_min.min(target - lambda));
        if config.fixed_step.is_some() {
            h_try = h.min(target - lambda);
        }

        match dopri5_step(&mut eval, &y, &k1, h_try) {
            Ok((y_new, k_last, err_vec)) => {
                if config.fixed_step.is_some() {
                    lambda += h_try;
                    y = y_new;
                    k1 = k_last;
                    stats.accepted += 1;
                } else {
                    let err = error_norm(&y, &y_new, &err_vec, config);
                    if err <= 1.0 {
                        lambda += h_try;
                        y = y_new;
                        k1 = k_last;
                        stats.accepted += 1;
                        let fac11 = err.max(1e-30).powf(PI_ALPHA);
                        let mut fac = fac11 / facold.powf(PI_BETA);
                        fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                        let facmax = if just_rejected { 1.0 } else { FAC_MAX };
                        h = (h_try / fac).min(h_try * facmax);
                        if let Some(hm) = config.h_max {
                            h = h.min(hm);
                        }
                        facold = err.max(1e-4);
                        just_rejected = false;
                    } else {
                        stats.rejected += 1;
                        just_rejected = true;
                        let fac11 = err.powf(PI_ALPHA);
                        h = h_try / (fac11 / SAFETY).min(1.0 / FAC_MIN);
                        if h < config.h_min {
                            return Err(Error::StepFailure {
                                h,
                                lambda,
                                reason: "error control demands a step below h_min",
                            });
                        }
                        continue;
                    }
                }
            }
            Err(cause) => {
                if config.fixed_step.is_some() {
                    return Err(step_exit(cause, lambda));
                }
                stats.rejected += 1;
                just_rejected = true;
                h = 0.5 * h_try;
                if h < config.h_min {
                    return Err(step_exit(cause, lambda));
                }
                continue;
            }
        }

        if (target - lambda).abs() <= 1e-12 * (1.0 + target.abs()) {
            lambda = target;
            out_lambda.push(lambda);
            out_states.push(y);
            next += 1;
        }
    }

    stats.rhs_evaluations = evals.get();
    Ok(Trajectory {
        lambda: out_lambda,
        states: out_states,
        stats,
    })
}

/// Convert the error that killed the last trial step into the driver answer:
/// leaving the chart is a domain exit, everything else a step failure.
fn step_exit(cause: Error, lambda: f64) -> Error {
    match cause {
        Error::DomainError { what, value, .. } => Error::DomainExit {
            lambda,
            what,
            value,
        },
        Error::SingularPoint { sin_theta } => Error::DomainExit {
            lambda,
            what: "sin(theta)",
            value: sin_theta,
        },
        Error::StepFailure { h, reason, .. } => Error::StepFailure { h, lambda, reason },
        _ => Error::StepFailure {
            h: 0.0,
            lambda,
            reason: "right-hand side kept failing as the step shrank",
        },
    }
}

type StepOutput<const N: usize> = (SVector<f64, N>, SVector<f64, N>, SVector<f64, N>);

fn dopri5_step<const N: usize, F>(
    eval: &mut F,
    y: &SVector<f64, N>,
    k1: &SVector<f64, N>,
    h: f64,
) -> Result<StepOutput<N>>
where
    F: FnMut(&SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let k2 = eval(&(y + h * A21 * k1))?;
    let k3 = eval(&(y + h * (A31 * k1 + A32 * k2)))?;
    let k4 = eval(&(y + h * (A41 * k1 + A42 * k2 + A43 * k3)))?;
    let k5 = eval(&(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)))?;
    let k6 = eval(&(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)))?;
    let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    // First-same-as-last: the stage at the new point doubles as the next k1.
    let k7 = eval(&y_new)?;
    if y_new.iter().any(|v| !v.is_finite()) {
        return Err(Error::StepFailure {
            h,
            lambda: f64::NAN,
            reason: "state became non-finite inside a step",
        });
    }
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    Ok((y_new, k7, err))
}

fn error_norm<const N: usize>(
    y: &SVector<f64, N>,
    y_new: &SVector<f64, N>,
    err: &SVector<f64, N>,
    config: &IntegratorConfig,
) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        let scale = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
        let q = err[i] / scale;
        sum += q * q;
    }
    (sum / N as f64).sqrt()
}

/// Full flow with its four-invariant drift report.
pub fn integrate_full(
    params: &MetricParams,
    state0: &MixedState,
    span: (f64, f64),
    n_samples: usize,
    config: &IntegratorConfig,
) -> Result<(Trajectory<8>, DriftReport)> {
    let traj = integrate_ode(
        |y| rhs_full(params, &MixedState::from_vector(y)),
        state0.to_vector(),
        span,
        n_samples,
        config,
    )?;
    let values = |y: &SVector<f64, 8>| -> Result<Vec<f64>> {
        let iv = integrals(params, &MixedState::from_vector(y))?;
        Ok(vec![iv.h, iv.p_phi, iv.m2, iv.n2])
    };
    let drift = drift_report(vec!["H", "P_phi", "m2", "n2"], &traj.states, values)?;
    Ok((traj, drift))
}

/// Reduced flow with its three-invariant drift report.
pub fn integrate_reduced(
    params: &MetricParams,
    state0: &ReducedState,
    span: (f64, f64),
    n_samples: usize,
    config: &IntegratorConfig,
) -> Result<(Trajectory<5>, DriftReport)> {
    let traj = integrate_ode(
        |y| rhs_reduced(params, &ReducedState::from_vector(y)),
        state0.to_vector(),
        span,
        n_samples,
        config,
    )?;
    let values = |y: &SVector<f64, 5>| -> Result<Vec<f64>> {
        let lv = levels_from_state(params, &ReducedState::from_vector(y))?;
        Ok(vec![lv.e, lv.m2, lv.n2])
    };
    let drift = drift_report(vec!["H", "m2", "n2"], &traj.states, values)?;
    Ok((traj, drift))
}

/// Eguchi-Hanson flow with its three-invariant drift report.
pub fn integrate_eh(
    gamma2: f64,
    state0: &EhState,
    span: (f64, f64),
    n_samples: usize,
    config: &IntegratorConfig,
) -> Result<(Trajectory<5>, DriftReport)> {
    let traj = integrate_ode(
        |y| eh_rhs(gamma2, &EhState::from_vector(y)),
        state0.to_vector(),
        span,
        n_samples,
        config,
    )?;
    let values = |y: &SVector<f64, 5>| -> Result<Vec<f64>> {
        let lv = eh_levels_from_state(gamma2, &EhState::from_vector(y))?;
        Ok(vec![lv.e, lv.m3, lv.mu2])
    };
    let drift = drift_report(vec!["H", "m3", "mu2"], &traj.states, values)?;
    Ok((traj, drift))
}

fn drift_report<const N: usize, F>(
    names: Vec<&'static str>,
    states: &[SVector<f64, N>],
    values: F,
) -> Result<DriftReport>
where
    F: Fn(&SVector<f64, N>) -> Result<Vec<f64>>,
{
    let initial = values(&states[0])?;
    let mut max_drift = vec![0.0_f64; initial.len()];
    for s in states.iter().skip(1) {
        let v = values(s)?;
        for (k, (vi, i0)) in v.iter().zip(&initial).enumerate() {
            max_drift[k] = max_drift[k].max((vi - i0).abs());
        }
    }
    Ok(DriftReport {
        names,
        initial,
        max_drift,
    })
}

/// One of the three integrable systems, bundled with its initial state; the
/// shared driver behind the command-line front end.
#[derive(Debug, Clone)]
pub enum FlowSpec {
    Full {
        params: MetricParams,
        state: MixedState,
    },
    Reduced {
        params: MetricParams,
        state: ReducedState,
    },
    Eh {
        gamma2: f64,
        state: EhState,
    },
}

/// Column-oriented run output for tabulation.
#[derive(Debug, Clone)]
pub struct FlowRun {
    pub columns: Vec<&'static str>,
    pub lambda: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub drift: DriftReport,
    pub stats: StepStats,
}

pub fn integrate_flow(
    spec: &FlowSpec,
    span: (f64, f64),
    n_samples: usize,
    config: &IntegratorConfig,
) -> Result<FlowRun> {
    match spec {
        FlowSpec::Full { params, state } => {
            let (traj, drift) = integrate_full(params, state, span, n_samples, config)?;
            Ok(FlowRun {
                columns: vec!["t", "P_t", "M1", "M2", "M3", "phi", "theta", "psi"],
                lambda: traj.lambda,
                rows: traj
                    .states
                    .iter()
                    .map(|s| s.iter().copied().collect())
                    .collect(),
                drift,
                stats: traj.stats,
            })
        }
        FlowSpec::Reduced { params, state } => {
            let (traj, drift) = integrate_reduced(params, state, span, n_samples, config)?;
            Ok(FlowRun {
                columns: vec!["t", "P_t", "M1", "M2", "M3"],
                lambda: traj.lambda,
                rows: traj
                    .states
                    .iter()
                    .map(|s| s.iter().copied().collect())
                    .collect(),
                drift,
                stats: traj.stats,
            })
        }
        FlowSpec::Eh { gamma2, state } => {
            let (traj, drift) = integrate_eh(*gamma2, state, span, n_samples, config)?;
            Ok(FlowRun {
                columns: vec!["rho", "P_rho", "M1", "M2", "M3"],
                lambda: traj.lambda,
                rows: traj
                    .states
                    .iter()
                    .map(|s| s.iter().copied().collect())
                    .collect(),
                drift,
                stats: traj.stats,
            })
        }
    }
}

// Dormand-Prince 5(4) tableau and the Hairer-style controller constants.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.17;
const PI_BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_params;
    use approx::assert_relative_eq;
    use nalgebra::{SVector, Vector2};

    #[test]
    fn exponential_growth_to_tolerance() {
        let cfg = IntegratorConfig::default();
        let traj = integrate_ode(
            |y: &SVector<f64, 1>| Ok(*y),
            SVector::<f64, 1>::new(1.0),
            (0.0, 1.0),
            5,
            &cfg,
        )
        .unwrap();
        assert_eq!(traj.lambda.len(), 5);
        assert_relative_eq!(traj.states[4][0], 1.0_f64.exp(), max_relative = 1e-9);
        assert_relative_eq!(traj.states[2][0], 0.5_f64.exp(), max_relative = 1e-9);
    }

    #[test]
    fn oscillator_phase_and_energy() {
        let cfg = IntegratorConfig::default();
        let traj = integrate_ode(
            |y: &Vector2<f64>| Ok(Vector2::new(y[1], -y[0])),
            Vector2::new(1.0, 0.0),
            (0.0, 20.0),
            11,
            &cfg,
        )
        .unwrap();
        let y = traj.states.last().unwrap();
        assert_relative_eq!(y[0], 20.0_f64.cos(), epsilon = 1e-8);
        assert_relative_eq!(y[1], -20.0_f64.sin(), epsilon = 1e-8);
    }

    #[test]
    fn fixed_step_shows_fifth_order() {
        let run = |h: f64| {
            let cfg = IntegratorConfig {
                fixed_step: Some(h),
                ..Default::default()
            };
            let traj = integrate_ode(
                |y: &Vector2<f64>| Ok(Vector2::new(y[1], -y[0])),
                Vector2::new(1.0, 0.0),
                (0.0, 2.0),
                2,
                &cfg,
            )
            .unwrap();
            let y = traj.states[1];
            ((y[0] - 2.0_f64.cos()).powi(2) + (y[1] + 2.0_f64.sin()).powi(2)).sqrt()
        };
        let e1 = run(0.02);
        let e2 = run(0.01);
        let order = (e1 / e2).log2();
        assert!(order > 4.5, "observed order {order}, errors {e1:e}/{e2:e}");
    }

    #[test]
    fn domain_exit_is_reported() {
        // y' = -1 with a wall at y = 0.6: exits near lambda = 0.4.
        let cfg = IntegratorConfig::default();
        let out = integrate_ode(
            |y: &SVector<f64, 1>| {
                if y[0] <= 0.6 {
                    Err(Error::DomainError {
                        what: "y",
                        value: y[0],
                        constraint: "y > 0.6",
                    })
                } else {
                    Ok(SVector::<f64, 1>::new(-1.0))
                }
            },
            SVector::<f64, 1>::new(1.0),
            (0.0, 1.0),
            3,
            &cfg,
        );
        match out {
            Err(Error::DomainExit { lambda, .. }) => {
                assert!((lambda - 0.4).abs() < 0.05, "exit reported at {lambda}");
            }
            other => panic!("expected domain exit, got {other:?}"),
        }
    }

    #[test]
    fn sample_grid_is_exact() {
        let cfg = IntegratorConfig::default();
        let traj = integrate_ode(
            |_: &SVector<f64, 1>| Ok(SVector::<f64, 1>::new(1.0)),
            SVector::<f64, 1>::new(0.0),
            (0.0, 3.0),
            7,
            &cfg,
        )
        .unwrap();
        for (j, l) in traj.lambda.iter().enumerate() {
            assert_relative_eq!(*l, 0.5 * j as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_flow_conserves_all_four() {
        let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
        let state = MixedState {
            t: 3.2,
            p_t: 0.4,
            m: [0.9, -1.4, 2.1],
            phi: 0.3,
            theta: 1.1,
            psi: -0.6,
        };
        let cfg = IntegratorConfig::default();
        let (_, drift) = integrate_full(&params, &state, (0.0, 5.0), 26, &cfg).unwrap();
        assert!(drift.worst_relative() < 1e-9, "drift {:?}", drift.max_drift);
    }

    #[test]
    fn reduced_matches_full_projection() {
        let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
        let full0 = MixedState {
            t: 3.2,
            p_t: 0.4,
            m: [0.9, -1.4, 2.1],
            phi: 0.3,
            theta: 1.1,
            psi: -0.6,
        };
        let red0 = ReducedState {
            t: full0.t,
            p_t: full0.p_t,
            m: full0.m,
        };
        let cfg = IntegratorConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-13,
            ..Default::default()
        };
        let (full, _) = integrate_full(&params, &full0, (0.0, 4.0), 9, &cfg).unwrap();
        let (red, _) = integrate_reduced(&params, &red0, (0.0, 4.0), 9, &cfg).unwrap();
        for j in 0..9 {
            for i in 0..5 {
                assert_relative_eq!(
                    full.states[j][i],
                    red.states[j][i],
                    epsilon = 1e-8,
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn eh_flow_conserves_its_levels() {
        let state = EhState {
            rho: 2.5,
            p_rho: -0.6,
            m: [0.7, 0.4, 1.1],
        };
        let cfg = IntegratorConfig::default();
        let (_, drift) = integrate_eh(1.3, &state, (0.0, 6.0), 31, &cfg).unwrap();
        assert!(drift.worst_relative() < 1e-9, "drift {:?}", drift.max_drift);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let f = |y: &SVector<f64, 1>| Ok(*y);
        let y0 = SVector::<f64, 1>::new(1.0);
        assert!(matches!(
            integrate_ode(f, y0, (1.0, 0.0), 3, &IntegratorConfig::default()),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            integrate_ode(f, y0, (0.0, 1.0), 1, &IntegratorConfig::default()),
            Err(Error::InvalidConfig(_))
        ));
        let bad = IntegratorConfig {
            rel_tol: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            integrate_ode(f, y0, (0.0, 1.0), 3, &bad),
            Err(Error::InvalidConfig(_))
        ));
    }
}
