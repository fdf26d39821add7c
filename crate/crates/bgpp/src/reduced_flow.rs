//! The reduced five-dimensional system (t, P_t, M1, M2, M3).
//!
//! The three Euler angles never feed back into the radial pair or the angular
//! momenta, so the flow closes on these five variables with the degenerate
//! Poisson structure J2 (+) Mh. Its Casimir is m2 = sum M_i^2; together with
//! H and n2 = sum t_i M_i^2 that makes the reduced system integrable.
//!
//! On a joint level set (e, m2, n2) the radial velocity obeys
//!
//!   (dt/dlambda)^2 = S(t) = 4 ( n2 - m2 t + 2 e sqrt((t-t1)(t-t2)(t-t3)) ),
//!
//! and the Euler block linearises in the rescaled time tau with
//! d tau / d lambda = 4 f^2, i.e.
//!
//!   tau(t) = int_{t0}^{t} du / sqrt( (u-t1)(u-t2)(u-t3) S(u) )
//!
//! along a branch where t is monotone. `tau_of_t` evaluates that integral
//! with square-root desingularisation at both ends, so the base point may sit
//! exactly on the bolt t = max t_i or at a simple turning point of S.

use crate::error::{Error, Result};
use crate::metric::{profile, profile_with_derivatives, MetricParams};
use crate::special::adaptive_quad;
use nalgebra::{SMatrix, SVector};

pub type ReducedVector = SVector<f64, 5>;
pub type ReducedPoissonMatrix = SMatrix<f64, 5, 5>;

/// State of the reduced system, ordered (t, P_t, M1, M2, M3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub t: f64,
    pub p_t: f64,
    pub m: [f64; 3],
}

impl ReducedState {
    pub fn to_vector(&self) -> ReducedVector {
        ReducedVector::from_column_slice(&[self.t, self.p_t, self.m[0], self.m[1], self.m[2]])
    }

    pub fn from_vector(v: &ReducedVector) -> Self {
        ReducedState {
            t: v[0],
            p_t: v[1],
            m: [v[2], v[3], v[4]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.t, self.p_t, self.m[0], self.m[1], self.m[2]];
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "reduced state component",
            });
        }
        Ok(())
    }
}

/// Joint values of the commuting invariants that label a reduced orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSet {
    /// Energy H.
    pub e: f64,
    /// Total squared angular momentum.
    pub m2: f64,
    /// Parameter-weighted squared angular momentum.
    pub n2: f64,
}

/// Hamiltonian restricted to the reduced variables.
pub fn hamiltonian_reduced(params: &MetricParams, state: &ReducedState) -> Result<f64> {
    state.validate()?;
    let p = profile(params, state.t)?;
    let [m1, m2, m3] = state.m;
    Ok(0.5 * (state.p_t * state.p_t / p.f2 + m1 * m1 / p.a2 + m2 * m2 / p.b2 + m3 * m3 / p.c2))
}

/// The Casimir of the reduced bracket, sum M_i^2.
pub fn casimir(state: &ReducedState) -> f64 {
    let [m1, m2, m3] = state.m;
    m1 * m1 + m2 * m2 + m3 * m3
}

/// Level-set labels carried by a state.
pub fn levels_from_state(params: &MetricParams, state: &ReducedState) -> Result<LevelSet> {
    let [t1, t2, t3] = params.t_raw();
    let [m1, m2, m3] = state.m;
    Ok(LevelSet {
        e: hamiltonian_reduced(params, state)?,
        m2: m1 * m1 + m2 * m2 + m3 * m3,
        n2: t1 * m1 * m1 + t2 * m2 * m2 + t3 * m3 * m3,
    })
}

/// Degenerate Poisson structure J2 (+) Mh of the reduced system.
pub fn poisson_tensor_reduced(state: &ReducedState) -> Result<ReducedPoissonMatrix> {
    state.validate()?;
    let [m1, m2, m3] = state.m;
    let mut j = ReducedPoissonMatrix::zeros();
    j[(0, 1)] = 1.0;
    j[(1, 0)] = -1.0;
    let mh = [[0.0, m3, -m2], [-m3, 0.0, m1], [m2, -m1, 0.0]];
    for (r, row) in mh.iter().enumerate() {
        for (c, val) in row.iter().enumerate() {
            j[(2 + r, 2 + c)] = *val;
        }
    }
    Ok(j)
}

/// Reduced equations of motion.
pub fn rhs_reduced(params: &MetricParams, state: &ReducedState) -> Result<ReducedVector> {
    state.validate()?;
    let (p, d) = profile_with_derivatives(params, state.t)?;
    let [t1, t2, t3] = params.t_raw();
    let [m1, m2, m3] = state.m;

    let t_dot = state.p_t / p.f2;
    let p_t_dot = 0.5
        * (state.p_t * state.p_t * d.df2 / (p.f2 * p.f2)
            + m1 * m1 * d.da2 / (p.a2 * p.a2)
            + m2 * m2 * d.db2 / (p.b2 * p.b2)
            + m3 * m3 * d.dc2 / (p.c2 * p.c2));
    let four_f2 = 4.0 * p.f2;
    Ok(ReducedVector::from_column_slice(&[
        t_dot,
        p_t_dot,
        four_f2 * (t3 - t2) * m2 * m3,
        four_f2 * (t1 - t3) * m3 * m1,
        four_f2 * (t2 - t1) * m1 * m2,
    ]))
}

/// Radial polynomial S(t) = 4 (n2 - m2 t + 2 e sqrt(prod (t - t_i))).
///
/// On the level set, (dt/dlambda)^2 = S(t) identically, so its zeros are the
/// turning points of the radial motion.
pub fn s_polynomial(params: &MetricParams, levels: &LevelSet, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite {
            what: "radial coordinate t",
        });
    }
    let [t1, t2, t3] = params.t_raw();
    let prod = (t - t1) * (t - t2) * (t - t3);
    if prod < 0.0 {
        return Err(Error::DomainError {
            what: "t",
            value: t,
            constraint: "t >= max t_i so the root product is nonnegative",
        });
    }
    Ok(4.0 * (levels.n2 - levels.m2 * t + 2.0 * levels.e * prod.sqrt()))
}

/// Rescaled time tau between two radial positions on one monotone branch,
///
///   tau = int_{t_from}^{t_to} du / sqrt( (u-t1)(u-t2)(u-t3) S(u) ) ,
///
/// signed with the direction of integration. Both endpoints may be square-root
/// zeros of the weight (the bolt or a turning point); a sign change of S
/// strictly inside the interval is refused as `TurningPointCrossed`.
pub fn tau_of_t(params: &MetricParams, levels: &LevelSet, t_from: f64, t_to: f64) -> Result<f64> {
    let t_max = params.t_max();
    for (name, v) in [("t_from", t_from), ("t_to", t_to)] {
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "tau bound" });
        }
        if v < t_max {
            return Err(Error::DomainError {
                what: name,
                value: v,
                constraint: "must be >= max t_i",
            });
        }
    }
    if t_from == t_to {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if t_to > t_from {
        (t_from, t_to, 1.0)
    } else {
        (t_to, t_from, -1.0)
    };

    // Interior sign scan: a strictly negative S means the requested interval
    // spans a classically forbidden region.
    for j in 1..TURNING_SCAN_POINTS {
        let u = lo + (hi - lo) * (j as f64) / (TURNING_SCAN_POINTS as f64);
        if s_polynomial(params, levels, u)? < 0.0 {
            return Err(Error::TurningPointCrossed { near: u });
        }
    }

    let mid = 0.5 * (lo + hi);
    let left = tau_half(params, levels, lo, mid - lo, 1.0)?;
    let right = tau_half(params, levels, hi, hi - mid, -1.0)?;
    Ok(sign * (left + right))
}

/// One half of the tau integral, taken from an interval end inward with the
/// substitution u = base + dir s^2.
///
/// Two numerical hazards are removed from the integrand when the end is a
/// turning point. Distances u - t_i are formed as g_i + s^2, never by
/// subtracting from a rounded u, which would quantise them to the ulp of u.
/// And S/4 = A + B with A = n2 - m2 u, B = 2e sqrt(prod) suffers massive
/// cancellation near a root of S, so when A and B have opposite signs it is
/// evaluated as (B^2 - A^2)/(B - A): the numerator is a cubic in the offset
/// with fixed coefficients, the denominator is of size |A| + |B|. Without
/// this the integrand carries relative noise of order eps |B| / |S| and the
/// quadrature stalls above its tolerance.
fn tau_half(
    params: &MetricParams,
    levels: &LevelSet,
    base: f64,
    len: f64,
    dir: f64,
) -> Result<f64> {
    let [t1, t2, t3] = params.t_raw();
    let g = [base - t1, base - t2, base - t3];
    let m2 = levels.m2;
    let e = levels.e;
    let l0 = levels.n2 - m2 * base;
    // prod(d) = p0 + p1 d + p2 d^2 + d^3 around the end.
    let p0 = g[0] * g[1] * g[2];
    let p1 = g[0] * g[1] + g[1] * g[2] + g[2] * g[0];
    let p2 = g[0] + g[1] + g[2];
    // q(d) = 4 e^2 prod(d) - (l0 - m2 d)^2 = B^2 - A^2.
    let q0 = 4.0 * e * e * p0 - l0 * l0;
    let q1 = 4.0 * e * e * p1 + 2.0 * l0 * m2;
    let q2 = 4.0 * e * e * p2 - m2 * m2;
    let q3 = 4.0 * e * e;
    let f = move |s: f64| {
        let d = dir * s * s;
        let prod = (g[0] + d) * (g[1] + d) * (g[2] + d);
        if prod <= 0.0 {
            return 0.0;
        }
        let a = l0 - m2 * d;
        let b = 2.0 * e * prod.sqrt();
        let s_quarter = if a * b <= 0.0 {
            let q = q0 + d * (q1 + d * (q2 + d * q3));
            let denom = b - a;
            if denom == 0.0 {
                0.0
            } else {
                q / denom
            }
        } else {
            a + b
        };
        let w = 4.0 * prod * s_quarter;
        if w <= 0.0 {
            0.0
        } else {
            2.0 * s / w.sqrt()
        }
    };
    Ok(adaptive_quad(f, 0.0, len.sqrt(), TAU_ABS_TOL, TAU_REL_TOL)?.value)
}

const TURNING_SCAN_POINTS: usize = 200;
const TAU_ABS_TOL: f64 = 1e-14;
const TAU_REL_TOL: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_params;
    use approx::assert_relative_eq;

    fn params_012() -> MetricParams {
        validate_params(0.0, 1.0, 2.0, 1e-12).unwrap()
    }

    fn sample_state() -> ReducedState {
        ReducedState {
            t: 3.2,
            p_t: 0.7,
            m: [0.9, -1.4, 2.1],
        }
    }

    #[test]
    fn casimir_is_annihilated_exactly() {
        // Mh * grad(m2) pairs identical products with opposite signs, so the
        // cancellation is exact in floating point, not just small.
        let s = sample_state();
        let j = poisson_tensor_reduced(&s).unwrap();
        let grad =
            ReducedVector::from_column_slice(&[0.0, 0.0, 2.0 * s.m[0], 2.0 * s.m[1], 2.0 * s.m[2]]);
        let v = j * grad;
        assert!(v.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn tensor_rank_is_four() {
        let s = sample_state();
        let j = poisson_tensor_reduced(&s).unwrap();
        let svals = nalgebra::DMatrix::from_iterator(5, 5, j.iter().copied())
            .svd(false, false)
            .singular_values;
        let max = svals.max();
        let rank = svals.iter().filter(|s| **s > 1e-12 * max).count();
        assert_eq!(rank, 4);
    }

    #[test]
    fn reduced_rhs_matches_full_flow() {
        let params = params_012();
        let s = sample_state();
        let full = crate::full_flow::rhs_full(
            &params,
            &crate::full_flow::MixedState {
                t: s.t,
                p_t: s.p_t,
                m: s.m,
                phi: 0.4,
                theta: 1.1,
                psi: -0.2,
            },
        )
        .unwrap();
        let red = rhs_reduced(&params, &s).unwrap();
        for i in 0..5 {
            assert_relative_eq!(red[i], full[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn levels_are_conserved_along_rhs() {
        let params = params_012();
        let s = sample_state();
        let rhs = rhs_reduced(&params, &s).unwrap();
        let h = 1e-6;
        for pick in 0..3 {
            let val = |st: &ReducedState| {
                let lv = levels_from_state(&params, st).unwrap();
                [lv.e, lv.m2, lv.n2][pick]
            };
            let v = s.to_vector();
            let mut rate = 0.0;
            for i in 0..5 {
                let mut vp = v;
                let mut vm = v;
                vp[i] += h;
                vm[i] -= h;
                rate += (val(&ReducedState::from_vector(&vp))
                    - val(&ReducedState::from_vector(&vm)))
                    / (2.0 * h)
                    * rhs[i];
            }
            assert!(rate.abs() < 1e-8, "level {pick} drifts at {rate:e}");
        }
    }

    #[test]
    fn radial_polynomial_frozen_value() {
        // params (0,1,2), e = 1, m2 = 1, n2 = 1.5 at t = 3:
        // prod = 3*2*1 = 6, S = 4 (1.5 - 3 + 2 sqrt 6) = 8 sqrt 6 - 6.
        let params = params_012();
        let levels = LevelSet {
            e: 1.0,
            m2: 1.0,
            n2: 1.5,
        };
        let s = s_polynomial(&params, &levels, 3.0).unwrap();
        assert_relative_eq!(s, 8.0 * 6.0_f64.sqrt() - 6.0, max_relative = 1e-15);
    }

    #[test]
    fn radial_speed_identity() {
        // (dt/dlambda)^2 = S(t) on the level set of the state itself.
        let params = params_012();
        for s in [
            sample_state(),
            ReducedState {
                t: 2.4,
                p_t: -1.3,
                m: [0.2, 0.8, -0.5],
            },
        ] {
            let levels = levels_from_state(&params, &s).unwrap();
            let t_dot = rhs_reduced(&params, &s).unwrap()[0];
            let s_val = s_polynomial(&params, &levels, s.t).unwrap();
            assert_relative_eq!(t_dot * t_dot, s_val, max_relative = 1e-12);
        }
    }

    #[test]
    fn tau_signs_and_additivity() {
        let params = params_012();
        let levels = LevelSet {
            e: 1.0,
            m2: 1.0,
            n2: 1.5,
        };
        // S > 0 on [2.1, 4] for these levels (checked by the scan inside).
        let a = 2.2;
        let b = 3.0;
        let c = 4.0;
        let ab = tau_of_t(&params, &levels, a, b).unwrap();
        let bc = tau_of_t(&params, &levels, b, c).unwrap();
        let ac = tau_of_t(&params, &levels, a, c).unwrap();
        assert!(ab > 0.0 && bc > 0.0);
        assert_relative_eq!(ab + bc, ac, max_relative = 1e-10);
        let ba = tau_of_t(&params, &levels, b, a).unwrap();
        assert_relative_eq!(ba, -ab, max_relative = 1e-14);
        assert_eq!(tau_of_t(&params, &levels, b, b).unwrap(), 0.0);
    }

    #[test]
    fn tau_from_the_bolt_converges() {
        // Base point exactly at t = max t_i, where the root product vanishes;
        // levels chosen so S(t_max) > 0 strictly.
        let params = params_012();
        let levels = LevelSet {
            e: 1.0,
            m2: 0.5,
            n2: 1.25,
        };
        let tau = tau_of_t(&params, &levels, 2.0, 3.0).unwrap();
        assert!(tau.is_finite() && tau > 0.0);
        // Splitting at an interior point must give the same answer.
        let t1 = tau_of_t(&params, &levels, 2.0, 2.5).unwrap();
        let t2 = tau_of_t(&params, &levels, 2.5, 3.0).unwrap();
        assert_relative_eq!(t1 + t2, tau, max_relative = 1e-9);
    }

    #[test]
    fn forbidden_interval_is_refused() {
        // With e = 1, m2 = 1, n2 = 1.5 the region just above t = 2 has S < 0
        // (S(2.01) < 0 < S(2.05)), so spanning it must error out.
        let params = params_012();
        let levels = LevelSet {
            e: 1.0,
            m2: 1.0,
            n2: 1.5,
        };
        assert!(s_polynomial(&params, &levels, 2.01).unwrap() < 0.0);
        assert!(matches!(
            tau_of_t(&params, &levels, 2.005, 2.5),
            Err(Error::TurningPointCrossed { .. })
        ));
    }

    #[test]
    fn tau_below_domain_is_rejected() {
        let params = params_012();
        let levels = LevelSet {
            e: 1.0,
            m2: 1.0,
            n2: 1.5,
        };
        assert!(matches!(
            tau_of_t(&params, &levels, 1.5, 3.0),
            Err(Error::DomainError { .. })
        ));
    }
}
