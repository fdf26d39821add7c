//! Geodesics of the Eguchi-Hanson space.
//!
//! When the two largest metric parameters coincide the geometry collapses,
//! after the shift t = rho^2 + t_distinct, to the Eguchi-Hanson metric with
//! bolt radius gamma = sqrt(repeated - distinct). The reduced Hamiltonian is
//!
//!   H = (1/2) [ (rho^2 - gamma^2)/rho P_rho^2
//!               + (M1^2 + M2^2)/rho + rho M3^2/(rho^2 - gamma^2) ] ,
//!
//! with M3 conserved and (M1, M2) precessing rigidly. A geodesic is labelled
//! by (e, m3, mu2) = (H, M3, M1^2 + M2^2), and the radial motion obeys
//!
//!   (d rho / d lambda)^2 = R(rho)/rho^2 ,
//!   R = 2 e rho^3 - (mu2 + m3^2) rho^2 - 2 e gamma^2 rho + gamma^2 mu2 .
//!
//! For e > 0 and m3 != 0 the cubic R has three simple real roots interlaced
//! with the bolt, -gamma < rho1 < 0 < rho2 < gamma < rho3, and the orbit
//! lives on [rho3, infinity). The reparametrised time with
//! d tau / d lambda = 1/(rho (rho^2 - gamma^2)) integrates in closed form to
//! incomplete elliptic integrals of the first and third kind; on the
//! degenerate locus m3 = 0, mu2 = 2 e gamma it collapses to an elementary
//! expression. Both are exposed here next to their building blocks.

use crate::error::{Error, Result};
use crate::special::{adaptive_quad, elliptic_f, elliptic_pi};
use nalgebra::SVector;

pub type EhVector = SVector<f64, 5>;

/// Reduced state (rho, P_rho, M1, M2, M3) of the Eguchi-Hanson flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhState {
    pub rho: f64,
    pub p_rho: f64,
    pub m: [f64; 3],
}

impl EhState {
    pub fn to_vector(&self) -> EhVector {
        EhVector::from_column_slice(&[self.rho, self.p_rho, self.m[0], self.m[1], self.m[2]])
    }

    pub fn from_vector(v: &EhVector) -> Self {
        EhState {
            rho: v[0],
            p_rho: v[1],
            m: [v[2], v[3], v[4]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.rho, self.p_rho, self.m[0], self.m[1], self.m[2]];
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "Eguchi-Hanson state component",
            });
        }
        Ok(())
    }
}

/// Conserved labels of an Eguchi-Hanson geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhLevels {
    /// Energy H.
    pub e: f64,
    /// Conserved angular momentum about the distinct axis.
    pub m3: f64,
    /// Conserved transverse amplitude M1^2 + M2^2.
    pub mu2: f64,
}

fn check_gamma2(gamma2: f64) -> Result<f64> {
    if !gamma2.is_finite() {
        return Err(Error::NonFinite { what: "gamma2" });
    }
    if gamma2 <= 0.0 {
        return Err(Error::DomainError {
            what: "gamma2",
            value: gamma2,
            constraint: "bolt radius squared must be positive",
        });
    }
    Ok(gamma2.sqrt())
}

fn check_rho(gamma: f64, rho: f64) -> Result<()> {
    if !rho.is_finite() {
        return Err(Error::NonFinite { what: "rho" });
    }
    if rho <= gamma {
        return Err(Error::DomainError {
            what: "rho",
            value: rho,
            constraint: "must lie outside the bolt, rho > gamma",
        });
    }
    Ok(())
}

pub fn eh_hamiltonian(gamma2: f64, state: &EhState) -> Result<f64> {
    let gamma = check_gamma2(gamma2)?;
    state.validate()?;
    check_rho(gamma, state.rho)?;
    let rho = state.rho;
    let ring = rho * rho - gamma2;
    let [m1, m2, m3] = state.m;
    Ok(0.5
        * (ring / rho * state.p_rho * state.p_rho
            + (m1 * m1 + m2 * m2) / rho
            + rho * m3 * m3 / ring))
}

/// Equations of motion in the affine parameter lambda.
pub fn eh_rhs(gamma2: f64, state: &EhState) -> Result<EhVector> {
    let gamma = check_gamma2(gamma2)?;
    state.validate()?;
    check_rho(gamma, state.rho)?;
    let rho = state.rho;
    let ring = rho * rho - gamma2;
    let [m1, m2, m3] = state.m;
    let rho_dot = ring / rho * state.p_rho;
    let p_rho_dot = 0.5
        * (-state.p_rho * state.p_rho * (rho * rho + gamma2) / (rho * rho)
            + (m1 * m1 + m2 * m2) / (rho * rho)
            + m3 * m3 * (rho * rho + gamma2) / (ring * ring));
    let spin = gamma2 * m3 / (rho * ring);
    Ok(EhVector::from_column_slice(&[
        rho_dot,
        p_rho_dot,
        -spin * m2,
        spin * m1,
        0.0,
    ]))
}

pub fn eh_levels_from_state(gamma2: f64, state: &EhState) -> Result<EhLevels> {
    Ok(EhLevels {
        e: eh_hamiltonian(gamma2, state)?,
        m3: state.m[2],
        mu2: state.m[0] * state.m[0] + state.m[1] * state.m[1],
    })
}

fn check_levels(levels: &EhLevels) -> Result<()> {
    if ![levels.e, levels.m3, levels.mu2]
        .iter()
        .all(|x| x.is_finite())
    {
        return Err(Error::NonFinite {
            what: "Eguchi-Hanson level",
        });
    }
    if levels.mu2 < 0.0 {
        return Err(Error::NegativeParameter {
            name: "mu2",
            value: levels.mu2,
        });
    }
    Ok(())
}

/// Coefficients of the radial cubic R(rho), highest power first.
pub fn r_cubic(gamma2: f64, levels: &EhLevels) -> Result<[f64; 4]> {
    check_gamma2(gamma2)?;
    check_levels(levels)?;
    Ok([
        2.0 * levels.e,
        -(levels.mu2 + levels.m3 * levels.m3),
        -2.0 * levels.e * gamma2,
        gamma2 * levels.mu2,
    ])
}

/// R(rho) itself.
pub fn r_value(gamma2: f64, levels: &EhLevels, rho: f64) -> Result<f64> {
    let [a, b, c, d] = r_cubic(gamma2, levels)?;
    Ok(((a * rho + b) * rho + c) * rho + d)
}

/// Discriminant of the radial cubic in closed form,
///
///   disc = 4 g2 [ (mu2^2 - 4 g2 e^2)^2
///                 + m3^2 ( g2 e^2 (20 mu2 + m3^2)
///                          + mu2 (3 mu2^2 + m3^4 + 3 mu2 m3^2) ) ] ,
///
/// manifestly positive as soon as m3 != 0 (or mu2^2 != 4 g2 e^2), so the
/// turning points never collide away from the m3 = 0 locus.
pub fn eh_discriminant(gamma2: f64, levels: &EhLevels) -> Result<f64> {
    check_gamma2(gamma2)?;
    check_levels(levels)?;
    let e2 = levels.e * levels.e;
    let m32 = levels.m3 * levels.m3;
    let mu2 = levels.mu2;
    let core = mu2 * mu2 - 4.0 * gamma2 * e2;
    Ok(4.0
        * gamma2
        * (core * core
            + m32
                * (gamma2 * e2 * (20.0 * mu2 + m32)
                    + mu2 * (3.0 * mu2 * mu2 + m32 * m32 + 3.0 * mu2 * m32))))
}

/// The three turning radii, ascending. Needs e > 0 and m3 != 0; the boundary
/// cases dispatch to dedicated errors (`BoundaryBolt` when a root sits on the
/// bolt itself, `DegenerateRoots` when two roots collide).
pub fn eh_roots(gamma2: f64, levels: &EhLevels) -> Result<[f64; 3]> {
    let gamma = check_gamma2(gamma2)?;
    check_levels(levels)?;
    if levels.e <= 0.0 {
        return Err(Error::DomainError {
            what: "e",
            value: levels.e,
            constraint: "unbound orbits need positive energy",
        });
    }
    if levels.m3 == 0.0 {
        // R factors as (2 e rho - mu2)(rho^2 - gamma^2): the bolt is a root.
        let third = levels.mu2 / (2.0 * levels.e);
        let separation = (third - gamma).abs();
        if separation <= DEGENERATE_SEP_TOL * gamma.max(third) {
            return Err(Error::DegenerateRoots { separation });
        }
        return Err(Error::BoundaryBolt);
    }

    let [a, b, c, d] = r_cubic(gamma2, levels)?;
    // Depressed form x^3 + p x + q with rho = x - b/(3a), then the
    // three-real-root cosine parametrisation.
    let shift = -b / (3.0 * a);
    let p = (3.0 * a * c - b * b) / (3.0 * a * a);
    let q = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
    if p >= 0.0 {
        // Cannot happen for interlaced real roots; guard against level noise.
        return Err(Error::DegenerateRoots { separation: 0.0 });
    }
    let scale = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
    let theta = arg.clamp(-1.0, 1.0).acos();
    let mut roots = [0.0_f64; 3];
    for (k, slot) in roots.iter_mut().enumerate() {
        let x = scale * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
        let mut rho = x + shift;
        // Two Newton steps take the trig roots to full precision.
        for _ in 0..2 {
            let val = ((a * rho + b) * rho + c) * rho + d;
            let der = (3.0 * a * rho + 2.0 * b) * rho + c;
            if der != 0.0 {
                rho -= val / der;
            }
        }
        *slot = rho;
    }
    roots.sort_by(f64::total_cmp);
    let span = roots[2] - roots[0];
    let gap = (roots[1] - roots[0]).min(roots[2] - roots[1]);
    if gap <= DEGENERATE_SEP_TOL * span.max(gamma) {
        return Err(Error::DegenerateRoots { separation: gap });
    }
    Ok(roots)
}

/// Rigid rotation of the transverse angular momenta: in the rescaled time
/// tau the pair turns at omega = gamma^2 m3,
///
///   M1 = mu sin(omega tau + phase), M2 = -mu cos(omega tau + phase).
#[derive(Debug, Clone, Copy)]
pub struct EhRotor {
    pub mu: f64,
    pub omega: f64,
    pub phase: f64,
    pub m3: f64,
}

impl EhRotor {
    pub fn eval(&self, tau: f64) -> [f64; 3] {
        let (s, c) = (self.omega * tau + self.phase).sin_cos();
        [self.mu * s, -self.mu * c, self.m3]
    }
}

pub fn eh_m12_solution(gamma2: f64, state: &EhState) -> Result<EhRotor> {
    check_gamma2(gamma2)?;
    state.validate()?;
    let [m1, m2, m3] = state.m;
    let mu = (m1 * m1 + m2 * m2).sqrt();
    let phase = if mu == 0.0 { 0.0 } else { m1.atan2(-m2) };
    Ok(EhRotor {
        mu,
        omega: gamma2 * m3,
        phase,
        m3,
    })
}

/// Reparametrised time tau(rho) measured from the outer turning point rho3,
/// in closed form:
///
///   tau = T(rho3) - T(rho),
///   T = [ (g + r1) Pi(s, n-, k2) + (g - r1) Pi(s, n+, k2) - 2 g F(s, k2) ]
///       / ( g sqrt(2 e) sqrt(r3 - r1) (g^2 - r1^2) ) ,
///
/// with sin^2 s = (r3 - r1)/(rho - r1), k2 = (r2 - r1)/(r3 - r1) and the
/// characteristics n- = (g - r1)/(r3 - r1), n+ = -(g + r1)/(r3 - r1). T is
/// the (finite) tail integral of d tau = d rho / ((rho^2 - g^2) sqrt R) out
/// to infinite radius, so tau increases from zero along the outbound branch
/// and stays finite: far geodesics spin through a bounded total angle.
pub fn eh_tau_closed(gamma2: f64, levels: &EhLevels, rho: f64) -> Result<f64> {
    let gamma = check_gamma2(gamma2)?;
    let roots = eh_roots(gamma2, levels)?;
    if !rho.is_finite() {
        return Err(Error::NonFinite { what: "rho" });
    }
    if rho < roots[2] {
        return Err(Error::DomainError {
            what: "rho",
            value: rho,
            constraint: "must lie on the outer branch, rho >= rho3",
        });
    }
    Ok(
        eh_tau_tail(gamma, levels.e, &roots, roots[2])?
            - eh_tau_tail(gamma, levels.e, &roots, rho)?,
    )
}

fn eh_tau_tail(gamma: f64, e: f64, roots: &[f64; 3], rho: f64) -> Result<f64> {
    let [r1, r2, r3] = *roots;
    let span = r3 - r1;
    let k2 = (r2 - r1) / span;
    let n_minus = (gamma - r1) / span;
    let n_plus = -(gamma + r1) / span;
    let sigma = ((span / (rho - r1)).min(1.0)).sqrt().asin();
    let bracket = (gamma + r1) * elliptic_pi(sigma, n_minus, k2)?
        + (gamma - r1) * elliptic_pi(sigma, n_plus, k2)?
        - 2.0 * gamma * elliptic_f(sigma, k2)?;
    let denom = gamma * (2.0 * e).sqrt() * span.sqrt() * (gamma * gamma - r1 * r1);
    Ok(bracket / denom)
}

/// tau(rho) on the degenerate locus m3 = 0, mu2 = 2 e gamma, where the outer
/// turning point collides with the bolt and the elliptic form collapses to
///
///   tau = [ (g - 3 rho) / ((rho - g) sqrt(rho + g))
///           + 3 ln( (sqrt(rho+g) + sqrt(2g)) / (sqrt(rho+g) - sqrt(2g)) )
///             / (2 sqrt(2g)) ] / (4 sqrt(2 e) g^2) ,
///
/// normalised to vanish at infinite radius and diverging toward the bolt
/// (the orbit takes unbounded tau to reach it). Differences give elapsed
/// reparametrised time along the orbit.
pub fn eh_tau_degenerate(gamma2: f64, levels: &EhLevels, rho: f64) -> Result<f64> {
    let gamma = check_gamma2(gamma2)?;
    check_levels(levels)?;
    if levels.e <= 0.0 {
        return Err(Error::DomainError {
            what: "e",
            value: levels.e,
            constraint: "the degenerate locus needs positive energy",
        });
    }
    let defect = levels.mu2 - 2.0 * levels.e * gamma;
    let level_scale = levels.mu2.abs() + 2.0 * levels.e * gamma;
    if levels.m3.abs() > DEGENERATE_LOCUS_TOL * level_scale.sqrt()
        || defect.abs() > DEGENERATE_LOCUS_TOL * level_scale
    {
        return Err(Error::NotDegenerate {
            m3: levels.m3,
            defect,
        });
    }
    check_rho(gamma, rho)?;
    let sq = (rho + gamma).sqrt();
    let s2g = (2.0 * gamma).sqrt();
    let bracket = (gamma - 3.0 * rho) / ((rho - gamma) * sq)
        + 3.0 / (2.0 * s2g) * ((sq + s2g) / (sq - s2g)).ln();
    Ok(bracket / (4.0 * (2.0 * levels.e).sqrt() * gamma2))
}

/// Reference quadrature for tau between two radii strictly outside the bolt,
/// desingularised at both ends so either bound may sit on a simple turning
/// point. Used to cross-check the closed forms.
pub fn eh_tau_quadrature(gamma2: f64, levels: &EhLevels, rho_a: f64, rho_b: f64) -> Result<f64> {
    let gamma = check_gamma2(gamma2)?;
    check_levels(levels)?;
    check_rho(gamma, rho_a)?;
    check_rho(gamma, rho_b)?;
    if rho_a == rho_b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if rho_b > rho_a {
        (rho_a, rho_b, 1.0)
    } else {
        (rho_b, rho_a, -1.0)
    };
    for j in 1..TURNING_SCAN_POINTS {
        let u = lo + (hi - lo) * (j as f64) / (TURNING_SCAN_POINTS as f64);
        if r_value(gamma2, levels, u)? < 0.0 {
            return Err(Error::TurningPointCrossed { near: u });
        }
    }
    let mid = 0.5 * (lo + hi);
    let left = eh_tau_half(gamma2, levels, lo, mid - lo, 1.0)?;
    let right = eh_tau_half(gamma2, levels, hi, hi - mid, -1.0)?;
    Ok(sign * (left + right))
}

/// One half of the tau integral from an interval end inward, u = base +
/// dir s^2, with R Taylor-shifted to the end so the integrand is a smooth
/// function of the offset. Evaluating R at the rounded u itself would
/// staircase near a turning point and stall the quadrature.
fn eh_tau_half(gamma2: f64, levels: &EhLevels, base: f64, len: f64, dir: f64) -> Result<f64> {
    let [a3, a2, a1, _] = r_cubic(gamma2, levels)?;
    let c0 = r_value(gamma2, levels, base)?;
    let c1 = (3.0 * a3 * base + 2.0 * a2) * base + a1;
    let c2 = 3.0 * a3 * base + a2;
    let ring0 = base * base - gamma2;
    let f = move |s: f64| {
        let d = dir * s * s;
        let r = c0 + d * (c1 + d * (c2 + d * a3));
        if r <= 0.0 {
            return 0.0;
        }
        let ring = ring0 + d * (2.0 * base + d);
        2.0 * s / (ring * r.sqrt())
    };
    Ok(adaptive_quad(f, 0.0, len.sqrt(), TAU_ABS_TOL, TAU_REL_TOL)?.value)
}

const DEGENERATE_SEP_TOL: f64 = 1e-9;
const DEGENERATE_LOCUS_TOL: f64 = 1e-12;
const TURNING_SCAN_POINTS: usize = 200;
const TAU_ABS_TOL: f64 = 1e-14;
const TAU_REL_TOL: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn levels_111() -> EhLevels {
        EhLevels {
            e: 1.0,
            m3: 1.0,
            mu2: 1.0,
        }
    }

    #[test]
    fn hamiltonian_frozen_value() {
        // gamma2 = 1, rho = 2, P_rho = 1, M = 0: H = (1/2)(3/2) = 0.75.
        let s = EhState {
            rho: 2.0,
            p_rho: 1.0,
            m: [0.0, 0.0, 0.0],
        };
        assert_relative_eq!(eh_hamiltonian(1.0, &s).unwrap(), 0.75, max_relative = 1e-15);
    }

    #[test]
    fn cubic_frozen_factorisation() {
        // gamma2 = 1, e = 1/2, mu2 = 1, m3 = 0: R = (rho - 1)^2 (rho + 1).
        let lv = EhLevels {
            e: 0.5,
            m3: 0.0,
            mu2: 1.0,
        };
        assert_eq!(r_cubic(1.0, &lv).unwrap(), [1.0, -1.0, -1.0, 1.0]);
        let rho = 2.3;
        assert_relative_eq!(
            r_value(1.0, &lv, rho).unwrap(),
            (rho - 1.0) * (rho - 1.0) * (rho + 1.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn discriminant_frozen_values() {
        assert_relative_eq!(
            eh_discriminant(1.0, &levels_111()).unwrap(),
            148.0,
            max_relative = 1e-14
        );
        // On the degenerate locus the discriminant vanishes exactly.
        let lv = EhLevels {
            e: 0.5,
            m3: 0.0,
            mu2: 1.0,
        };
        assert_eq!(eh_discriminant(1.0, &lv).unwrap(), 0.0);
    }

    #[test]
    fn discriminant_matches_textbook_formula() {
        let check = |gamma2: f64, lv: EhLevels| {
            let [a, b, c, d] = r_cubic(gamma2, &lv).unwrap();
            let reference = 18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c
                - 4.0 * a * c * c * c
                - 27.0 * a * a * d * d;
            let closed = eh_discriminant(gamma2, &lv).unwrap();
            assert_relative_eq!(closed, reference, max_relative = 1e-12);
        };
        check(1.0, levels_111());
        check(
            2.0,
            EhLevels {
                e: 0.5,
                m3: 2.0,
                mu2: 1.5,
            },
        );
        check(
            0.3,
            EhLevels {
                e: 2.5,
                m3: -0.7,
                mu2: 0.2,
            },
        );
    }

    #[test]
    fn roots_are_interlaced_with_the_bolt() {
        let gamma2 = 1.0;
        let roots = eh_roots(gamma2, &levels_111()).unwrap();
        let g = gamma2.sqrt();
        assert!(-g < roots[0] && roots[0] < 0.0);
        assert!(0.0 < roots[1] && roots[1] < g);
        assert!(g < roots[2]);
        for r in roots {
            assert!(
                r_value(gamma2, &levels_111(), r).unwrap().abs() < 1e-12,
                "root residual too large"
            );
        }
        // Vieta: sum of roots = (mu2 + m3^2)/(2e).
        assert_relative_eq!(
            roots.iter().sum::<f64>(),
            (levels_111().mu2 + 1.0) / 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn root_edge_cases_dispatch() {
        let bolt = EhLevels {
            e: 0.5,
            m3: 0.0,
            mu2: 3.0,
        };
        assert!(matches!(eh_roots(1.0, &bolt), Err(Error::BoundaryBolt)));
        let degenerate = EhLevels {
            e: 0.5,
            m3: 0.0,
            mu2: 1.0,
        };
        assert!(matches!(
            eh_roots(1.0, &degenerate),
            Err(Error::DegenerateRoots { .. })
        ));
        let bound = EhLevels {
            e: -0.1,
            m3: 1.0,
            mu2: 1.0,
        };
        assert!(matches!(
            eh_roots(1.0, &bound),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn radial_speed_identity() {
        // (d rho / d lambda)^2 = R/rho^2 on the state's own level set.
        let gamma2 = 1.3;
        let s = EhState {
            rho: 2.1,
            p_rho: -0.8,
            m: [0.5, -0.3, 0.9],
        };
        let lv = eh_levels_from_state(gamma2, &s).unwrap();
        let rho_dot = eh_rhs(gamma2, &s).unwrap()[0];
        assert_relative_eq!(
            rho_dot * rho_dot,
            r_value(gamma2, &lv, s.rho).unwrap() / (s.rho * s.rho),
            max_relative = 1e-12
        );
    }

    #[test]
    fn rhs_is_hamiltonian_flow() {
        let gamma2 = 0.7;
        let s = EhState {
            rho: 1.9,
            p_rho: 0.6,
            m: [0.4, 0.2, -1.1],
        };
        let rhs = eh_rhs(gamma2, &s).unwrap();
        let h = 1e-6;
        let dh = |i: usize, delta: f64| {
            let mut v = s.to_vector();
            v[i] += delta;
            eh_hamiltonian(gamma2, &EhState::from_vector(&v)).unwrap()
        };
        // rho_dot = dH/dP_rho, P_rho_dot = -dH/drho.
        assert_relative_eq!(
            rhs[0],
            (dh(1, h) - dh(1, -h)) / (2.0 * h),
            max_relative = 1e-8
        );
        assert_relative_eq!(
            rhs[1],
            -(dh(0, h) - dh(0, -h)) / (2.0 * h),
            max_relative = 1e-8
        );
        // M3 is exactly conserved, and H drifts at rounding level only.
        assert_eq!(rhs[4], 0.0);
        let mut rate = 0.0;
        for i in 0..5 {
            rate += (dh(i, h) - dh(i, -h)) / (2.0 * h) * rhs[i];
        }
        assert!(rate.abs() < 1e-7, "energy drift rate {rate:e}");
    }

    #[test]
    fn transverse_rotor_matches_dynamics() {
        let gamma2 = 1.4;
        let s = EhState {
            rho: 2.0,
            p_rho: 0.0,
            m: [0.3, -0.8, 0.6],
        };
        let rotor = eh_m12_solution(gamma2, &s).unwrap();
        let at0 = rotor.eval(0.0);
        assert_relative_eq!(at0[0], 0.3, epsilon = 1e-15);
        assert_relative_eq!(at0[1], -0.8, epsilon = 1e-15);
        assert_relative_eq!(at0[2], 0.6, epsilon = 1e-15);
        // d M1/d tau = -gamma2 m3 M2 and d M2/d tau = gamma2 m3 M1.
        let h = 1e-6;
        let plus = rotor.eval(h);
        let minus = rotor.eval(-h);
        assert_relative_eq!(
            (plus[0] - minus[0]) / (2.0 * h),
            -gamma2 * 0.6 * (-0.8),
            max_relative = 1e-9
        );
        assert_relative_eq!(
            (plus[1] - minus[1]) / (2.0 * h),
            gamma2 * 0.6 * 0.3,
            max_relative = 1e-9
        );
        // The amplitude never changes.
        let far = rotor.eval(17.3);
        assert_relative_eq!(
            far[0] * far[0] + far[1] * far[1],
            0.73,
            max_relative = 1e-12
        );
    }

    #[test]
    fn closed_tau_starts_at_zero_and_increases() {
        let gamma2 = 1.0;
        let roots = eh_roots(gamma2, &levels_111()).unwrap();
        let tau3 = eh_tau_closed(gamma2, &levels_111(), roots[2]).unwrap();
        assert!(tau3.abs() < 1e-13);
        let mut last = 0.0;
        for step in 1..=10 {
            let rho = roots[2] + 0.7 * step as f64;
            let tau = eh_tau_closed(gamma2, &levels_111(), rho).unwrap();
            assert!(tau > last);
            last = tau;
        }
    }

    #[test]
    fn closed_tau_derivative_matches_integrand() {
        let gamma2 = 1.0;
        let lv = levels_111();
        let roots = eh_roots(gamma2, &lv).unwrap();
        let rho = roots[2] + 1.7;
        let h = 1e-5;
        let fd = (eh_tau_closed(gamma2, &lv, rho + h).unwrap()
            - eh_tau_closed(gamma2, &lv, rho - h).unwrap())
            / (2.0 * h);
        let exact = 1.0 / ((rho * rho - gamma2) * r_value(gamma2, &lv, rho).unwrap().sqrt());
        assert_relative_eq!(fd, exact, max_relative = 1e-8);
    }

    #[test]
    fn closed_tau_agrees_with_quadrature() {
        let gamma2 = 1.0;
        let lv = levels_111();
        let roots = eh_roots(gamma2, &lv).unwrap();
        let pairs = [
            (roots[2] + 0.3, roots[2] + 1.1),
            (roots[2] + 0.05, roots[2] + 4.0),
            (roots[2] + 2.0, roots[2] + 9.5),
        ];
        for (a, b) in pairs {
            let closed =
                eh_tau_closed(gamma2, &lv, b).unwrap() - eh_tau_closed(gamma2, &lv, a).unwrap();
            let quad = eh_tau_quadrature(gamma2, &lv, a, b).unwrap();
            assert_relative_eq!(closed, quad, max_relative = 1e-10);
        }
        // From the turning point itself, the quadrature end is singular.
        let closed = eh_tau_closed(gamma2, &lv, roots[2] + 2.0).unwrap();
        let quad = eh_tau_quadrature(gamma2, &lv, roots[2], roots[2] + 2.0).unwrap();
        assert_relative_eq!(closed, quad, max_relative = 1e-9);
    }

    #[test]
    fn degenerate_tau_matches_its_integrand() {
        // gamma = 1, e = 0.5: mu2 = 2 e gamma = 1, m3 = 0.
        let gamma2 = 1.0;
        let lv = EhLevels {
            e: 0.5,
            m3: 0.0,
            mu2: 1.0,
        };
        let h = 1e-5;
        for rho in [2.0, 2.5, 3.0] {
            let fd = (eh_tau_degenerate(gamma2, &lv, rho + h).unwrap()
                - eh_tau_degenerate(gamma2, &lv, rho - h).unwrap())
                / (2.0 * h);
            let exact = 1.0 / ((rho * rho - gamma2) * r_value(gamma2, &lv, rho).unwrap().sqrt());
            assert_relative_eq!(fd, exact, max_relative = 1e-8);
        }
        let diff = eh_tau_degenerate(gamma2, &lv, 3.0).unwrap()
            - eh_tau_degenerate(gamma2, &lv, 2.0).unwrap();
        let quad = eh_tau_quadrature(gamma2, &lv, 2.0, 3.0).unwrap();
        assert_relative_eq!(diff, quad, max_relative = 1e-10);
    }

    #[test]
    fn degenerate_tau_needs_the_locus() {
        let lv = EhLevels {
            e: 0.5,
            m3: 0.1,
            mu2: 1.0,
        };
        assert!(matches!(
            eh_tau_degenerate(1.0, &lv, 2.0),
            Err(Error::NotDegenerate { .. })
        ));
        let lv = EhLevels {
            e: 0.5,
            m3: 0.0,
            mu2: 1.2,
        };
        assert!(matches!(
            eh_tau_degenerate(1.0, &lv, 2.0),
            Err(Error::NotDegenerate { .. })
        ));
    }

    #[test]
    fn bad_geometry_is_rejected() {
        let s = EhState {
            rho: 2.0,
            p_rho: 0.0,
            m: [0.0, 0.0, 1.0],
        };
        assert!(matches!(
            eh_hamiltonian(-1.0, &s),
            Err(Error::DomainError { .. })
        ));
        let inside = EhState {
            rho: 0.5,
            p_rho: 0.0,
            m: [0.0, 0.0, 1.0],
        };
        assert!(matches!(
            eh_hamiltonian(1.0, &inside),
            Err(Error::DomainError { .. })
        ));
    }
}
