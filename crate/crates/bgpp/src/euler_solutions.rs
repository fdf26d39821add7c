//! Closed-form solutions of the angular-momentum block.
//!
//! In the rescaled time tau (d tau / d lambda = 4 f^2) the angular momenta
//! decouple into free Euler-top equations
//!
//!   dM1/dtau = (t3 - t2) M2 M3   and cyclic,
//!
//! whose orbits are the intersections of the sphere sum M_i^2 = m2 with the
//! quadric sum t_i M_i^2 = n2. For distinct parameters (sorted ascending
//! s1 < s2 < s3) the orbit type is decided by q = n2/m2:
//!
//! * `CaseId::I`   for q in (s2, s3]: the orbit encircles the s3 axis,
//! * `CaseId::II`  for q in [s1, s2): the orbit encircles the s1 axis,
//! * `CaseId::III` for q = s2: the separatrix through the middle axis.
//!
//! Cases I and II wind up in Jacobi elliptic functions of sigma = rate * tau,
//! case III in sech/tanh. Coincident parameters short-circuit to a circular
//! rotor about the distinct axis (or to rest when all three coincide), and
//! exact equilibria are returned as constants. Each elliptic family carries a
//! triple of signs with product +1 selecting the connected component; the fit
//! picks the component and the phase through the initial momenta alone, which
//! is enough because position plus the equations pins down the trajectory.
//!
//! All fitting and evaluation speak the raw axis order of the state vector;
//! the sorted frame, and the time reversal a swap of two axes induces, stay
//! internal.

use crate::error::{Error, Result};
use crate::metric::{Degeneracy, MetricParams};
use crate::special::{elliptic_f, jacobi_sn_cn_dn};

/// Orbit type of the angular-momentum flow for distinct parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    /// q in (s2, s3]: rotation about the axis of the largest parameter.
    I,
    /// q in [s1, s2): rotation about the axis of the smallest parameter.
    II,
    /// q = s2 within tolerance: the separatrix.
    III,
}

/// Levels of the angular block alone.
#[derive(Debug, Clone, Copy)]
pub struct AngularLevels {
    pub m2: f64,
    pub n2: f64,
}

#[derive(Debug, Clone)]
enum Form {
    /// Cases I and II, in the sorted frame.
    Elliptic {
        case: CaseId,
        k2: f64,
        rate: f64,
        sigma0: f64,
        alpha: [f64; 3],
        eps: [f64; 3],
    },
    /// Case III, in the sorted frame.
    Separatrix {
        rate: f64,
        sigma0: f64,
        amp: [f64; 3],
        eps: [f64; 3],
    },
    /// Coincident parameter pair: circular rotation about the distinct raw
    /// axis. `omega` is the angle rate of the rotation about `axis`.
    Rotor {
        axis: usize,
        omega: f64,
        m0: [f64; 3],
    },
    /// Equilibrium (isotropic parameters, poles of the orbit sphere, or a
    /// vanishing rotor).
    Constant { m0: [f64; 3] },
}

/// A fitted closed-form solution M(tau) with M(0) equal to the initial data.
#[derive(Debug, Clone)]
pub struct EulerSolution {
    form: Form,
    /// perm[a] = raw index of the a-th sorted parameter.
    perm: [usize; 3],
    /// +1 when `perm` is even; -1 flips the internal clock, because swapping
    /// two axes reverses the orientation of the Euler equations.
    parity: f64,
    levels: AngularLevels,
}

impl EulerSolution {
    pub fn levels(&self) -> AngularLevels {
        self.levels
    }

    /// Orbit classification, when the parameters are distinct.
    pub fn case(&self) -> Option<CaseId> {
        match &self.form {
            Form::Elliptic { case, .. } => Some(*case),
            Form::Separatrix { .. } => Some(CaseId::III),
            _ => None,
        }
    }

    /// Elliptic modulus k2 for cases I and II.
    pub fn modulus(&self) -> Option<f64> {
        match &self.form {
            Form::Elliptic { k2, .. } => Some(*k2),
            _ => None,
        }
    }

    /// d sigma / d tau of the internal phase, when one exists.
    pub fn rate(&self) -> Option<f64> {
        match &self.form {
            Form::Elliptic { rate, .. } | Form::Separatrix { rate, .. } => Some(*rate),
            Form::Rotor { omega, .. } => Some(omega.abs()),
            Form::Constant { .. } => None,
        }
    }
}

/// Decide the orbit type of a level pair for distinct parameters.
///
/// The decision tolerance on q = n2/m2 scales with the parameter spread, so
/// levels within rounding of the separatrix classify as `III`.
pub fn classify_case(params: &MetricParams, levels: &AngularLevels) -> Result<CaseId> {
    if params.degeneracy() != Degeneracy::Generic {
        return Err(Error::InvalidConfig(
            "coincident parameters have rotor orbits; classification needs distinct t1, t2, t3"
                .into(),
        ));
    }
    if !(levels.m2.is_finite() && levels.n2.is_finite()) {
        return Err(Error::NonFinite {
            what: "angular level",
        });
    }
    if levels.m2 <= 0.0 {
        return Err(Error::ZeroCasimir);
    }
    let [s1, s2, s3] = params.sorted();
    let q = levels.n2 / levels.m2;
    let tol_q = case_tolerance(params);
    if q < s1 - tol_q || q > s3 + tol_q {
        return Err(Error::UnattainableLevel {
            n2: levels.n2,
            m2: levels.m2,
            lo: s1 * levels.m2,
            hi: s3 * levels.m2,
        });
    }
    if (q - s2).abs() <= tol_q {
        Ok(CaseId::III)
    } else if q > s2 {
        Ok(CaseId::I)
    } else {
        Ok(CaseId::II)
    }
}

fn case_tolerance(params: &MetricParams) -> f64 {
    let [s1, _, s3] = params.sorted();
    params.tol() * (s3 - s1).max(1.0)
}

/// Fit the closed form through initial angular momenta `m0` (raw axis order).
pub fn fit_solution(params: &MetricParams, m0: [f64; 3]) -> Result<EulerSolution> {
    if m0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "initial angular momentum",
        });
    }
    let [t1, t2, t3] = params.t_raw();
    let m2 = m0[0] * m0[0] + m0[1] * m0[1] + m0[2] * m0[2];
    let n2 = t1 * m0[0] * m0[0] + t2 * m0[1] * m0[1] + t3 * m0[2] * m0[2];
    let levels = AngularLevels { m2, n2 };
    if m2 <= 0.0 {
        return Err(Error::ZeroCasimir);
    }

    match params.degeneracy() {
        Degeneracy::Isotropic => {
            return Ok(EulerSolution {
                form: Form::Constant { m0 },
                perm: [0, 1, 2],
                parity: 1.0,
                levels,
            });
        }
        Degeneracy::TwoLargestEqual | Degeneracy::TwoSmallestEqual => {
            return Ok(fit_rotor(params, m0, levels));
        }
        Degeneracy::Generic => {}
    }

    let perm = sort_permutation(params.t_raw());
    let parity = permutation_parity(&perm);
    let s = [
        t_at(params, perm[0]),
        t_at(params, perm[1]),
        t_at(params, perm[2]),
    ];
    let ms = [m0[perm[0]], m0[perm[1]], m0[perm[2]]];
    let case = classify_case(params, &levels)?;
    let m = m2.sqrt();

    // Poles of the orbit sphere are equilibria; the phase fit would divide
    // by a vanishing amplitude there.
    let transverse = match case {
        CaseId::I => ms[0] * ms[0] + ms[1] * ms[1],
        CaseId::II => ms[1] * ms[1] + ms[2] * ms[2],
        CaseId::III => ms[0] * ms[0] + ms[2] * ms[2],
    };
    if transverse <= EQUILIBRIUM_EPS * m2 {
        return Ok(EulerSolution {
            form: Form::Constant { m0 },
            perm: [0, 1, 2],
            parity: 1.0,
            levels,
        });
    }

    let form = match case {
        CaseId::I => {
            // alpha = (sqrt((m2 s3 - n2)/(s3 - s1)), sqrt((m2 s3 - n2)/(s3 - s2)),
            //          sqrt((n2 - m2 s1)/(s3 - s1))), sigma = rate tau + sigma0,
            // M = (-e1 a1 cn, e2 a2 sn, e3 a3 dn).
            let hi = (m2 * s[2] - n2).max(0.0);
            let lo = (n2 - m2 * s[0]).max(0.0);
            let alpha = [
                (hi / (s[2] - s[0])).sqrt(),
                (hi / (s[2] - s[1])).sqrt(),
                (lo / (s[2] - s[0])).sqrt(),
            ];
            let rate = ((s[2] - s[1]) * lo).sqrt();
            let k2 = ((s[1] - s[0]) / (s[2] - s[1])) * (hi / lo);
            let e3 = sign_of(ms[2]);
            let eps = [e3, 1.0, e3];
            let sn = ms[1] / alpha[1];
            let cn = -e3 * ms[0] / alpha[0];
            let sigma0 = elliptic_f(sn.atan2(cn), k2.min(ONE_MINUS))?;
            Form::Elliptic {
                case,
                k2: k2.min(ONE_MINUS),
                rate,
                sigma0,
                alpha,
                eps,
            }
        }
        CaseId::II => {
            // alpha = (sqrt((m2 s3 - n2)/(s3 - s1)), sqrt((n2 - m2 s1)/(s2 - s1)),
            //          sqrt((n2 - m2 s1)/(s3 - s1))),
            // M = (e1 a1 dn, e2 a2 sn, -e3 a3 cn).
            let hi = (m2 * s[2] - n2).max(0.0);
            let lo = (n2 - m2 * s[0]).max(0.0);
            let alpha = [
                (hi / (s[2] - s[0])).sqrt(),
                (lo / (s[1] - s[0])).sqrt(),
                (lo / (s[2] - s[0])).sqrt(),
            ];
            let rate = ((s[1] - s[0]) * hi).sqrt();
            let k2 = ((s[2] - s[1]) / (s[1] - s[0])) * (lo / hi);
            let e1 = sign_of(ms[0]);
            let eps = [e1, 1.0, e1];
            let sn = ms[1] / alpha[1];
            let cn = -e1 * ms[2] / alpha[2];
            let sigma0 = elliptic_f(sn.atan2(cn), k2.min(ONE_MINUS))?;
            Form::Elliptic {
                case,
                k2: k2.min(ONE_MINUS),
                rate,
                sigma0,
                alpha,
                eps,
            }
        }
        CaseId::III => {
            // M = (e1 b1 sech, e2 m tanh, -e3 b3 sech), b1 = m sqrt((s3-s2)/(s3-s1)).
            let amp = [
                m * ((s[2] - s[1]) / (s[2] - s[0])).sqrt(),
                m,
                m * ((s[1] - s[0]) / (s[2] - s[0])).sqrt(),
            ];
            let rate = m * ((s[2] - s[1]) * (s[1] - s[0])).sqrt();
            let e1 = sign_of(ms[0]);
            let e3 = -sign_of(ms[2]);
            let eps = [e1, e1 * e3, e3];
            let tanh0 = (ms[1] / (eps[1] * m)).clamp(-ONE_MINUS, ONE_MINUS);
            let sigma0 = tanh0.atanh();
            Form::Separatrix {
                rate,
                sigma0,
                amp,
                eps,
            }
        }
    };
    Ok(EulerSolution {
        form,
        perm,
        parity,
        levels,
    })
}

fn fit_rotor(params: &MetricParams, m0: [f64; 3], levels: AngularLevels) -> EulerSolution {
    let t = params.t_raw();
    let sorted = params.sorted();
    let distinct = match params.degeneracy() {
        Degeneracy::TwoLargestEqual => sorted[0],
        _ => sorted[2],
    };
    let mut axis = 0;
    for i in 1..3 {
        if (t[i] - distinct).abs() < (t[axis] - distinct).abs() {
            axis = i;
        }
    }
    let repeated = 0.5 * (t[(axis + 1) % 3] + t[(axis + 2) % 3]);
    // d M / d tau = -Omega e_axis x M with Omega = (t_axis - t_repeated) M_axis.
    let omega = (t[axis] - repeated) * m0[axis];
    EulerSolution {
        form: Form::Rotor { axis, omega, m0 },
        perm: [0, 1, 2],
        parity: 1.0,
        levels,
    }
}

/// Evaluate the fitted solution at rescaled time tau (raw axis order).
pub fn eval_solution(sol: &EulerSolution, tau: f64) -> Result<[f64; 3]> {
    if !tau.is_finite() {
        return Err(Error::NonFinite { what: "tau" });
    }
    let ms: [f64; 3] = match &sol.form {
        Form::Elliptic {
            case,
            k2,
            rate,
            sigma0,
            alpha,
            eps,
        } => {
            let sigma = sol.parity * rate * tau + sigma0;
            let (sn, cn, dn) = jacobi_sn_cn_dn(sigma, *k2)?;
            match case {
                CaseId::I => [
                    -eps[0] * alpha[0] * cn,
                    eps[1] * alpha[1] * sn,
                    eps[2] * alpha[2] * dn,
                ],
                _ => [
                    eps[0] * alpha[0] * dn,
                    eps[1] * alpha[1] * sn,
                    -eps[2] * alpha[2] * cn,
                ],
            }
        }
        Form::Separatrix {
            rate,
            sigma0,
            amp,
            eps,
        } => {
            let sigma = sol.parity * rate * tau + sigma0;
            let sech = 1.0 / sigma.cosh();
            [
                eps[0] * amp[0] * sech,
                eps[1] * amp[1] * sigma.tanh(),
                -eps[2] * amp[2] * sech,
            ]
        }
        Form::Rotor { axis, omega, m0 } => {
            let u = (*axis + 1) % 3;
            let v = (*axis + 2) % 3;
            let angle = -omega * tau;
            let (s, c) = angle.sin_cos();
            let mut m = [0.0; 3];
            m[*axis] = m0[*axis];
            m[u] = c * m0[u] - s * m0[v];
            m[v] = s * m0[u] + c * m0[v];
            m
        }
        Form::Constant { m0 } => *m0,
    };
    match &sol.form {
        Form::Elliptic { .. } | Form::Separatrix { .. } => {
            let mut m = [0.0; 3];
            for a in 0..3 {
                m[sol.perm[a]] = ms[a];
            }
            Ok(m)
        }
        _ => Ok(ms),
    }
}

fn sort_permutation(t: [f64; 3]) -> [usize; 3] {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
    idx
}

fn permutation_parity(perm: &[usize; 3]) -> f64 {
    let mut inversions = 0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn t_at(params: &MetricParams, i: usize) -> f64 {
    params.t_raw()[i]
}

fn sign_of(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

const EQUILIBRIUM_EPS: f64 = 1e-24;
const ONE_MINUS: f64 = 1.0 - 1e-15;
