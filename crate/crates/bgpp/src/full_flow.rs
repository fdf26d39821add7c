//! Geodesic flow on the full eight-dimensional phase space.
//!
//! Working variables are the mixed set (t, P_t, M1, M2, M3, ph, th, ps): the
//! radial pair stays canonical while the fibre momenta are traded for the
//! invariant angular momenta
//!
//!   M1 = -sin(ps) P_th + cos(ps)/sin(th) P_ph - cos(ps)/tan(th) P_ps ,
//!   M2 =  cos(ps) P_th + sin(ps)/sin(th) P_ph - sin(ps)/tan(th) P_ps ,
//!   M3 =  P_ps ,
//!
//! which obey {M_i, M_j} = eps_ijk M_k. In these variables the Hamiltonian
//!
//!   H = (1/2) ( P_t^2/f^2 + M1^2/a^2 + M2^2/b^2 + M3^2/c^2 )
//!
//! is angle-free, and the flow conserves H, the axial momentum P_ph, the
//! total squared angular momentum m2 = sum M_i^2 and the parameter-weighted
//! square n2 = sum t_i M_i^2. The four are pairwise in involution, which is
//! what `bracket` and the verification drivers check.

use crate::error::{Error, Result};
use crate::metric::{profile, profile_with_derivatives, MetricParams, SIN_THETA_MIN};
use nalgebra::{SMatrix, SVector};

pub type PhaseVector = SVector<f64, 8>;
pub type PoissonMatrix = SMatrix<f64, 8, 8>;

/// State in the canonical chart (t, P_t, th, ph, ps, P_th, P_ph, P_ps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalState {
    pub t: f64,
    pub p_t: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub p_theta: f64,
    pub p_phi: f64,
    pub p_psi: f64,
}

/// State in the mixed chart, ordered (t, P_t, M1, M2, M3, ph, th, ps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedState {
    pub t: f64,
    pub p_t: f64,
    pub m: [f64; 3],
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl MixedState {
    pub fn to_vector(&self) -> PhaseVector {
        PhaseVector::from_column_slice(&[
            self.t, self.p_t, self.m[0], self.m[1], self.m[2], self.phi, self.theta, self.psi,
        ])
    }

    pub fn from_vector(v: &PhaseVector) -> Self {
        MixedState {
            t: v[0],
            p_t: v[1],
            m: [v[2], v[3], v[4]],
            phi: v[5],
            theta: v[6],
            psi: v[7],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.t, self.p_t, self.m[0], self.m[1], self.m[2], self.phi, self.theta, self.psi,
        ];
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "mixed state component",
            });
        }
        Ok(())
    }
}

/// Values of the four commuting first integrals at a state.
#[derive(Debug, Clone, Copy)]
pub struct IntegralValues {
    pub h: f64,
    pub p_phi: f64,
    /// Total squared angular momentum, sum M_i^2.
    pub m2: f64,
    /// Parameter-weighted square, sum t_i M_i^2.
    pub n2: f64,
}

/// The four first integrals, as bracket and gradient selectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    Energy,
    AxialMomentum,
    TotalAngular,
    WeightedAngular,
}

pub const INVARIANTS: [Invariant; 4] = [
    Invariant::Energy,
    Invariant::AxialMomentum,
    Invariant::TotalAngular,
    Invariant::WeightedAngular,
];

fn check_angle(theta: f64) -> Result<(f64, f64)> {
    let (st, ct) = theta.sin_cos();
    if st.abs() < SIN_THETA_MIN {
        return Err(Error::SingularPoint {
            sin_theta: st.abs(),
        });
    }
    Ok((st, ct))
}

/// Canonical momenta to angular momenta. Fails within `SIN_THETA_MIN` of the
/// coordinate poles where the fibration chart degenerates.
pub fn to_mixed(state: &CanonicalState) -> Result<MixedState> {
    let (st, ct) = check_angle(state.theta)?;
    let (sp, cp) = state.psi.sin_cos();
    let q = (state.p_phi - ct * state.p_psi) / st;
    Ok(MixedState {
        t: state.t,
        p_t: state.p_t,
        m: [
            -sp * state.p_theta + cp * q,
            cp * state.p_theta + sp * q,
            state.p_psi,
        ],
        phi: state.phi,
        theta: state.theta,
        psi: state.psi,
    })
}

/// Angular momenta back to canonical momenta; exact inverse of `to_mixed`.
pub fn from_mixed(state: &MixedState) -> Result<CanonicalState> {
    let (st, ct) = check_angle(state.theta)?;
    let (sp, cp) = state.psi.sin_cos();
    let [m1, m2, m3] = state.m;
    let q = cp * m1 + sp * m2;
    Ok(CanonicalState {
        t: state.t,
        p_t: state.p_t,
        theta: state.theta,
        phi: state.phi,
        psi: state.psi,
        p_theta: -sp * m1 + cp * m2,
        p_phi: st * q + ct * m3,
        p_psi: m3,
    })
}

/// Hamiltonian in the mixed chart.
pub fn hamiltonian(params: &MetricParams, state: &MixedState) -> Result<f64> {
    state.validate()?;
    let p = profile(params, state.t)?;
    let [m1, m2, m3] = state.m;
    Ok(0.5 * (state.p_t * state.p_t / p.f2 + m1 * m1 / p.a2 + m2 * m2 / p.b2 + m3 * m3 / p.c2))
}

/// Hamiltonian evaluated directly on canonical momenta, as an independent
/// route; agrees with `hamiltonian` after `to_mixed` to rounding.
pub fn hamiltonian_canonical(params: &MetricParams, state: &CanonicalState) -> Result<f64> {
    let (st, ct) = check_angle(state.theta)?;
    let (sp, cp) = state.psi.sin_cos();
    let p = profile(params, state.t)?;
    let csc = 1.0 / st;
    let cot = ct / st;
    let u = csc * cp * (state.p_phi - state.p_psi * ct) - state.p_theta * sp;
    let v = state.p_theta * cp + sp * (state.p_phi * csc - state.p_psi * cot);
    Ok(u * u / (2.0 * p.a2)
        + v * v / (2.0 * p.b2)
        + state.p_psi * state.p_psi / (2.0 * p.c2)
        + state.p_t * state.p_t / (2.0 * p.f2))
}

/// The Poisson tensor in the mixed chart, row/column order
/// (t, P_t, M1, M2, M3, ph, th, ps):
///
///   J = [ J2   0    0  ]        J2 = [0 1; -1 0]
///       [ 0    Mh  -K' ]        Mh_ij = eps_ijk M_k pattern below
///       [ 0    K    0  ]
///
/// with the momentum-map block K carrying the csc/cot factors.
pub fn poisson_tensor(state: &MixedState) -> Result<PoissonMatrix> {
    state.validate()?;
    let (st, ct) = check_angle(state.theta)?;
    let (sp, cp) = state.psi.sin_cos();
    let [m1, m2, m3] = state.m;
    let csc = 1.0 / st;
    let cot = ct / st;

    let mut j = PoissonMatrix::zeros();
    j[(0, 1)] = 1.0;
    j[(1, 0)] = -1.0;

    let mh = [[0.0, m3, -m2], [-m3, 0.0, m1], [m2, -m1, 0.0]];
    for (r, row) in mh.iter().enumerate() {
        for (c, val) in row.iter().enumerate() {
            j[(2 + r, 2 + c)] = *val;
        }
    }

    let k = [
        [csc * cp, csc * sp, 0.0],
        [-sp, cp, 0.0],
        [-cot * cp, -cot * sp, 1.0],
    ];
    for (a, row) in k.iter().enumerate() {
        for (i, val) in row.iter().enumerate() {
            j[(5 + a, 2 + i)] = *val;
            j[(2 + i, 5 + a)] = -*val;
        }
    }
    Ok(j)
}

/// Time derivative of the mixed state along the geodesic flow.
pub fn rhs_full(params: &MetricParams, state: &MixedState) -> Result<PhaseVector> {
    state.validate()?;
    let (st, ct) = check_angle(state.theta)?;
    let (sp, cp) = state.psi.sin_cos();
    let (p, d) = profile_with_derivatives(params, state.t)?;
    let [t1, t2, t3] = params.t_raw();
    let [m1, m2, m3] = state.m;

    let t_dot = state.p_t / p.f2;
    let p_t_dot = 0.5
        * (state.p_t * state.p_t * d.df2 / (p.f2 * p.f2)
            + m1 * m1 * d.da2 / (p.a2 * p.a2)
            + m2 * m2 * d.db2 / (p.b2 * p.b2)
            + m3 * m3 * d.dc2 / (p.c2 * p.c2));
    // 1/b^2 - 1/c^2 = 4 f^2 (t3 - t2), cyclically.
    let four_f2 = 4.0 * p.f2;
    let m1_dot = four_f2 * (t3 - t2) * m2 * m3;
    let m2_dot = four_f2 * (t1 - t3) * m3 * m1;
    let m3_dot = four_f2 * (t2 - t1) * m1 * m2;

    let u = m1 * cp / p.a2 + m2 * sp / p.b2;
    let phi_dot = u / st;
    let theta_dot = m2 * cp / p.b2 - m1 * sp / p.a2;
    let psi_dot = -u * ct / st + m3 / p.c2;

    Ok(PhaseVector::from_column_slice(&[
        t_dot, p_t_dot, m1_dot, m2_dot, m3_dot, phi_dot, theta_dot, psi_dot,
    ]))
}

/// All four first integrals at once.
pub fn integrals(params: &MetricParams, state: &MixedState) -> Result<IntegralValues> {
    let [t1, t2, t3] = params.t_raw();
    let [m1, m2, m3] = state.m;
    let (st, ct) = state.theta.sin_cos();
    let (sp, cp) = state.psi.sin_cos();
    Ok(IntegralValues {
        h: hamiltonian(params, state)?,
        p_phi: st * (m1 * cp + m2 * sp) + m3 * ct,
        m2: m1 * m1 + m2 * m2 + m3 * m3,
        n2: t1 * m1 * m1 + t2 * m2 * m2 + t3 * m3 * m3,
    })
}

pub fn invariant_value(params: &MetricParams, state: &MixedState, which: Invariant) -> Result<f64> {
    let iv = integrals(params, state)?;
    Ok(match which {
        Invariant::Energy => iv.h,
        Invariant::AxialMomentum => iv.p_phi,
        Invariant::TotalAngular => iv.m2,
        Invariant::WeightedAngular => iv.n2,
    })
}

/// Analytic phase-space gradient of a first integral in the mixed chart.
pub fn invariant_gradient(
    params: &MetricParams,
    state: &MixedState,
    which: Invariant,
) -> Result<PhaseVector> {
    state.validate()?;
    let [t1, t2, t3] = params.t_raw();
    let [m1, m2, m3] = state.m;
    let mut g = PhaseVector::zeros();
    match which {
        Invariant::Energy => {
            let (p, d) = profile_with_derivatives(params, state.t)?;
            g[0] = -0.5
                * (state.p_t * state.p_t * d.df2 / (p.f2 * p.f2)
                    + m1 * m1 * d.da2 / (p.a2 * p.a2)
                    + m2 * m2 * d.db2 / (p.b2 * p.b2)
                    + m3 * m3 * d.dc2 / (p.c2 * p.c2));
            g[1] = state.p_t / p.f2;
            g[2] = m1 / p.a2;
            g[3] = m2 / p.b2;
            g[4] = m3 / p.c2;
        }
        Invariant::AxialMomentum => {
            let (st, ct) = state.theta.sin_cos();
            let (sp, cp) = state.psi.sin_cos();
            g[2] = st * cp;
            g[3] = st * sp;
            g[4] = ct;
            g[6] = ct * (m1 * cp + m2 * sp) - m3 * st;
            g[7] = st * (-m1 * sp + m2 * cp);
        }
        Invariant::TotalAngular => {
            g[2] = 2.0 * m1;
            g[3] = 2.0 * m2;
            g[4] = 2.0 * m3;
        }
        Invariant::WeightedAngular => {
            g[2] = 2.0 * t1 * m1;
            g[3] = 2.0 * t2 * m2;
            g[4] = 2.0 * t3 * m3;
        }
    }
    Ok(g)
}

/// Poisson bracket {F, G} = grad(F)^T J grad(G) of two first integrals.
pub fn bracket(
    params: &MetricParams,
    state: &MixedState,
    f: Invariant,
    g: Invariant,
) -> Result<f64> {
    let j = poisson_tensor(state)?;
    let gf = invariant_gradient(params, state, f)?;
    let gg = invariant_gradient(params, state, g)?;
    Ok((gf.transpose() * j * gg)[(0, 0)])
}
