//! Carlson symmetric elliptic integrals R_F, R_C, R_J.
//!
//! Duplication-theorem iterations with the double-precision error constants
//! from Carlson's 1979 algorithms. Arguments are restricted to the ranges the
//! Legendre reductions in this crate actually produce: nonnegative x, y, z
//! (at most one zero) and strictly positive p.

use crate::error::{Error, Result};

/// R_F(x, y, z) = (1/2) int_0^inf dt / sqrt((t+x)(t+y)(t+z)).
pub fn rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if x.min(y).min(z) < 0.0 || (x + y).min(y + z).min(x + z) < RF_TINY {
        return Err(Error::DomainError {
            what: "rf argument",
            value: x.min(y).min(z),
            constraint: "x, y, z >= 0 with at most one zero",
        });
    }
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut ave;
    let (mut dx, mut dy, mut dz);
    let mut it = 0;
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < RF_ERR_TOL {
            break;
        }
        it += 1;
        if it > MAX_ITER {
            return Err(Error::NoConvergence {
                what: "carlson rf",
                iterations: MAX_ITER,
            });
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    Ok((1.0 + (C1 * e2 - C2 - C3 * e3) * e2 + C4 * e3) / ave.sqrt())
}

/// R_C(x, y) = R_F(x, y, y), x >= 0, y > 0.
pub fn rc(x: f64, y: f64) -> Result<f64> {
    if x < 0.0 || y <= 0.0 {
        return Err(Error::DomainError {
            what: "rc argument",
            value: if x < 0.0 { x } else { y },
            constraint: "x >= 0, y > 0",
        });
    }
    let (mut xt, mut yt) = (x, y);
    let mut ave;
    let mut s;
    let mut it = 0;
    loop {
        let lam = 2.0 * (xt * yt).sqrt() + yt;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        ave = (xt + 2.0 * yt) / 3.0;
        s = (yt - ave) / ave;
        if s.abs() < RC_ERR_TOL {
            break;
        }
        it += 1;
        if it > MAX_ITER {
            return Err(Error::NoConvergence {
                what: "carlson rc",
                iterations: MAX_ITER,
            });
        }
    }
    Ok((1.0 + s * s * (RC_C1 + s * (RC_C2 + s * (RC_C3 + s * RC_C4)))) / ave.sqrt())
}

/// R_J(x, y, z, p) = (3/2) int_0^inf dt / ((t+p) sqrt((t+x)(t+y)(t+z))), p > 0.
pub fn rj(x: f64, y: f64, z: f64, p: f64) -> Result<f64> {
    if x.min(y).min(z) < 0.0 || (x + y).min(y + z).min(x + z) < RF_TINY {
        return Err(Error::DomainError {
            what: "rj argument",
            value: x.min(y).min(z),
            constraint: "x, y, z >= 0 with at most one zero",
        });
    }
    if p <= 0.0 {
        return Err(Error::DomainError {
            what: "rj argument p",
            value: p,
            constraint: "p > 0",
        });
    }
    let (mut xt, mut yt, mut zt, mut pt) = (x, y, z, p);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let mut ave;
    let (mut dx, mut dy, mut dz, mut dp);
    let mut it = 0;
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        let alpha = (pt * (sx + sy + sz) + sx * sy * sz).powi(2);
        let beta = pt * (pt + lam) * (pt + lam);
        sum += fac * rc(alpha, beta)?;
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        pt = 0.25 * (pt + lam);
        ave = 0.2 * (xt + yt + zt + 2.0 * pt);
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        dp = (ave - pt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dp.abs()) < RJ_ERR_TOL {
            break;
        }
        it += 1;
        if it > MAX_ITER {
            return Err(Error::NoConvergence {
                what: "carlson rj",
                iterations: MAX_ITER,
            });
        }
    }
    let ea = dx * (dy + dz) + dy * dz;
    let eb = dx * dy * dz;
    let ec = dp * dp;
    let ed = ea - 3.0 * ec;
    let ee = eb + 2.0 * dp * (ea - ec);
    let tail = 1.0
        + ed * (-RJ_C1 + RJ_C5 * ed - RJ_C6 * ee)
        + eb * (RJ_C7 + dp * (-RJ_C8 + dp * RJ_C4))
        + dp * ea * (RJ_C2 - dp * RJ_C3)
        - RJ_C2 * dp * ec;
    Ok(3.0 * sum + fac * tail / (ave * ave.sqrt()))
}

const MAX_ITER: usize = 100;

const RF_ERR_TOL: f64 = 0.0025;
const RF_TINY: f64 = 5.0 * f64::MIN_POSITIVE;
const C1: f64 = 1.0 / 24.0;
const C2: f64 = 0.1;
const C3: f64 = 3.0 / 44.0;
const C4: f64 = 1.0 / 14.0;

const RC_ERR_TOL: f64 = 0.0012;
const RC_C1: f64 = 0.3;
const RC_C2: f64 = 1.0 / 7.0;
const RC_C3: f64 = 0.375;
const RC_C4: f64 = 9.0 / 22.0;

const RJ_ERR_TOL: f64 = 0.0015;
const RJ_C1: f64 = 3.0 / 14.0;
const RJ_C2: f64 = 1.0 / 3.0;
const RJ_C3: f64 = 3.0 / 22.0;
const RJ_C4: f64 = 3.0 / 26.0;
const RJ_C5: f64 = 0.75 * RJ_C3;
const RJ_C6: f64 = 1.5 * RJ_C4;
const RJ_C7: f64 = 0.5 * RJ_C2;
const RJ_C8: f64 = 2.0 * RJ_C3;
