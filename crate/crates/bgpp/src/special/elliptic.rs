//! Legendre incomplete elliptic integrals of the first and third kind,
//! evaluated through the Carlson symmetric forms.
//!
//! Conventions (squared modulus k2 = k^2 throughout):
//!
//!   F(phi, k2)      = int_0^phi d(theta) / sqrt(1 - k2 sin^2 theta)
//!   Pi(phi, n, k2)  = int_0^phi d(theta) / ((1 - n sin^2 theta) sqrt(1 - k2 sin^2 theta))
//!
//! Both accept any real phi; whole half-periods are peeled off with the
//! complete integrals, the remainder goes through R_F / R_J. The
//! characteristic n may be negative; a positive n whose pole sin^2 theta = 1/n
//! lies on the integration path is rejected.

use super::carlson::{rf, rj};
use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

/// Complete integral of the first kind, K(k2) = F(pi/2, k2).
pub fn elliptic_k(k2: f64) -> Result<f64> {
    check_modulus(k2)?;
    rf(0.0, 1.0 - k2, 1.0)
}

/// Incomplete integral of the first kind, any real amplitude.
pub fn elliptic_f(phi: f64, k2: f64) -> Result<f64> {
    check_modulus(k2)?;
    if !phi.is_finite() {
        return Err(Error::NonFinite { what: "amplitude" });
    }
    let (periods, rest) = reduce_amplitude(phi);
    let mut value = 0.0;
    if periods != 0.0 {
        value += 2.0 * periods * elliptic_k(k2)?;
    }
    if rest != 0.0 {
        let s = rest.sin();
        let c2 = 1.0 - s * s;
        let q = 1.0 - k2 * s * s;
        value += s * rf(c2, q, 1.0)?;
    }
    Ok(value)
}

/// Complete integral of the third kind, Pi(pi/2, n, k2), n < 1.
pub fn elliptic_pi_complete(n: f64, k2: f64) -> Result<f64> {
    check_modulus(k2)?;
    if n >= 1.0 {
        return Err(Error::CharacteristicPole { n });
    }
    let k = rf(0.0, 1.0 - k2, 1.0)?;
    if n == 0.0 {
        return Ok(k);
    }
    Ok(k + (n / 3.0) * rj(0.0, 1.0 - k2, 1.0, 1.0 - n)?)
}

/// Incomplete integral of the third kind, any real amplitude.
pub fn elliptic_pi(phi: f64, n: f64, k2: f64) -> Result<f64> {
    check_modulus(k2)?;
    if !phi.is_finite() {
        return Err(Error::NonFinite { what: "amplitude" });
    }
    if !n.is_finite() {
        return Err(Error::NonFinite {
            what: "characteristic",
        });
    }
    let (periods, rest) = reduce_amplitude(phi);
    // Largest sin^2 theta visited on the path from 0 to phi.
    let max_s2 = if periods != 0.0 {
        1.0
    } else {
        rest.sin().powi(2)
    };
    if n > 0.0 && n * max_s2 >= 1.0 - POLE_MARGIN {
        return Err(Error::CharacteristicPole { n });
    }
    let mut value = 0.0;
    if periods != 0.0 {
        value += 2.0 * periods * elliptic_pi_complete(n, k2)?;
    }
    if rest != 0.0 {
        let s = rest.sin();
        let c2 = 1.0 - s * s;
        let q = 1.0 - k2 * s * s;
        value += s * rf(c2, q, 1.0)?;
        if n != 0.0 {
            value += (n / 3.0) * s.powi(3) * rj(c2, q, 1.0, 1.0 - n * s * s)?;
        }
    }
    Ok(value)
}

/// Split phi into whole half-periods and a remainder in [-pi/2, pi/2]:
/// phi = periods * pi + rest.
fn reduce_amplitude(phi: f64) -> (f64, f64) {
    let periods = (phi / PI).round();
    let rest = phi - periods * PI;
    // Guard the boundary |rest| = pi/2 against rounding past it.
    (periods, rest.clamp(-FRAC_PI_2, FRAC_PI_2))
}

fn check_modulus(k2: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k2) {
        return Err(Error::ModulusOutOfRange { k2 });
    }
    Ok(())
}

const POLE_MARGIN: f64 = 1e-12;
