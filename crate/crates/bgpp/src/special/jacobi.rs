//! Jacobi elliptic functions sn, cn, dn by descending Landen transformation
//! over the arithmetic-geometric mean scale.
//!
//! The AGM of 1 and the complementary modulus collapses the modulus to zero,
//! where the functions are trigonometric; the backward recurrence then
//! restores the original modulus level by level, carrying dn along so no
//! quarter-period point degenerates. The trigonometric (k2 = 0) and
//! hyperbolic (k2 = 1) limits are dispatched exactly.

use crate::error::{Error, Result};

/// sn(u, k2), cn(u, k2), dn(u, k2) for squared modulus k2 in [0, 1].
pub fn jacobi_sn_cn_dn(u: f64, k2: f64) -> Result<(f64, f64, f64)> {
    if !u.is_finite() {
        return Err(Error::NonFinite { what: "argument" });
    }
    if !(0.0..=1.0).contains(&k2) {
        return Err(Error::ModulusOutOfRange { k2 });
    }
    if k2 == 0.0 {
        return Ok((u.sin(), u.cos(), 1.0));
    }
    if k2 == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok((u.tanh(), sech, sech));
    }

    // Descending scale: a_{i+1} = (a_i + b_i)/2, b_{i+1} = sqrt(a_i b_i),
    // stored as em/en pairs until the pair coalesces. Convergence is
    // quadratic, so the final gap CA contributes only CA^2 to the result.
    let mut em = [0.0_f64; MAX_LEVELS];
    let mut en = [0.0_f64; MAX_LEVELS];
    let mut a = 1.0_f64;
    let mut emc = 1.0 - k2;
    let mut c = 0.0;
    let mut level = None;
    for i in 0..MAX_LEVELS {
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= CA * a {
            level = Some(i);
            break;
        }
        emc *= a;
        a = c;
    }
    let level = level.ok_or(Error::NoConvergence {
        what: "jacobi landen scale",
        iterations: MAX_LEVELS,
    })?;

    let (mut sn, mut cn) = (c * u).sin_cos();
    let mut dn = 1.0;
    if sn != 0.0 {
        let mut aa = cn / sn;
        c *= aa;
        for i in (0..=level).rev() {
            let b = em[i];
            aa *= c;
            c *= dn;
            dn = (en[i] + aa) / (b + aa);
            aa = c / b;
        }
        let norm = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { norm } else { -norm };
        cn = c * sn;
    }
    Ok((sn, cn, dn))
}

const MAX_LEVELS: usize = 16;

/// AGM gap at which the scale is considered collapsed; errors enter as CA^2.
const CA: f64 = 1e-8;
