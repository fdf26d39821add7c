//! Globally adaptive Gauss-Kronrod quadrature with optional removal of
//! inverse-square-root endpoint singularities.
//!
//! The radial time reparametrisations integrate functions of the form
//! 1/sqrt(G(u)) where G has a simple zero at one or both interval ends
//! (turning points, bolts). Substituting u = a + s^2 (or u = b - s^2)
//! turns such an end into a regular point:
//!
//!   int f(u) du  =  int 2 s f(a + s^2) ds ,   s in [0, sqrt(b-a)] ,
//!
//! and 2 s / sqrt(G(a + s^2)) stays bounded when G(a) = 0 is simple.

use crate::error::{Error, Result};

/// Which interval end carries an inverse-square-root singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularEnd {
    None,
    Left,
    Right,
    /// Split at the midpoint and desingularise both halves. Harmless when an
    /// end is regular, so radial integrators use it unconditionally.
    Both,
}

/// Integral value with the accumulated error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Integrate `f` over `[a, b]`, `a <= b`, to `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive_quad<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite {
            what: "integration bound",
        });
    }
    if a > b {
        return Err(Error::InvalidConfig(format!(
            "integration bounds out of order: {a} > {b}"
        )));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }

    // Seed with a few panels so a deceptively smooth first estimate on a
    // peaked integrand cannot claim convergence.
    let mut segments: Vec<Segment> = Vec::with_capacity(MAX_PANELS);
    let seed = 4;
    for i in 0..seed {
        let lo = a + (b - a) * i as f64 / seed as f64;
        let hi = a + (b - a) * (i + 1) as f64 / seed as f64;
        segments.push(gk15(&f, lo, hi)?);
    }

    for _ in 0..MAX_PANELS {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature { value, error });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("non-empty segment list");
        let Segment { a: lo, b: hi, .. } = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval narrowed to machine resolution without meeting the
            // tolerance; report what we have instead of looping forever.
            let value: f64 = segments.iter().map(|s| s.value).sum();
            let error: f64 = segments.iter().map(|s| s.error).sum();
            return Ok(Quadrature { value, error });
        }
        segments.push(gk15(&f, lo, mid)?);
        segments.push(gk15(&f, mid, hi)?);
    }

    Err(Error::NoConvergence {
        what: "adaptive quadrature",
        iterations: MAX_PANELS,
    })
}

/// Integrate `f` over `[a, b]` after removing inverse-square-root endpoint
/// singularities as requested by `end`.
pub fn quad_sqrt_endpoint<F>(
    f: F,
    a: f64,
    b: f64,
    end: SingularEnd,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite {
            what: "integration bound",
        });
    }
    if a > b {
        return Err(Error::InvalidConfig(format!(
            "integration bounds out of order: {a} > {b}"
        )));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    match end {
        SingularEnd::None => adaptive_quad(f, a, b, abs_tol, rel_tol),
        SingularEnd::Left => {
            let s_max = (b - a).sqrt();
            adaptive_quad(|s| 2.0 * s * f(a + s * s), 0.0, s_max, abs_tol, rel_tol)
        }
        SingularEnd::Right => {
            let s_max = (b - a).sqrt();
            adaptive_quad(|s| 2.0 * s * f(b - s * s), 0.0, s_max, abs_tol, rel_tol)
        }
        SingularEnd::Both => {
            let mid = 0.5 * (a + b);
            let half = 0.5 * abs_tol;
            let s_left = (mid - a).sqrt();
            let left = adaptive_quad(|s| 2.0 * s * f(a + s * s), 0.0, s_left, half, rel_tol)?;
            let s_right = (b - mid).sqrt();
            let right = adaptive_quad(|s| 2.0 * s * f(b - s * s), 0.0, s_right, half, rel_tol)?;
            Ok(Quadrature {
                value: left.value + right.value,
                error: left.error + right.error,
            })
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// One 15-point Kronrod panel with the embedded 7-point Gauss estimate.
fn gk15<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> f64,
{
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);

    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::NonFinite { what: "integrand" });
    }
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut resabs = WGK[7] * fc.abs();

    let mut samples = [0.0_f64; 15];
    samples[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(Error::NonFinite { what: "integrand" });
        }
        samples[j] = f1;
        samples[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    // Deviation of the samples from their Kronrod mean, used to scale the
    // raw |K - G| difference the way QUADPACK does.
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (samples[7] - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((samples[j] - mean).abs() + (samples[14 - j] - mean).abs());
    }

    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * 1.0_f64.min((200.0 * error / resasc).powf(1.5));
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if floor > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }

    Ok(Segment { a, b, value, error })
}

const MAX_PANELS: usize = 4096;

// 15-point Kronrod abscissae on [-1, 1] (positive half, descending) and the
// matching weights; every second abscissa is a 7-point Gauss node.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715526,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];
