//! The triaxial Bianchi-IX gravitational instanton family and its profile
//! functions.
//!
//! In the diagonal gauge the metric reads
//!
//!   g = f^2 dt^2 + a^2 s1^2 + b^2 s2^2 + c^2 s3^2 ,
//!
//! with left-invariant one-forms s_i on SU(2), squared profiles
//!
//!   a^2 = BC/A ,  b^2 = CA/B ,  c^2 = AB/C ,  f^2 = 1/(4ABC) ,
//!
//! and A = sqrt(t - t1), B = sqrt(t - t2), C = sqrt(t - t3). The three
//! nonnegative parameters t1, t2, t3 select the member of the family; the
//! chart lives on t > max(t1, t2, t3).
//!
//! The same spaces admit a multicentre presentation
//!
//!   g = (1/V)(ds + w)^2 + V dx.dx ,
//!
//! reached through x1 = A sin(th) cos(ps), x2 = B sin(th) sin(ps),
//! x3 = C cos(th) with s = ph; `multicentre_check` verifies the equality
//! pointwise with a finite-difference pullback and is the independent
//! consistency oracle for everything built on the profiles.

use crate::error::{Error, Result};

/// How the three metric parameters coincide, judged on the ascending sorted
/// view. The complete Eguchi-Hanson space sits at `TwoLargestEqual`; the
/// `TwoSmallestEqual` branch is the incomplete companion geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    Generic,
    TwoLargestEqual,
    TwoSmallestEqual,
    Isotropic,
}

/// Validated parameter triple with its sorted view.
#[derive(Debug, Clone, Copy)]
pub struct MetricParams {
    t: [f64; 3],
    sorted: [f64; 3],
    degeneracy: Degeneracy,
    tol: f64,
}

impl MetricParams {
    /// Parameters in the order given at construction.
    pub fn t_raw(&self) -> [f64; 3] {
        self.t
    }

    /// Parameters sorted ascending.
    pub fn sorted(&self) -> [f64; 3] {
        self.sorted
    }

    pub fn t_max(&self) -> f64 {
        self.sorted[2]
    }

    pub fn t_min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn degeneracy(&self) -> Degeneracy {
        self.degeneracy
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// sqrt(t - t_i) in the raw parameter order.
    pub fn roots(&self, t: f64) -> Result<[f64; 3]> {
        self.check_domain(t)?;
        Ok([
            (t - self.t[0]).sqrt(),
            (t - self.t[1]).sqrt(),
            (t - self.t[2]).sqrt(),
        ])
    }

    pub fn check_domain(&self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::NonFinite { what: "time t" });
        }
        if t <= self.t_max() {
            return Err(Error::DomainError {
                what: "time t",
                value: t,
                constraint: "t > max(t1, t2, t3)",
            });
        }
        Ok(())
    }
}

/// Check and classify a parameter triple. `tol` is the absolute coincidence
/// tolerance used for the degeneracy pattern.
pub fn validate_params(t1: f64, t2: f64, t3: f64, tol: f64) -> Result<MetricParams> {
    for (name, value) in [("t1", t1), ("t2", t2), ("t3", t3), ("tol", tol)] {
        if !value.is_finite() {
            return Err(Error::NonFinite { what: name });
        }
    }
    for (name, value) in [("t1", t1), ("t2", t2), ("t3", t3)] {
        if value < 0.0 {
            return Err(Error::NegativeParameter { name, value });
        }
    }
    if tol < 0.0 {
        return Err(Error::NegativeParameter {
            name: "tol",
            value: tol,
        });
    }
    let t = [t1, t2, t3];
    let mut sorted = t;
    sorted.sort_by(f64::total_cmp);
    let low_pair = sorted[1] - sorted[0] <= tol;
    let high_pair = sorted[2] - sorted[1] <= tol;
    let degeneracy = match (low_pair, high_pair) {
        (true, true) => Degeneracy::Isotropic,
        (false, true) => Degeneracy::TwoLargestEqual,
        (true, false) => Degeneracy::TwoSmallestEqual,
        (false, false) => Degeneracy::Generic,
    };
    Ok(MetricParams {
        t,
        sorted,
        degeneracy,
        tol,
    })
}

/// Squared profile functions at time t.
#[derive(Debug, Clone, Copy)]
pub struct MetricProfile {
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub f2: f64,
}

/// t-derivatives of the squared profiles.
#[derive(Debug, Clone, Copy)]
pub struct ProfileDerivatives {
    pub da2: f64,
    pub db2: f64,
    pub dc2: f64,
    pub df2: f64,
}

pub fn profile(params: &MetricParams, t: f64) -> Result<MetricProfile> {
    let [a_root, b_root, c_root] = params.roots(t)?;
    Ok(MetricProfile {
        a2: b_root * c_root / a_root,
        b2: c_root * a_root / b_root,
        c2: a_root * b_root / c_root,
        f2: 1.0 / (4.0 * a_root * b_root * c_root),
    })
}

/// Profiles and their t-derivatives together; logarithmic derivatives of the
/// sqrt factors keep everything in closed form.
pub fn profile_with_derivatives(
    params: &MetricParams,
    t: f64,
) -> Result<(MetricProfile, ProfileDerivatives)> {
    let p = profile(params, t)?;
    let [t1, t2, t3] = params.t_raw();
    let la = 0.5 / (t - t1);
    let lb = 0.5 / (t - t2);
    let lc = 0.5 / (t - t3);
    Ok((
        p,
        ProfileDerivatives {
            da2: p.a2 * (lb + lc - la),
            db2: p.b2 * (lc + la - lb),
            dc2: p.c2 * (la + lb - lc),
            df2: -p.f2 * (la + lb + lc),
        },
    ))
}

/// Outcome of reducing a degenerate triple to the complete Eguchi-Hanson
/// geometry: the squared bolt radius and the radial chart.
#[derive(Debug, Clone, Copy)]
pub struct EhLimit {
    /// gamma^2 = (repeated parameter) - (distinct parameter) > 0.
    pub gamma2: f64,
    /// The distinct (smallest) parameter; rho^2 = t - t_distinct.
    pub t_distinct: f64,
    /// Position of the distinct parameter in the raw triple. The angular
    /// momentum component on this axis is the conserved one.
    pub distinct_axis: usize,
}

impl EhLimit {
    pub fn rho_of_t(&self, t: f64) -> f64 {
        (t - self.t_distinct).sqrt()
    }

    pub fn t_of_rho(&self, rho: f64) -> f64 {
        rho * rho + self.t_distinct
    }
}

/// Reduce a parameter triple to the Eguchi-Hanson limit. Requires the two
/// largest parameters to coincide and to exceed the third; the chart is
/// rho > gamma with the bolt two-sphere at rho = gamma.
pub fn eh_limit(params: &MetricParams) -> Result<EhLimit> {
    match params.degeneracy() {
        Degeneracy::TwoLargestEqual => {}
        Degeneracy::Generic => {
            return Err(Error::NotEhLimit {
                reason: "all three parameters are distinct",
            })
        }
        Degeneracy::TwoSmallestEqual => {
            return Err(Error::NotEhLimit {
                reason: "repeated pair lies below the distinct parameter; \
                         that branch is the incomplete companion geometry",
            })
        }
        Degeneracy::Isotropic => {
            return Err(Error::NotEhLimit {
                reason: "all three parameters coincide (flat limit)",
            })
        }
    }
    let t_distinct = params.t_min();
    let repeated = params.t_max();
    let distinct_axis = params
        .t_raw()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("three parameters");
    Ok(EhLimit {
        gamma2: repeated - t_distinct,
        t_distinct,
        distinct_axis,
    })
}

/// Componentwise agreement between the diagonal form of the metric and the
/// multicentre form pulled back through the coordinate map, with the map's
/// Jacobian taken by central differences of step `h`. Returns the largest
/// absolute component difference of the two 4x4 matrices at the point.
pub fn multicentre_check(
    params: &MetricParams,
    t: f64,
    theta: f64,
    psi: f64,
    h: f64,
) -> Result<f64> {
    for (name, value) in [("t", t), ("theta", theta), ("psi", psi), ("h", h)] {
        if !value.is_finite() {
            return Err(Error::NonFinite { what: name });
        }
    }
    if h <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step h = {h} must be positive"
        )));
    }
    if theta.sin().abs() < SIN_THETA_MIN {
        return Err(Error::SingularPoint {
            sin_theta: theta.sin().abs(),
        });
    }
    // The t-stencil must stay inside the chart.
    params.check_domain(t - h)?;

    let direct = diagonal_components(params, t, theta, psi)?;
    let pulled = multicentre_pullback(params, t, theta, psi, h)?;

    let mut residual = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            residual = residual.max((direct[i][j] - pulled[i][j]).abs());
        }
    }
    Ok(residual)
}

/// Metric components of the diagonal form in coordinate order (t, th, ph, ps).
fn diagonal_components(
    params: &MetricParams,
    t: f64,
    theta: f64,
    psi: f64,
) -> Result<[[f64; 4]; 4]> {
    let p = profile(params, t)?;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let mut g = [[0.0; 4]; 4];
    g[0][0] = p.f2;
    g[1][1] = p.a2 * sp * sp + p.b2 * cp * cp;
    g[2][2] = p.a2 * st * st * cp * cp + p.b2 * st * st * sp * sp + p.c2 * ct * ct;
    g[3][3] = p.c2;
    g[1][2] = (p.b2 - p.a2) * st * sp * cp;
    g[2][1] = g[1][2];
    g[2][3] = p.c2 * ct;
    g[3][2] = g[2][3];
    Ok(g)
}

/// Multicentre form pulled back through the coordinate map, Jacobian by
/// central differences.
fn multicentre_pullback(
    params: &MetricParams,
    t: f64,
    theta: f64,
    psi: f64,
    h: f64,
) -> Result<[[f64; 4]; 4]> {
    let p = profile(params, t)?;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();

    let v = 1.0 / (p.a2 * st * st * cp * cp + p.b2 * st * st * sp * sp + p.c2 * ct * ct);
    // Connection one-form w in the (th, ps) directions.
    let w_theta = v * (p.b2 - p.a2) * st * sp * cp;
    let w_psi = v * p.c2 * ct;
    // eta = dph + w, components in (t, th, ph, ps).
    let eta = [0.0, w_theta, 1.0, w_psi];

    let xmap = |t: f64, theta: f64, psi: f64| -> Result<[f64; 3]> {
        let [a_root, b_root, c_root] = params.roots(t)?;
        Ok([
            a_root * theta.sin() * psi.cos(),
            b_root * theta.sin() * psi.sin(),
            c_root * theta.cos(),
        ])
    };
    // jac[i][mu]: d x^i / d(t, th, ps); the map does not depend on ph.
    let mut jac = [[0.0_f64; 3]; 3];
    let stencil: [(f64, f64, f64); 3] = [(h, 0.0, 0.0), (0.0, h, 0.0), (0.0, 0.0, h)];
    for (mu, (dt, dth, dps)) in stencil.into_iter().enumerate() {
        let plus = xmap(t + dt, theta + dth, psi + dps)?;
        let minus = xmap(t - dt, theta - dth, psi - dps)?;
        for i in 0..3 {
            jac[i][mu] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }

    // Coordinate order (t, th, ph, ps); the x-part skips ph.
    let dx_index = [Some(0), Some(1), None, Some(2)];
    let mut g = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            let mut val = eta[mu] * eta[nu] / v;
            if let (Some(m), Some(n)) = (dx_index[mu], dx_index[nu]) {
                let dot: f64 = (0..3).map(|i| jac[i][m] * jac[i][n]).sum();
                val += v * dot;
            }
            g[mu][nu] = val;
        }
    }
    Ok(g)
}

/// Angles closer to the poles than this are treated as chart-singular.
pub const SIN_THETA_MIN: f64 = 1e-10;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn validate_classifies_triples() {
        assert_eq!(
            validate_params(0.0, 1.0, 2.0, 1e-12).unwrap().degeneracy(),
            Degeneracy::Generic
        );
        assert_eq!(
            validate_params(1.0, 1.0, 5.0, 1e-12).unwrap().degeneracy(),
            Degeneracy::TwoSmallestEqual
        );
        assert_eq!(
            validate_params(0.0, 2.0, 2.0, 1e-12).unwrap().degeneracy(),
            Degeneracy::TwoLargestEqual
        );
        // Order of the arguments must not matter for the pattern.
        assert_eq!(
            validate_params(2.0, 0.0, 2.0, 1e-12).unwrap().degeneracy(),
            Degeneracy::TwoLargestEqual
        );
        assert_eq!(
            validate_params(3.0, 3.0, 3.0, 1e-12).unwrap().degeneracy(),
            Degeneracy::Isotropic
        );
    }

    #[test]
    fn validate_rejects_bad_input() {
        assert!(matches!(
            validate_params(-0.1, 1.0, 2.0, 1e-12),
            Err(Error::NegativeParameter { .. })
        ));
        assert!(matches!(
            validate_params(f64::NAN, 1.0, 2.0, 1e-12),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn sorted_view_and_extrema() {
        let p = validate_params(2.0, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(p.sorted(), [0.0, 1.0, 2.0]);
        assert_eq!(p.t_raw(), [2.0, 0.0, 1.0]);
        assert_eq!(p.t_max(), 2.0);
        assert_eq!(p.t_min(), 0.0);
    }

    #[test]
    fn profile_frozen_point() {
        // (t1,t2,t3) = (0,1,2) at t = 3: A = sqrt(3), B = sqrt(2), C = 1.
        let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
        let p = profile(&params, 3.0).unwrap();
        assert_relative_eq!(p.a2, (2.0_f64 / 3.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(p.b2, (3.0_f64 / 2.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(p.c2, 6.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(p.f2, 0.25 / 6.0_f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn profile_volume_identity() {
        // a^2 b^2 c^2 = ABC and f^2 = 1/(4ABC), so 4 f^2 a^2 b^2 c^2 = 1.
        let params = validate_params(0.3, 1.7, 4.0, 1e-12).unwrap();
        for &t in &[4.5, 6.0, 11.0] {
            let p = profile(&params, t).unwrap();
            assert_relative_eq!(4.0 * p.f2 * p.a2 * p.b2 * p.c2, 1.0, max_relative = 1e-14);
            assert!(p.a2 > 0.0 && p.b2 > 0.0 && p.c2 > 0.0 && p.f2 > 0.0);
        }
    }

    #[test]
    fn profile_domain_guard() {
        let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
        assert!(matches!(
            profile(&params, 2.0),
            Err(Error::DomainError { .. })
        ));
        assert!(matches!(
            profile(&params, 1.5),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
        let t = 3.3;
        let h = 1e-6;
        let (_, d) = profile_with_derivatives(&params, t).unwrap();
        let plus = profile(&params, t + h).unwrap();
        let minus = profile(&params, t - h).unwrap();
        assert_relative_eq!(d.da2, (plus.a2 - minus.a2) / (2.0 * h), epsilon = 1e-9);
        assert_relative_eq!(d.db2, (plus.b2 - minus.b2) / (2.0 * h), epsilon = 1e-9);
        assert_relative_eq!(d.dc2, (plus.c2 - minus.c2) / (2.0 * h), epsilon = 1e-9);
        assert_relative_eq!(d.df2, (plus.f2 - minus.f2) / (2.0 * h), epsilon = 1e-9);
    }

    #[test]
    fn eh_limit_examples() {
        let p = validate_params(0.0, 1.0, 1.0, 1e-12).unwrap();
        let eh = eh_limit(&p).unwrap();
        assert_relative_eq!(eh.gamma2, 1.0);
        assert_eq!(eh.t_distinct, 0.0);
        assert_eq!(eh.distinct_axis, 0);
        // rho = sqrt(t) here.
        assert_relative_eq!(eh.rho_of_t(4.0), 2.0);
        assert_relative_eq!(eh.t_of_rho(2.0), 4.0);

        let p = validate_params(0.0, 2.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(eh_limit(&p).unwrap().gamma2, 2.0);

        // Repeated pair may sit anywhere in the raw order.
        let p = validate_params(2.0, 0.5, 2.0, 1e-12).unwrap();
        let eh = eh_limit(&p).unwrap();
        assert_relative_eq!(eh.gamma2, 1.5);
        assert_eq!(eh.distinct_axis, 1);
    }

    #[test]
    fn eh_limit_rejections() {
        let generic = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
        assert!(matches!(eh_limit(&generic), Err(Error::NotEhLimit { .. })));
        let lower = validate_params(1.0, 1.0, 5.0, 1e-12).unwrap();
        assert!(matches!(eh_limit(&lower), Err(Error::NotEhLimit { .. })));
        let iso = validate_params(3.0, 3.0, 3.0, 1e-12).unwrap();
        assert!(matches!(eh_limit(&iso), Err(Error::NotEhLimit { .. })));
    }

    #[test]
    fn multicentre_agrees_generic_point() {
        let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
        let r = multicentre_check(&params, 3.0, 1.0, 0.7, 1e-5).unwrap();
        assert!(r < 1e-6, "residual {r:e}");
    }

    #[test]
    fn multicentre_agrees_isotropic_point() {
        let params = validate_params(0.0, 0.0, 0.0, 1e-12).unwrap();
        let r = multicentre_check(&params, 2.0, FRAC_PI_2, 0.0, 1e-5).unwrap();
        assert!(r < 1e-6, "residual {r:e}");
    }

    #[test]
    fn multicentre_second_order_in_h() {
        let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
        let r1 = multicentre_check(&params, 3.0, 1.1, 0.4, 4e-3).unwrap();
        let r2 = multicentre_check(&params, 3.0, 1.1, 0.4, 2e-3).unwrap();
        let order = (r1 / r2).log2();
        assert!(order >= 1.8, "observed order {order}");
    }

    #[test]
    fn multicentre_polar_guard() {
        let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
        assert!(matches!(
            multicentre_check(&params, 3.0, 1e-12, 0.3, 1e-5),
            Err(Error::SingularPoint { .. })
        ));
        assert!(matches!(
            multicentre_check(&params, 3.0, PI, 0.3, 1e-5),
            Err(Error::SingularPoint { .. })
        ));
    }
}
