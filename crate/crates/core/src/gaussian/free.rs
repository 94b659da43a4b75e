//! Free particle `H = p^2 / 2m` on Bob's side and the displacement protocol.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

use super::{
    condition_on_homodyne, conditional_quadrature_variance, tmss_covariance_with, CrossTermForm,
    GaussianBipartiteState, HomodyneSetting, Quadrature, SingleModeGaussian, TmssParams,
};

const VIOLATION_MARGIN: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-10;

/// Upper bound on `(Delta H)^2_{B|A} = (Delta p_B^2)^2_{B|A} / (4 m^2)` from Alice's ideal
/// momentum homodyne, averaged over her outcome:
///
/// `dp0^2 ((z^2+1)(4 p0^2 z + dp0^2 (z^2+1)) - 4 p0^2 z (z^2-1) cos 2t - dp0^2 (z^2-1)^2 cos 4t)
///  / (2 (cos^2 t + z^2 sin^2 t)^2)`.
///
/// The `cos 4t` term carries a minus sign; with a plus sign the expression no longer equals
/// `2 V (C^2/sigma_A + 2 p0^2 + sigma_B)` and disagrees with direct integration.
pub fn conditional_h_variance_free(params: &TmssParams) -> f64 {
    let TmssParams {
        z, theta, dp0, p0, m, ..
    } = *params;
    let (vp, p2, z2) = (dp0 * dp0, p0 * p0, z * z);
    let num = vp
        * ((z2 + 1.0) * (4.0 * p2 * z + vp * (z2 + 1.0))
            - 4.0 * p2 * z * (z2 - 1.0) * (2.0 * theta).cos()
            - vp * (z2 - 1.0).powi(2) * (4.0 * theta).cos());
    let den = 2.0 * (theta.cos().powi(2) + z2 * theta.sin().powi(2)).powi(2);
    num / den / (4.0 * m * m)
}

/// `(Delta H)^2_{B|A}` from the covariance matrix: condition on Alice's momentum, then
/// average `4 <p>_a^2 V + 2 V^2` over her Gaussian outcome using
/// `E[<p>_a^2] = <p_B>^2 + g^2 sigma_A22`, `g = C22 / sigma_A22`.
pub fn conditional_h_variance_pipeline(state: &GaussianBipartiteState, m: f64) -> Result<f64> {
    let setting = HomodyneSetting::ideal(Quadrature::Momentum);
    let at_mean = condition_on_homodyne(state, &setting, state.mean_a()[1])?;
    let v = at_mean.state.variance_p();
    let sa = state.sigma_a()[(1, 1)];
    let g = state.sigma_ab()[(1, 1)] / sa;
    let mb = state.mean_b()[1];
    let mean_sq = mb * mb + g * g * sa;
    Ok((4.0 * mean_sq * v + 2.0 * v * v) / (4.0 * m * m))
}

fn check_gamma_args(z: f64, k: f64, r: f64) -> Result<()> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(invalid("z", format!("squeezing must lie in (0, 1], got {z}")));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(invalid("k", format!("thermal excess must be >= 0, got {k}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid("R", format!("must be >= 0, got {r}")));
    }
    Ok(())
}

/// Closed form of `gamma^2` for the free particle with Alice's position homodyne:
///
/// `(k+1)^2 z (-R^2 (1-z^2)^2 cos 4t + (z^2+1)(R^2 (z^2+1) + 4z) + 4z (1-z^2) cos 2t)
///  / (2 (sin^2 t + z^2 cos^2 t)(cos^2 t + z^2 sin^2 t)^2)`.
///
/// `R = 0` is accepted as the limit of a sharp initial momentum.
pub fn gamma_squared_free_particle(z: f64, theta: f64, k: f64, r: f64) -> Result<f64> {
    check_gamma_args(z, k, r)?;
    let (z2, r2) = (z * z, r * r);
    let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
    let bracket = -r2 * (1.0 - z2).powi(2) * (4.0 * theta).cos()
        + (z2 + 1.0) * (r2 * (z2 + 1.0) + 4.0 * z)
        + 4.0 * z * (1.0 - z2) * (2.0 * theta).cos();
    let den = 2.0 * (s2 + z2 * c2) * (c2 + z2 * s2).powi(2);
    Ok((k + 1.0).powi(2) * z * bracket / den)
}

pub fn gamma_free_particle(z: f64, theta: f64, k: f64, r: f64) -> Result<f64> {
    Ok(gamma_squared_free_particle(z, theta, k, r)?.sqrt())
}

/// `gamma = 2 (Delta tau)(Delta H) / hbar` assembled from the covariance matrix: position
/// conditioning for `Delta tau = sqrt(V_x) m / |<p>|`, momentum conditioning for `Delta H`.
pub fn gamma_pipeline(params: &TmssParams) -> Result<f64> {
    gamma_pipeline_with(params, CrossTermForm::Symmetric)
}

pub fn gamma_pipeline_with(params: &TmssParams, form: CrossTermForm) -> Result<f64> {
    let state = tmss_covariance_with(params, form)?;
    let cond = condition_on_homodyne(&state, &HomodyneSetting::ideal(Quadrature::Position), 0.0)?;
    let rate = cond.state.mean()[1].abs() / params.m;
    if rate == 0.0 {
        return Err(invalid("p0", "mean momentum must be non-zero"));
    }
    let tau = cond.state.variance_x().sqrt() / rate;
    let dh = conditional_h_variance_pipeline(&state, params.m)?.sqrt();
    Ok(2.0 * tau * dh / params.hbar)
}

/// Free evolution `S = [[1, dt/m], [0, 1]]` applied to mean and covariance.
pub fn evolve_free(cond: &SingleModeGaussian, m: f64, dt: f64) -> Result<SingleModeGaussian> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be >= 0, got {dt}")));
    }
    if !(m > 0.0) {
        return Err(invalid("m", format!("must be > 0, got {m}")));
    }
    let s = Matrix2::new(1.0, dt / m, 0.0, 1.0);
    let cov = s * cond.cov() * s.transpose();
    SingleModeGaussian::new(s * cond.mean(), (cov + cov.transpose()) * 0.5, cond.hbar())
}

fn x_conditioned(params: &TmssParams) -> Result<SingleModeGaussian> {
    let state = tmss_covariance_with(params, CrossTermForm::Symmetric)?;
    Ok(condition_on_homodyne(&state, &HomodyneSetting::ideal(Quadrature::Position), 0.0)?.state)
}

/// `gamma(dt)`: the closed-form `gamma(0)^2` plus the growth of the conditional position
/// variance under free evolution, `(m/p0)^2 (V_x(dt) - V_x(0)) 4 (Delta H)^2 / hbar^2`.
pub fn gamma_at_time(params: &TmssParams, dt: f64) -> Result<f64> {
    if params.p0 == 0.0 {
        return Err(invalid("p0", "mean momentum must be non-zero"));
    }
    let g0 = gamma_squared_free_particle(params.z, params.theta, params.k, params.ratio())?;
    let start = x_conditioned(params)?;
    let later = evolve_free(&start, params.m, dt)?;
    let growth = later.variance_x() - start.variance_x();
    let h2 = conditional_h_variance_free(params);
    let tau_growth = growth * (params.m / params.p0).powi(2);
    Ok((g0 + tau_growth * 4.0 * h2 / (params.hbar * params.hbar)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeThreshold {
    pub gamma0: f64,
    pub h_variance: f64,
    /// `(1 - gamma) hbar / (4 R^2 (Delta H)^2)`, clamped at zero.
    pub dt_closed: f64,
    /// Smallest `dt >= 0` with `gamma(dt) >= 1`, by bisection.
    pub dt_numeric: f64,
    /// Exact crossing `hbar |p0| sqrt((1 - gamma0^2) / (4 (Delta H)^2 V_p))`.
    pub dt_analytic: f64,
}

/// Time after which the free-particle criterion can no longer be violated.
/// Only defined in natural units (`hbar = m = 1`).
pub fn time_threshold_free(params: &TmssParams) -> Result<TimeThreshold> {
    if (params.hbar - 1.0).abs() > 1e-12 || (params.m - 1.0).abs() > 1e-12 {
        return Err(Error::NonNaturalUnits);
    }
    let r = params.ratio();
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("R", format!("must be finite and > 0, got {r}")));
    }
    let gamma0 = gamma_free_particle(params.z, params.theta, params.k, r)?;
    let h2 = conditional_h_variance_free(params);
    if gamma0 >= 1.0 {
        return Ok(TimeThreshold {
            gamma0,
            h_variance: h2,
            dt_closed: 0.0,
            dt_numeric: 0.0,
            dt_analytic: 0.0,
        });
    }
    let dt_closed = (1.0 - gamma0) * params.hbar / (4.0 * r * r * h2);
    let vp = x_conditioned(params)?.variance_p();
    let dt_analytic = params.hbar * params.p0.abs() * ((1.0 - gamma0 * gamma0) / (4.0 * h2 * vp)).sqrt();

    let mut hi = 1.0;
    let mut doublings = 0;
    while gamma_at_time(params, hi)? < 1.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Numerical("no crossing of gamma(dt) = 1 found".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > BISECTION_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if gamma_at_time(params, mid)? >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(TimeThreshold {
        gamma0,
        h_variance: h2,
        dt_closed: dt_closed.max(0.0),
        dt_numeric: 0.5 * (lo + hi),
        dt_analytic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementBound {
    pub bound: f64,
    pub actual: f64,
    pub violated: bool,
}

/// Displacement by `d_mean_x` at speed `p0 / m`: the elapsed time `m d / p0` against the
/// local bound `hbar m d / (2 p0 (Delta p)(Delta x))` built from the conditional variances.
pub fn displacement_protocol_bound(params: &TmssParams, d_mean_x: f64) -> Result<DisplacementBound> {
    if params.p0 == 0.0 {
        return Err(invalid("p0", "mean momentum must be non-zero"));
    }
    if !(d_mean_x > 0.0 && d_mean_x.is_finite()) {
        return Err(invalid("d_mean_x", format!("must be > 0, got {d_mean_x}")));
    }
    let p0 = params.p0.abs();
    let dx = conditional_quadrature_variance(params, Quadrature::Position).sqrt();
    let dp = conditional_quadrature_variance(params, Quadrature::Momentum).sqrt();
    let actual = params.m * d_mean_x / p0;
    let bound = params.hbar * params.m * d_mean_x / (2.0 * p0 * dp * dx);
    Ok(DisplacementBound {
        bound,
        actual,
        violated: actual < bound - VIOLATION_MARGIN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::Constants;
    use nalgebra::Vector2;
    use std::f64::consts::FRAC_PI_4;

    fn params(z: f64, theta: f64, k: f64, r: f64) -> TmssParams {
        TmssParams::from_ratio(z, theta, k, r, 1.0, &Constants::NATURAL).unwrap()
    }

    #[test]
    fn separable_case_is_sqrt_six() {
        let g = gamma_free_particle(1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((g - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn entangled_sharp_momentum() {
        let g = gamma_free_particle(0.1, FRAC_PI_4, 0.0, 0.0).unwrap();
        assert!((g - 0.4 / 1.01).abs() < 1e-12);
        let b = 2.0 - 3f64.sqrt();
        assert!((gamma_free_particle(b, FRAC_PI_4, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_rejects_out_of_range() {
        assert!(gamma_free_particle(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(gamma_free_particle(1.5, 0.0, 0.0, 1.0).is_err());
        assert!(gamma_free_particle(0.5, 0.0, -1.0, 1.0).is_err());
        assert!(gamma_free_particle(0.5, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn h_variance_at_zero_mean() {
        let c = Constants::NATURAL;
        let p = TmssParams::new(1.0, 0.0, 0.0, 0.5, 1.0, 0.0, c.m, c.hbar).unwrap();
        assert!((conditional_h_variance_free(&p) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn h_variance_closed_form_matches_pipeline() {
        for &(z, th, k, r) in &[(0.5, FRAC_PI_4, 0.0, 1.0), (0.3, 0.4, 0.7, 2.0), (0.9, 1.2, 2.0, 0.1)] {
            let p = params(z, th, k, r);
            let closed = conditional_h_variance_free(&p);
            let pipe =
                conditional_h_variance_pipeline(&tmss_covariance_with(&p, CrossTermForm::Symmetric).unwrap(), 1.0)
                    .unwrap();
            assert!((closed - pipe).abs() < 1e-12 * closed);
        }
    }

    #[test]
    fn pipeline_assembles_closed_form_pieces() {
        let p = params(0.4, 0.6, 0.3, 0.8);
        let tau = conditional_quadrature_variance(&p, Quadrature::Position).sqrt() / p.p0();
        let g = gamma_pipeline(&p).unwrap();
        assert!((g - 2.0 * tau * conditional_h_variance_free(&p).sqrt()).abs() < 1e-12 * g);
    }

    #[test]
    fn closed_form_is_twice_the_assembled_gamma() {
        for &(z, th, k, r) in &[(0.5, FRAC_PI_4, 0.0, 1.0), (0.2, 1.0, 1.0, 2.0)] {
            let closed = gamma_free_particle(z, th, k, r).unwrap();
            let assembled = gamma_pipeline(&params(z, th, k, r)).unwrap();
            assert!((closed / assembled - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn evolution_shears_the_covariance() {
        let s = SingleModeGaussian::new(Vector2::new(0.0, 2.0), Matrix2::new(1.0, 0.0, 0.0, 0.5), 1.0).unwrap();
        let e = evolve_free(&s, 1.0, 1.0).unwrap();
        assert_eq!(*e.cov(), Matrix2::new(1.5, 0.5, 0.5, 0.5));
        assert_eq!(*e.mean(), Vector2::new(2.0, 2.0));
        assert_eq!(evolve_free(&s, 1.0, 0.0).unwrap(), s);
        assert!(evolve_free(&s, 1.0, -0.1).is_err());
    }

    #[test]
    fn threshold_without_window() {
        let t = time_threshold_free(&params(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!((t.dt_closed, t.dt_numeric), (0.0, 0.0));
    }

    #[test]
    fn threshold_bisection_matches_crossing() {
        let p = params(0.05, FRAC_PI_4, 0.0, 0.1);
        let t = time_threshold_free(&p).unwrap();
        assert!(t.gamma0 < 1.0 && t.dt_numeric > 0.0);
        assert!((t.dt_numeric - t.dt_analytic).abs() < 1e-9 * t.dt_analytic.max(1.0));
        assert!((gamma_at_time(&p, t.dt_analytic).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn threshold_requires_natural_units() {
        let c = Constants::new(2.0, 1.0, 1.0).unwrap();
        let p = TmssParams::from_ratio(0.5, FRAC_PI_4, 0.0, 1.0, 1.0, &c).unwrap();
        assert_eq!(time_threshold_free(&p), Err(Error::NonNaturalUnits));
    }

    #[test]
    fn displacement_separable_is_tight() {
        let d = displacement_protocol_bound(&params(0.6, 0.0, 0.0, 1.0), 2.0).unwrap();
        assert!((d.bound - d.actual).abs() < 1e-12);
        assert!(!d.violated);
    }

    #[test]
    fn displacement_entangled_ratio() {
        for &z in &[0.1, 0.5, 0.9] {
            let d = displacement_protocol_bound(&params(z, FRAC_PI_4, 0.0, 1.0), 1.0).unwrap();
            assert!((d.bound / d.actual - (z * z + 1.0) / (2.0 * z)).abs() < 1e-12);
            assert!(d.violated);
        }
        let d = displacement_protocol_bound(&params(0.9, FRAC_PI_4, 1.0, 1.0), 1.0).unwrap();
        assert!(!d.violated);
        assert!(displacement_protocol_bound(&params(0.9, FRAC_PI_4, 1.0, 1.0), 0.0).is_err());
    }
}
