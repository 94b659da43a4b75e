//! Two-mode Gaussian states, homodyne conditioning, and the free-particle
//! and displacement steering criteria.
//!
//! Phase-space ordering is `(x_A, p_A, x_B, p_B)`. Covariances follow the
//! convention `sigma_ij = <{q_i - <q_i>, q_j - <q_j>}> / 2`, so the vacuum has
//! `diag(hbar/2, hbar/2)` and physical states satisfy `V + i (hbar/2) Omega >= 0`.

mod free;

pub use free::{
    conditional_h_variance_free, conditional_h_variance_pipeline, displacement_protocol_bound, evolve_free,
    gamma_at_time, gamma_free_particle, gamma_pipeline, gamma_pipeline_with, gamma_squared_free_particle,
    time_threshold_free, DisplacementBound, TimeThreshold,
};

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{c64, eigh, CMatrix};
use crate::units::Constants;

pub const PHYSICALITY_TOL: f64 = 1e-10;

/// Parameters of the squeezed, beam-split thermal state shared by Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmssParams {
    z: f64,
    theta: f64,
    k: f64,
    dx0: f64,
    dp0: f64,
    p0: f64,
    m: f64,
    hbar: f64,
}

impl TmssParams {
    /// `dx0 * dp0` must equal `hbar (k + 1) / 2`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(z: f64, theta: f64, k: f64, dx0: f64, dp0: f64, p0: f64, m: f64, hbar: f64) -> Result<Self> {
        if !(z > 0.0 && z <= 1.0) {
            return Err(invalid("z", format!("squeezing must lie in (0, 1], got {z}")));
        }
        if !(-1e-12..=FRAC_PI_2 + 1e-12).contains(&theta) {
            return Err(invalid("theta", format!("must lie in [0, pi/2], got {theta}")));
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(invalid("k", format!("thermal excess must be >= 0, got {k}")));
        }
        for (name, v) in [("dx0", dx0), ("dp0", dp0), ("m", m), ("hbar", hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !p0.is_finite() {
            return Err(invalid("p0", "must be finite"));
        }
        let target = hbar * (k + 1.0) / 2.0;
        if (dx0 * dp0 - target).abs() > 1e-12 * target.max(1.0) {
            return Err(invalid(
                "dx0*dp0",
                format!("must equal hbar (k + 1) / 2 = {target}, got {}", dx0 * dp0),
            ));
        }
        Ok(Self {
            z,
            theta,
            k,
            dx0,
            dp0,
            p0,
            m,
            hbar,
        })
    }

    /// Parameterizes by `R = dp0 / |p0|`; `dx0` follows from the uncertainty relation.
    pub fn from_ratio(z: f64, theta: f64, k: f64, r: f64, p0: f64, c: &Constants) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("R", format!("must be > 0, got {r}")));
        }
        if p0 == 0.0 {
            return Err(invalid("p0", "R = dp0 / |p0| needs a non-zero mean momentum"));
        }
        let dp0 = r * p0.abs();
        let dx0 = c.hbar * (k + 1.0) / (2.0 * dp0);
        Self::new(z, theta, k, dx0, dp0, p0, c.m, c.hbar)
    }

    pub fn z(&self) -> f64 {
        self.z
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn dx0(&self) -> f64 {
        self.dx0
    }
    pub fn dp0(&self) -> f64 {
        self.dp0
    }
    pub fn p0(&self) -> f64 {
        self.p0
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `R = dp0 / |p0|` (infinite for `p0 = 0`).
    pub fn ratio(&self) -> f64 {
        self.dp0 / self.p0.abs()
    }
}

/// Form of the `(1,1)` entry of the cross-correlation block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossTermForm {
    /// `dx0^2 sin(2 theta) (1/(2z) - z/2)`, mirroring the momentum entry.
    #[default]
    Symmetric,
    /// The same entry with an extra `hbar^2 / p0^2` prefactor. Kept for audits only:
    /// it does not reproduce the conditional position variance.
    ScaledPrefactor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBipartiteState {
    mean: Vector4<f64>,
    cov: Matrix4<f64>,
    hbar: f64,
}

fn symplectic_eigen_floor(cov: &[f64], n_modes: usize, hbar: f64) -> f64 {
    let d = 2 * n_modes;
    let mut m = CMatrix::from_fn(d, d, |i, j| c64(cov[i * d + j], 0.0));
    for mode in 0..n_modes {
        let (x, p) = (2 * mode, 2 * mode + 1);
        m[(x, p)] += c64(0.0, hbar / 2.0);
        m[(p, x)] -= c64(0.0, hbar / 2.0);
    }
    eigh(&m).0.into_iter().fold(f64::INFINITY, f64::min)
}

impl GaussianBipartiteState {
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>, hbar: f64) -> Result<Self> {
        let scale = cov.amax().max(1.0);
        let asym = (cov - cov.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(invalid("cov", format!("not symmetric (deviation {asym:e})")));
        }
        let flat: Vec<f64> = (0..4).flat_map(|i| (0..4).map(move |j| cov[(i, j)])).collect();
        let floor = symplectic_eigen_floor(&flat, 2, hbar);
        if !(floor >= -PHYSICALITY_TOL * scale) {
            return Err(Error::Unphysical(floor));
        }
        Ok(Self { mean, cov, hbar })
    }

    pub fn mean(&self) -> &Vector4<f64> {
        &self.mean
    }
    pub fn cov(&self) -> &Matrix4<f64> {
        &self.cov
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn sigma_a(&self) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(0, 0).into_owned()
    }
    pub fn sigma_b(&self) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(2, 2).into_owned()
    }
    /// Rows indexed by Alice's quadratures, columns by Bob's.
    pub fn sigma_ab(&self) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(0, 2).into_owned()
    }
    pub fn mean_a(&self) -> Vector2<f64> {
        self.mean.fixed_rows::<2>(0).into_owned()
    }
    pub fn mean_b(&self) -> Vector2<f64> {
        self.mean.fixed_rows::<2>(2).into_owned()
    }
}

/// Single-mode Gaussian state `(x, p)`, e.g. Bob's conditional state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeGaussian {
    mean: Vector2<f64>,
    cov: Matrix2<f64>,
    hbar: f64,
}

impl SingleModeGaussian {
    pub fn new(mean: Vector2<f64>, cov: Matrix2<f64>, hbar: f64) -> Result<Self> {
        let scale = cov.amax().max(1.0);
        if (cov[(0, 1)] - cov[(1, 0)]).abs() > 1e-12 * scale {
            return Err(invalid("cov", "not symmetric"));
        }
        let det = cov.determinant();
        if !(cov[(0, 0)] > 0.0 && det >= hbar * hbar / 4.0 - PHYSICALITY_TOL * scale * scale) {
            return Err(Error::Unphysical(det - hbar * hbar / 4.0));
        }
        Ok(Self { mean, cov, hbar })
    }

    pub fn mean(&self) -> &Vector2<f64> {
        &self.mean
    }
    pub fn cov(&self) -> &Matrix2<f64> {
        &self.cov
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn variance_x(&self) -> f64 {
        self.cov[(0, 0)]
    }
    pub fn variance_p(&self) -> f64 {
        self.cov[(1, 1)]
    }

    /// `Var(p^2) = 4 <p>^2 Var(p) + 2 Var(p)^2`, from the Gaussian moment generating function.
    pub fn variance_p_squared(&self) -> f64 {
        let v = self.variance_p();
        4.0 * self.mean[1] * self.mean[1] * v + 2.0 * v * v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    Position,
    Momentum,
}

impl Quadrature {
    pub fn index(self) -> usize {
        match self {
            Quadrature::Position => 0,
            Quadrature::Momentum => 1,
        }
    }
}

/// Alice's homodyne measurement: ideal, or with finite measurement noise `s > 0`
/// (`sigma_M = diag(s, 1/s)` for position, `diag(1/s, s)` for momentum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSetting {
    pub quadrature: Quadrature,
    noise: Option<f64>,
}

impl HomodyneSetting {
    pub fn ideal(quadrature: Quadrature) -> Self {
        Self {
            quadrature,
            noise: None,
        }
    }

    pub fn noisy(quadrature: Quadrature, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("s", format!("measurement noise must be > 0, got {s}")));
        }
        Ok(Self {
            quadrature,
            noise: Some(s),
        })
    }

    pub fn is_ideal(&self) -> bool {
        self.noise.is_none()
    }

    pub fn noise(&self) -> Option<f64> {
        self.noise
    }

    fn measurement_cov(&self, s: f64) -> Matrix2<f64> {
        match self.quadrature {
            Quadrature::Position => Matrix2::new(s, 0.0, 0.0, 1.0 / s),
            Quadrature::Momentum => Matrix2::new(1.0 / s, 0.0, 0.0, s),
        }
    }
}

/// Covariance of the two-mode state for the given parameters (symmetric cross term).
pub fn tmss_covariance(params: &TmssParams) -> Result<GaussianBipartiteState> {
    tmss_covariance_with(params, CrossTermForm::Symmetric)
}

pub fn tmss_covariance_with(params: &TmssParams, form: CrossTermForm) -> Result<GaussianBipartiteState> {
    let TmssParams {
        z,
        theta,
        dx0,
        dp0,
        p0,
        hbar,
        ..
    } = *params;
    let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
    let vx = dx0 * dx0;
    let vp = dp0 * dp0;
    let a_x = vx * (z * c2 + s2 / z);
    let a_p = vp * (z * s2 + c2 / z);
    let b_x = vx * (z * s2 + c2 / z);
    let b_p = vp * (z * c2 + s2 / z);
    let mix = (2.0 * theta).sin() * (1.0 / (2.0 * z) - z / 2.0);
    let mut c_x = vx * mix;
    if form == CrossTermForm::ScaledPrefactor {
        c_x *= hbar * hbar / (p0 * p0);
    }
    let c_p = -vp * mix;
    #[rustfmt::skip]
    let cov = Matrix4::new(
        a_x, 0.0, c_x, 0.0,
        0.0, a_p, 0.0, c_p,
        c_x, 0.0, b_x, 0.0,
        0.0, c_p, 0.0, b_p,
    );
    GaussianBipartiteState::new(Vector4::new(0.0, p0, 0.0, p0), cov, hbar)
}

/// Outcome density and Bob's conditional state after Alice's homodyne result `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioned {
    /// Density of the measured quadrature at `a`.
    pub pdf: f64,
    pub state: SingleModeGaussian,
}

/// Gaussian update `mu_B + C^T (sigma_A + sigma_M)^+ (a - mu_A)`,
/// `sigma_B - C^T (sigma_A + sigma_M)^+ C`, with `C` the Alice-by-Bob cross block.
///
/// Ideal homodyne uses the rank-one pseudoinverse limit, and the outcome density
/// is one-dimensional over the measured quadrature. For noisy settings the
/// unmeasured component of the outcome vector is set to its mean.
pub fn condition_on_homodyne(state: &GaussianBipartiteState, setting: &HomodyneSetting, a: f64) -> Result<Conditioned> {
    let q = setting.quadrature.index();
    let sa = state.sigma_a();
    let c = state.sigma_ab();
    let mean_a = state.mean_a();
    let mut outcome = mean_a;
    outcome[q] = a;
    let delta = outcome - mean_a;

    let (pinv, marginal_var) = match setting.noise() {
        None => {
            let mut p = Matrix2::zeros();
            p[(q, q)] = 1.0 / sa[(q, q)];
            (p, sa[(q, q)])
        }
        Some(s) => {
            let total = sa + setting.measurement_cov(s);
            let inv = total
                .try_inverse()
                .ok_or_else(|| Error::Numerical("singular measurement covariance".into()))?;
            (inv, total[(q, q)])
        }
    };
    let gain = c.transpose() * pinv;
    let mean = state.mean_b() + gain * delta;
    let mut cov = state.sigma_b() - gain * c;
    cov = (cov + cov.transpose()) * 0.5;
    let d = a - mean_a[q];
    let pdf = (-d * d / (2.0 * marginal_var)).exp() / (2.0 * PI * marginal_var).sqrt();
    Ok(Conditioned {
        pdf,
        state: SingleModeGaussian::new(mean, cov, state.hbar())?,
    })
}

/// Closed-form conditional variance of Bob's quadrature when Alice measures the same quadrature:
/// `dx0^2 z / (z^2 cos^2 + sin^2)` or `dp0^2 z / (z^2 sin^2 + cos^2)`.
pub fn conditional_quadrature_variance(params: &TmssParams, quadrature: Quadrature) -> f64 {
    let (z, th) = (params.z, params.theta);
    let (s2, c2) = (th.sin().powi(2), th.cos().powi(2));
    match quadrature {
        Quadrature::Position => params.dx0 * params.dx0 * z / (z * z * c2 + s2),
        Quadrature::Momentum => params.dp0 * params.dp0 * z / (z * z * s2 + c2),
    }
}
