//! Brute-force cross-checks: outcome-space quadrature and Monte Carlo for the
//! Gaussian conditional moments, finite-difference QFI, and definitional
//! conditional statistics for discrete assemblages.

mod quadrature;

pub use quadrature::{integrate_adaptive, QuadratureRule, DEFAULT_ORDER, MAX_ORDER, MIN_ORDER};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assemblage::DiscreteAssemblage;
use crate::error::{invalid, Error, Result};
use crate::gaussian::{condition_on_homodyne, GaussianBipartiteState, HomodyneSetting, SingleModeGaussian};
use crate::ghz::bures_distance;
use crate::linalg::{c64, eigh, propagator, spectral_map, Complex64, DensityMatrix, Observable};
use crate::random::stream_rng;
use crate::units::Constants;

/// Relative agreement required between successive quadrature orders.
pub const QUAD_REL_TOL: f64 = 1e-10;
pub const MIN_MC_SAMPLES: u64 = 10_000;
/// Eigenvalue floor applied to rank-deficient states before differentiating.
pub const FD_EIGEN_FLOOR: f64 = 1e-10;

const MC_CHUNK: u64 = 1 << 16;
/// Widening of the quadrature grid relative to the outcome law, so the
/// reported outcome density enters the integrand.
const PROPOSAL_SCALE: f64 = 1.25;

/// Statistic of Bob's conditional state, averaged over Alice's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    VarX,
    VarP,
    /// `Var(p^2)` of the conditional state.
    FourthP,
    /// `|<p>|` of the conditional state.
    AbsMeanP,
}

impl Functional {
    pub const ALL: [Functional; 4] = [Self::VarX, Self::VarP, Self::FourthP, Self::AbsMeanP];

    pub fn eval(self, s: &SingleModeGaussian) -> f64 {
        match self {
            Self::VarX => s.variance_x(),
            Self::VarP => s.variance_p(),
            Self::FourthP => s.variance_p_squared(),
            Self::AbsMeanP => s.mean()[1].abs(),
        }
    }
}

/// Mean and variance of Alice's measured outcome.
fn outcome_law(state: &GaussianBipartiteState, setting: &HomodyneSetting) -> (f64, f64) {
    let q = setting.quadrature.index();
    let var = state.sigma_a()[(q, q)] + setting.noise().unwrap_or(0.0);
    (state.mean_a()[q], var)
}

/// `int da p(a) f(rho_B|a)` by Gauss-Hermite quadrature over Alice's outcome.
///
/// The grid is `a = mean + 1.25 sd x`, weighted by the outcome density reported by
/// the conditioning step. `|<p>|` is only accepted when the conditional mean does not
/// depend on the outcome; otherwise the kink defeats the rule.
pub fn quad_conditional_moment(
    state: &GaussianBipartiteState,
    setting: &HomodyneSetting,
    functional: Functional,
) -> Result<f64> {
    if !setting.is_ideal() {
        return Err(invalid("setting", "quadrature oracle needs an ideal homodyne"));
    }
    let (mean, var) = outcome_law(state, setting);
    let sd = var.sqrt();
    if functional == Functional::AbsMeanP {
        let lo = condition_on_homodyne(state, setting, mean - sd)?.state.mean()[1];
        let hi = condition_on_homodyne(state, setting, mean + sd)?.state.mean()[1];
        if (hi - lo).abs() > 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
            return Err(Error::UnsupportedFunctional(
                "abs_mean_p with an outcome-dependent conditional mean".into(),
            ));
        }
    }
    let lambda = PROPOSAL_SCALE;
    let norm = lambda * sd * (2.0 * std::f64::consts::PI).sqrt();
    integrate_adaptive(
        |x| {
            let cond = condition_on_homodyne(state, setting, mean + lambda * sd * x)?;
            if cond.pdf == 0.0 {
                return Ok(0.0);
            }
            Ok(norm * (0.5 * x * x).exp() * cond.pdf * functional.eval(&cond.state))
        },
        QUAD_REL_TOL,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        let c = Self { samples, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_MC_SAMPLES {
            return Err(invalid(
                "samples",
                format!("need at least {MIN_MC_SAMPLES}, got {}", self.samples),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments {
        n: 0.0,
        mean: 0.0,
        m2: 0.0,
    };

    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

/// Sample mean of the functional over Alice's outcome law, with its standard error.
///
/// Samples are drawn in fixed-size chunks, each from its own ChaCha stream keyed by
/// the chunk index, and merged in order, so the result does not depend on threading.
pub fn mc_conditional_moment(
    state: &GaussianBipartiteState,
    setting: &HomodyneSetting,
    functional: Functional,
    cfg: &McConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    let (mean, var) = outcome_law(state, setting);
    let sd = var.sqrt();
    let chunks = cfg.samples.div_ceil(MC_CHUNK);
    let parts: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(cfg.seed, c);
            let len = MC_CHUNK.min(cfg.samples - c * MC_CHUNK);
            let mut acc = Moments::EMPTY;
            for _ in 0..len {
                let x: f64 = rng.sample(StandardNormal);
                let cond = condition_on_homodyne(state, setting, mean + sd * x)?;
                acc.push(functional.eval(&cond.state));
            }
            Ok(acc)
        })
        .collect();
    let mut total = Moments::EMPTY;
    for p in parts {
        total = total.merge(p?);
    }
    let variance = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok((total.mean, (variance.max(0.0) / total.n).sqrt()))
}

fn floored(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let (vals, vecs) = eigh(rho.matrix());
    let clamped: Vec<f64> = vals.iter().map(|v| v.max(FD_EIGEN_FLOOR)).collect();
    let total: f64 = clamped.iter().sum();
    let m = spectral_map(&clamped, &vecs, |v| c64(v / total, 0.0));
    DensityMatrix::new(m)
}

fn fd_unchecked(rho: &DensityMatrix, h: &Observable, c: &Constants, eps: f64) -> Result<f64> {
    let base = floored(rho)?;
    let u = propagator(h.matrix(), eps, c.hbar);
    let moved = DensityMatrix::new(&u * base.matrix() * u.adjoint())?;
    let d = bures_distance(&moved, &base)?;
    Ok(4.0 * (d / eps).powi(2))
}

/// `4 (D(rho(eps), rho) / eps)^2` with `D` the Bures angle and `rho(eps)` the state
/// evolved under `H` for time `eps`.
pub fn qfi_finite_difference(rho: &DensityMatrix, h: &Observable, c: &Constants, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: h.dim(),
        });
    }
    fd_unchecked(rho, h, c, eps)
}

/// Richardson extrapolation of the finite difference over `eps` and `eps / 2`,
/// cancelling the `eps^2` error term.
pub fn qfi_richardson(rho: &DensityMatrix, h: &Observable, c: &Constants, eps: f64) -> Result<f64> {
    let coarse = qfi_finite_difference(rho, h, c, eps)?;
    let fine = fd_unchecked(rho, h, c, eps / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(1e-5..=1e-3).contains(&eps) {
        return Err(invalid("eps", format!("must lie in [1e-5, 1e-3], got {eps}")));
    }
    Ok(())
}

fn expect(rho: &DensityMatrix, op: &nalgebra::DMatrix<Complex64>) -> Complex64 {
    let n = rho.dim();
    let mut acc = c64(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += rho.matrix()[(i, j)] * op[(j, i)];
        }
    }
    acc
}

fn square(a: &nalgebra::DMatrix<Complex64>) -> nalgebra::DMatrix<Complex64> {
    let n = a.nrows();
    let mut out = nalgebra::DMatrix::from_element(n, n, c64(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i, j)] += a[(i, k)] * a[(k, j)];
            }
        }
    }
    out
}

/// `min_X sum_a p(a|X) (<M^2> - <M>^2)`, by explicit loops.
pub fn exhaustive_conditional_variance(asm: &DiscreteAssemblage, m: &Observable) -> Result<f64> {
    if m.dim() != asm.dim() {
        return Err(Error::DimensionMismatch {
            expected: asm.dim(),
            found: m.dim(),
        });
    }
    let m2 = square(m.matrix());
    let mut best = f64::INFINITY;
    for table in asm.settings() {
        let mut total = 0.0;
        for o in &table.outcomes {
            let mean = expect(&o.state, m.matrix()).re;
            total += o.probability * (expect(&o.state, &m2).re - mean * mean);
        }
        best = best.min(total);
    }
    Ok(best)
}

/// `max_X sum_a p(a|X) |Tr(rho [H, M])| / hbar`, by explicit loops.
pub fn exhaustive_conditional_rate(
    asm: &DiscreteAssemblage,
    m: &Observable,
    h: &Observable,
    c: &Constants,
) -> Result<f64> {
    for d in [m.dim(), h.dim()] {
        if d != asm.dim() {
            return Err(Error::DimensionMismatch {
                expected: asm.dim(),
                found: d,
            });
        }
    }
    let n = asm.dim();
    let mut comm = nalgebra::DMatrix::from_element(n, n, c64(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                comm[(i, j)] += h.matrix()[(i, k)] * m.matrix()[(k, j)] - m.matrix()[(i, k)] * h.matrix()[(k, j)];
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for table in asm.settings() {
        let mut total = 0.0;
        for o in &table.outcomes {
            total += o.probability * expect(&o.state, &comm).im.abs() / c.hbar;
        }
        best = best.max(total);
    }
    Ok(best)
}
