use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use qsl_steering::assemblage::{
    assemblage_from_lhs, conditional_mean_rate, conditional_qfi, conditional_variance, conditional_variance_at,
    evolve_assemblage, geometric_time_bound, mt_witness,
};
use qsl_steering::gaussian::{
    condition_on_homodyne, conditional_h_variance_free, conditional_quadrature_variance, displacement_protocol_bound,
    evolve_free, gamma_at_time, gamma_free_particle, gamma_pipeline_with, time_threshold_free, tmss_covariance,
    CrossTermForm, HomodyneSetting, Quadrature, TmssParams,
};
use qsl_steering::ghz::{
    alice_assemblage, bob_jz, critical_visibility, critical_visibility_residual, ghz_dense_energy_variance,
    ghz_energy_variance_bound, ghz_exact_energy_variance, ghz_time_bound, noisy_ghz, spectral_qfi, GhzScenario,
    PauliSetting,
};
use qsl_steering::linalg::DensityMatrix;
use qsl_steering::oracle::{
    exhaustive_conditional_rate, exhaustive_conditional_variance, mc_conditional_moment, qfi_richardson,
    quad_conditional_moment, Functional, McConfig,
};
use qsl_steering::random::{random_density_matrix, random_hermitian, random_lhs_model, random_pure_state, stream_rng};
use qsl_steering::Constants;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::Result;

const LHS_MODELS: u64 = 40;
const GAUSSIAN_DRAWS: u64 = 6;
const MC_SAMPLES: u64 = 100_000;
const QFI_STATES: u64 = 20;
const SETTINGS: [&str; 3] = ["X", "Y", "Z"];
const OUTCOMES: [&str; 3] = ["0", "1", "2"];

/// One verification result; passes when `measured <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check_id: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(check_id: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            check_id: check_id.to_string(),
            passed: measured <= tolerance,
            measured,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Cross-term form fed to the covariance pipeline; the scaled prefactor is a fault injection.
    pub cross_term: CrossTermForm,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            cross_term: CrossTermForm::Symmetric,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Runs the whole suite in a fixed order.
pub fn run_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = assemblage_checks(opts.seed)?;
    out.extend(gaussian_checks(opts)?);
    out.extend(ghz_checks()?);
    out.extend(oracle_checks(opts.seed)?);
    Ok(out)
}

fn assemblage_checks(seed: u64) -> Result<Vec<Check>> {
    let c = Constants::NATURAL;
    let (mut gamma_short, mut qfi_excess, mut geo_violations, mut exhaustive) = (0.0f64, 0.0f64, 0.0, 0.0f64);
    for i in 0..LHS_MODELS {
        let mut rng = stream_rng(seed, 1000 + i);
        let dim = rng.random_range(2..=4);
        let settings = rng.random_range(2..=3);
        let outcomes = rng.random_range(2..=3);
        let hidden = rng.random_range(1..=5);
        let model = random_lhs_model(&mut rng, dim, hidden, settings, outcomes)?;
        let asm = assemblage_from_lhs(&model, &SETTINGS[..settings], &OUTCOMES[..outcomes])?;
        let m = random_hermitian(&mut rng, dim);
        let h = random_hermitian(&mut rng, dim);

        let mt = mt_witness(&asm, &m, &h, &c)?;
        if !mt.degenerate {
            gamma_short = gamma_short.max(1.0 - mt.gamma);
        }
        let qfi = conditional_qfi(&asm, &h, &c)?.value;
        let var_h = conditional_variance(&asm, &h)?.value;
        qfi_excess = qfi_excess.max(qfi - 4.0 * var_h / (c.hbar * c.hbar));
        for dt in [0.1, 1.0] {
            let later = evolve_assemblage(&asm, &h, dt, &c)?;
            if geometric_time_bound(&asm, &later, &h, dt, &c)?.violated {
                geo_violations += 1.0;
            }
        }
        let v = conditional_variance(&asm, &m)?.value;
        let r = conditional_mean_rate(&asm, &m, &h, &c)?.value;
        exhaustive = exhaustive
            .max((v - exhaustive_conditional_variance(&asm, &m)?).abs() / (1.0 + v.abs()))
            .max((r - exhaustive_conditional_rate(&asm, &m, &h, &c)?).abs() / (1.0 + r));
    }
    Ok(vec![
        Check::new("assemblage.lhs_mt_gamma", gamma_short.max(0.0), 1e-9),
        Check::new("assemblage.lhs_qfi_bound", qfi_excess.max(0.0), 1e-9),
        Check::new("assemblage.lhs_geometric_violations", geo_violations, 0.0),
        Check::new("assemblage.exhaustive_agreement", exhaustive, 1e-12),
    ])
}

fn gaussian_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let c = Constants::NATURAL;
    let mut out = Vec::new();

    out.push(Check::new(
        "gaussian.separable_sqrt6",
        rel(gamma_free_particle(1.0, 0.0, 0.0, 1.0)?, 6f64.sqrt()),
        1e-12,
    ));

    let zs = linspace(0.01, 1.0, 100);
    let (k, r) = (0.5, 0.7);
    let mut theta0 = 0.0f64;
    let mut theta45 = 0.0f64;
    for &z in &zs {
        let want0 = 2.0 * (k + 1.0f64).powi(2) * (r * r * z + 2.0);
        theta0 = theta0.max(rel(gamma_free_particle(z, 0.0, k, r)?.powi(2), want0));
        let want45 = 8.0 * (k + 1.0f64).powi(2) * z * (r * r * (z.powi(4) + 1.0) + 2.0 * (z.powi(3) + z))
            / (z * z + 1.0).powi(3);
        theta45 = theta45.max(rel(gamma_free_particle(z, FRAC_PI_4, k, r)?.powi(2), want45));
    }
    out.push(Check::new("gaussian.theta0_reduction", theta0, 1e-12));
    out.push(Check::new("gaussian.theta_pi4_reduction", theta45, 1e-12));

    let (mut lo, mut hi) = (1e-6, 0.5);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if gamma_free_particle(mid, FRAC_PI_4, 0.0, 0.0)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.push(Check::new(
        "gaussian.boundary_r0",
        (0.5 * (lo + hi) - (2.0 - 3f64.sqrt())).abs(),
        1e-6,
    ));

    // violation region: non-empty, down-closed in z, shrinking with R
    let rs = linspace(0.01, 2.0, 40);
    let mut breaches = 0.0;
    let mut prev_edge = usize::MAX;
    let mut total = 0usize;
    for &r in &rs {
        let flags: Vec<bool> = zs
            .iter()
            .map(|&z| gamma_free_particle(z, FRAC_PI_4, 0.0, r).map(|g| g < 1.0))
            .collect::<qsl_steering::Result<_>>()?;
        let edge = flags.iter().take_while(|&&f| f).count();
        if flags[edge..].iter().any(|&f| f) {
            breaches += 1.0;
        }
        if edge > prev_edge {
            breaches += 1.0;
        }
        prev_edge = edge;
        total += edge;
    }
    if total == 0 {
        breaches += 1.0;
    }
    out.push(Check::new("gaussian.violation_region_shape", breaches, 0.0));

    let mut rng = stream_rng(opts.seed, 2000);
    let mut closed_vs_pipeline = 0.0f64;
    let mut assembly = 0.0f64;
    let mut det = 0.0f64;
    let mut monotone = 0.0;
    let mut crossing = 0.0f64;
    for _ in 0..GAUSSIAN_DRAWS * 4 {
        let (z, th, k, r) = (
            rng.random_range(0.05..1.0),
            rng.random_range(0.0..FRAC_PI_2),
            rng.random_range(0.0..2.0),
            rng.random_range(0.1..3.0),
        );
        let p0 = rng.random_range(0.5..2.0);
        let p = TmssParams::from_ratio(z, th, k, r, p0, &c)?;
        // an unphysical covariance from the injected cross term fails both checks
        match gamma_pipeline_with(&p, opts.cross_term) {
            Ok(piped) => {
                closed_vs_pipeline = closed_vs_pipeline.max(rel(gamma_free_particle(z, th, k, r)?, piped));
                let tau = conditional_quadrature_variance(&p, Quadrature::Position).sqrt() * p.m() / p0;
                let assembled = 2.0 * tau * conditional_h_variance_free(&p).sqrt() / p.hbar();
                assembly = assembly.max(rel(piped, assembled));
            }
            Err(_) => {
                closed_vs_pipeline = f64::INFINITY;
                assembly = f64::INFINITY;
            }
        }

        let st = tmss_covariance(&p)?;
        let cond = condition_on_homodyne(&st, &HomodyneSetting::ideal(Quadrature::Position), 0.0)?.state;
        let d0 = cond.cov().determinant();
        for dt in [0.1, 1.0, 10.0] {
            let e = evolve_free(&cond, p.m(), dt)?;
            // relative to the diagonal product, which the shear inflates
            det = det.max((e.cov().determinant() - d0).abs() / (e.cov()[(0, 0)] * e.cov()[(1, 1)]).max(d0));
        }
        let mut last = 0.0;
        for i in 0..20 {
            let g = gamma_at_time(&p, 0.25 * i as f64)?;
            if g < last {
                monotone += 1.0;
            }
            last = g;
        }
    }
    // crossings need violating parameters: small z and R at theta = pi/4
    for _ in 0..GAUSSIAN_DRAWS * 4 {
        let z = rng.random_range(0.02..0.25);
        let r = rng.random_range(0.01..0.2);
        let t = time_threshold_free(&TmssParams::from_ratio(z, FRAC_PI_4, 0.0, r, 1.0, &c)?)?;
        if t.gamma0 >= 1.0 {
            crossing = f64::INFINITY;
            break;
        }
        crossing = crossing.max((t.dt_numeric - t.dt_analytic).abs() / t.dt_analytic.max(1.0));
    }
    out.push(Check::new("gaussian.closed_form_pipeline", closed_vs_pipeline, 1e-10));
    out.push(Check::new("gaussian.pipeline_assembly", assembly, 1e-10));
    out.push(Check::new("gaussian.evolution_determinant", det, 1e-12));
    out.push(Check::new("gaussian.gamma_time_monotone", monotone, 0.0));
    out.push(Check::new("gaussian.time_threshold_crossing", crossing, 1e-9));

    let mut tight = 0.0f64;
    let mut ratio = 0.0f64;
    let mut missed = 0.0;
    for i in 1..=9 {
        let z = 0.1 * i as f64;
        let d = displacement_protocol_bound(&TmssParams::from_ratio(z, 0.0, 0.0, 0.8, 1.0, &c)?, 1.0)?;
        tight = tight.max(rel(d.bound, d.actual));
        let d = displacement_protocol_bound(&TmssParams::from_ratio(z, FRAC_PI_4, 0.0, 0.8, 1.0, &c)?, 1.0)?;
        ratio = ratio.max(rel(d.bound / d.actual, (z * z + 1.0) / (2.0 * z)));
        if !d.violated {
            missed += 1.0;
        }
    }
    out.push(Check::new("gaussian.displacement_tight", tight, 1e-12));
    out.push(Check::new("gaussian.displacement_ratio", ratio, 1e-12));
    out.push(Check::new("gaussian.displacement_violation_missed", missed, 0.0));
    Ok(out)
}

fn ghz_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let (mut closed, mut exact, mut optimized_excess) = (0.0f64, 0.0f64, 0.0f64);
    for n in 1..=6 {
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let s = GhzScenario::natural(n, p)?;
            let asm = alice_assemblage(&noisy_ghz(&s)?, &[PauliSetting::Z])?;
            let v = conditional_variance_at(&asm, &bob_jz(n, s.mu), "z")?;
            let scale = (s.mu * s.mu * n as f64 / 4.0).max(1.0);
            closed = closed.max((v - ghz_energy_variance_bound(&s)).abs() / scale);
            exact = exact.max((v - ghz_exact_energy_variance(&s)).abs() / scale);
            optimized_excess = optimized_excess.max((ghz_dense_energy_variance(&s)? - v) / scale);
        }
    }
    out.push(Check::new("ghz.energy_variance_equality", closed, 1e-10));
    out.push(Check::new("ghz.energy_variance_exact", exact, 1e-10));
    out.push(Check::new(
        "ghz.energy_variance_setting_min",
        optimized_excess.max(0.0),
        1e-12,
    ));

    out.push(Check::new(
        "ghz.critical_visibility_n1",
        (critical_visibility(1)? - (17f64.sqrt() - 1.0) / 8.0).abs(),
        1e-12,
    ));
    let residual = (1..=10)
        .map(|n| critical_visibility(n).map(|p| critical_visibility_residual(n, p).abs()))
        .collect::<qsl_steering::Result<Vec<_>>>()?;
    out.push(Check::new("ghz.critical_visibility_residual", max_of(residual), 1e-10));
    out.push(Check::new(
        "ghz.time_bound_value",
        (ghz_time_bound(&GhzScenario::natural(1, 0.5)?) - 0.577350269190).abs(),
        1e-12,
    ));
    Ok(out)
}

fn oracle_checks(seed: u64) -> Result<Vec<Check>> {
    let c = Constants::NATURAL;
    let mut out = Vec::new();
    let mut rng = stream_rng(seed, 3000);
    let mut quad = [0.0f64; 4];
    let mut mc = [0.0f64; 4];
    for draw in 0..GAUSSIAN_DRAWS {
        let p = TmssParams::from_ratio(
            rng.random_range(0.05..1.0),
            rng.random_range(0.0..FRAC_PI_2),
            rng.random_range(0.0..2.0),
            rng.random_range(0.1..3.0),
            rng.random_range(0.5..2.0),
            &c,
        )?;
        let st = tmss_covariance(&p)?;
        let x = HomodyneSetting::ideal(Quadrature::Position);
        let mom = HomodyneSetting::ideal(Quadrature::Momentum);
        let cases = [
            (
                x,
                Functional::VarX,
                conditional_quadrature_variance(&p, Quadrature::Position),
            ),
            (
                mom,
                Functional::VarP,
                conditional_quadrature_variance(&p, Quadrature::Momentum),
            ),
            (x, Functional::AbsMeanP, p.p0().abs()),
            (mom, Functional::FourthP, 4.0 * conditional_h_variance_free(&p)),
        ];
        let cfg = McConfig::new(MC_SAMPLES, seed.wrapping_add(draw))?;
        for (i, (setting, f, closed)) in cases.into_iter().enumerate() {
            quad[i] = quad[i].max(rel(quad_conditional_moment(&st, &setting, f)?, closed));
            let (est, err) = mc_conditional_moment(&st, &setting, f, &cfg)?;
            mc[i] = mc[i].max((est - closed).abs() / (4.0 * err + 1e-12 * closed));
        }
    }
    for (i, name) in ["var_x", "var_p", "abs_mean_p", "fourth_p"].iter().enumerate() {
        out.push(Check::new(&format!("oracle.quadrature_{name}"), quad[i], 1e-8));
        out.push(Check::new(&format!("oracle.monte_carlo_{name}"), mc[i], 1.0));
    }

    let mut fd = 0.0f64;
    let mut pure = 0.0f64;
    for i in 0..QFI_STATES {
        let mut rng = stream_rng(seed, 4000 + i);
        let rho = random_density_matrix(&mut rng, 4, 4)?;
        let h = random_hermitian(&mut rng, 4);
        let exact = spectral_qfi(&rho, &h, &c)?;
        fd = fd.max(rel(qfi_richardson(&rho, &h, &c, 1e-3)?, exact));
        let psi = DensityMatrix::pure(&random_pure_state(&mut rng, 4))?;
        let want = 4.0 * psi.variance(&h)? / (c.hbar * c.hbar);
        pure = pure.max(rel(spectral_qfi(&psi, &h, &c)?, want));
    }
    out.push(Check::new("oracle.finite_difference_qfi", fd, 1e-6));
    out.push(Check::new("oracle.pure_state_qfi", pure, 1e-10));
    Ok(out)
}

/// One line per check, in suite order.
pub fn report_text(checks: &[Check]) -> String {
    let mut s = String::new();
    for ch in checks {
        let verdict = if ch.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!(
            "{verdict} {} measured={} tolerance={}\n",
            ch.check_id,
            crate::format::num(ch.measured),
            crate::format::num(ch.tolerance)
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    s.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    s
}

pub fn report_json(checks: &[Check]) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(checks)?;
    v.push(b'\n');
    Ok(v)
}
