use std::io::Write;
use std::path::Path;

use qsl_steering::gaussian::{displacement_protocol_bound, gamma_free_particle, TmssParams};
use qsl_steering::ghz::{
    critical_visibility, ghz_conditional_qfi_closed, ghz_dense_energy_variance, ghz_energy_variance_bound,
    ghz_qfi_comparison, ghz_time_bound, GhzScenario, MAX_DENSE_QUBITS,
};
use rayon::prelude::*;

use crate::config::{Scenario, SweepConfig};
use crate::format::{flag, num};
use crate::{CliError, Result};

pub const FREE_PARTICLE_HEADER: [&str; 6] = ["z", "R", "theta", "k", "gamma", "violation"];
pub const DISPLACEMENT_HEADER: [&str; 9] = ["z", "R", "theta", "k", "dt", "bound", "actual", "ratio", "violation"];
pub const GHZ_HEADER: [&str; 10] = [
    "N",
    "p",
    "mu",
    "p_c",
    "time_bound",
    "qfi_closed",
    "qfi_dense",
    "var_bound",
    "var_dense",
    "violation_at_dt",
];

/// Writes `bytes` to `out`, or to stdout when no path is given.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn to_csv<const N: usize>(header: [&str; N], rows: Vec<[String; N]>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::Io {
        path: "<buffer>".into(),
        source: e.into_error(),
    })
}

/// Grid in row-major order: z outermost, then R, theta, k.
fn gaussian_grid(cfg: &SweepConfig) -> Vec<[f64; 4]> {
    let (zs, rs, ts, ks) = (cfg.z.values(), cfg.r.values(), cfg.theta.values(), cfg.k.values());
    let mut grid = Vec::with_capacity(zs.len() * rs.len() * ts.len() * ks.len());
    for &z in &zs {
        for &r in &rs {
            for &t in &ts {
                for &k in &ks {
                    grid.push([z, r, t, k]);
                }
            }
        }
    }
    grid
}

fn expect_scenario(cfg: &SweepConfig, want: Scenario) -> Result<()> {
    if cfg.scenario != want {
        return Err(CliError::Config(format!(
            "scenario is {:?}, this command runs {want:?}",
            cfg.scenario
        )));
    }
    cfg.validate()
}

/// CSV of the closed-form free-particle gamma over the (z, R, theta, k) grid.
pub fn free_particle_csv(cfg: &SweepConfig) -> Result<Vec<u8>> {
    expect_scenario(cfg, Scenario::FreeParticle)?;
    let rows = gaussian_grid(cfg)
        .into_par_iter()
        .map(|[z, r, t, k]| {
            let gamma = gamma_free_particle(z, t, k, r)?;
            Ok([
                num(z),
                num(r),
                num(t),
                num(k),
                num(gamma),
                flag(gamma < 1.0).to_string(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    to_csv(FREE_PARTICLE_HEADER, rows)
}

/// CSV of the displacement protocol: elapsed time `actual` against the local bound.
pub fn displacement_csv(cfg: &SweepConfig) -> Result<Vec<u8>> {
    expect_scenario(cfg, Scenario::Displacement)?;
    let d_mean = cfg.p0.abs() * cfg.dt / cfg.units.m;
    let rows = gaussian_grid(cfg)
        .into_par_iter()
        .map(|[z, r, t, k]| {
            let params = TmssParams::from_ratio(z, t, k, r, cfg.p0, &cfg.units)?;
            let d = displacement_protocol_bound(&params, d_mean)?;
            Ok([
                num(z),
                num(r),
                num(t),
                num(k),
                num(cfg.dt),
                num(d.bound),
                num(d.actual),
                num(d.bound / d.actual),
                flag(d.violated).to_string(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    to_csv(DISPLACEMENT_HEADER, rows)
}

/// CSV of GHZ thresholds over N and p. Dense columns are `nan` in closed-form-only mode.
pub fn ghz_csv(cfg: &SweepConfig) -> Result<Vec<u8>> {
    expect_scenario(cfg, Scenario::Ghz)?;
    if !cfg.closed_form_only && cfg.n.max + 1 > MAX_DENSE_QUBITS {
        return Err(CliError::Config(format!(
            "N = {} needs {} qubits, above the dense limit of {MAX_DENSE_QUBITS}; \
             lower --n-max or pass --closed-form-only",
            cfg.n.max,
            cfg.n.max + 1
        )));
    }
    let mut grid = Vec::new();
    for n in cfg.n.values() {
        for p in cfg.p.values() {
            grid.push((n, p));
        }
    }
    let rows = grid
        .into_par_iter()
        .map(|(n, p)| {
            let s = GhzScenario::new(n, p, cfg.units.mu, cfg.units.hbar)?;
            let time_bound = ghz_time_bound(&s);
            let (qfi_dense, var_dense) = if cfg.closed_form_only {
                (f64::NAN, f64::NAN)
            } else {
                let cmp = ghz_qfi_comparison(&s)?;
                (cmp.dense_qfi * s.hbar * s.hbar, ghz_dense_energy_variance(&s)?)
            };
            Ok([
                n.to_string(),
                num(p),
                num(s.mu),
                num(critical_visibility(n)?),
                num(time_bound),
                num(ghz_conditional_qfi_closed(&s)),
                num(qfi_dense),
                num(ghz_energy_variance_bound(&s)),
                num(var_dense),
                flag(cfg.dt < time_bound).to_string(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    to_csv(GHZ_HEADER, rows)
}

pub fn csv_for(cfg: &SweepConfig) -> Result<Vec<u8>> {
    match cfg.scenario {
        Scenario::FreeParticle => free_particle_csv(cfg),
        Scenario::Displacement => displacement_csv(cfg),
        Scenario::Ghz => ghz_csv(cfg),
    }
}

/// Computes every row, then writes the file; nothing is written on error.
pub fn cmd_free_particle(cfg: &SweepConfig) -> Result<()> {
    emit(&free_particle_csv(cfg)?, cfg.out.as_deref())
}

pub fn cmd_displacement(cfg: &SweepConfig) -> Result<()> {
    emit(&displacement_csv(cfg)?, cfg.out.as_deref())
}

pub fn cmd_ghz(cfg: &SweepConfig) -> Result<()> {
    emit(&ghz_csv(cfg)?, cfg.out.as_deref())
}

pub fn cmd_run(cfg: &SweepConfig) -> Result<()> {
    emit(&csv_for(cfg)?, cfg.out.as_deref())
}
