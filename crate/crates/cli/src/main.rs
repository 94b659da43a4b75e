use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsl_steer::checks::{report_json, report_text, run_checks, VerifyOptions};
use qsl_steer::commands::{cmd_displacement, cmd_free_particle, cmd_ghz, cmd_run, emit};
use qsl_steer::config::{Scenario, SweepConfig};
use qsl_steer::{CliError, EXIT_OK, EXIT_VERIFY_FAILED};
use qsl_steering::gaussian::CrossTermForm;

#[derive(Parser)]
#[command(
    name = "qsl-steer",
    version,
    about = "Speed-limit steering witnesses: sweeps and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form gamma over a (z, R, theta, k) grid.
    FreeParticle(SweepArgs),
    /// Displacement protocol: elapsed time against the local bound.
    Displacement(SweepArgs),
    /// GHZ thresholds, closed forms and dense cross-checks over N and p.
    Ghz(SweepArgs),
    /// Runs the verification suite; exit 1 if any check fails.
    Verify(SweepArgs),
    /// Runs the scenario named in the config file.
    Run(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CrossTerm {
    Symmetric,
    Scaled,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    z_min: Option<f64>,
    #[arg(long)]
    z_max: Option<f64>,
    #[arg(long)]
    z_steps: Option<usize>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    r_steps: Option<usize>,
    /// Mixing angle in radians.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    /// Number of Bob's qubits (the first, with --n-max).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Single visibility.
    #[arg(long, conflicts_with_all = ["p_min", "p_max", "p_steps"])]
    p: Option<f64>,
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    p_max: Option<f64>,
    #[arg(long)]
    p_steps: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// GHZ: skip dense columns so N is not limited by memory.
    #[arg(long)]
    closed_form_only: bool,
    /// Cross-term form of the covariance matrix used by the pipeline checks.
    #[arg(long, value_enum)]
    cross_term: Option<CrossTerm>,
}

impl SweepArgs {
    fn resolve(self, scenario: Option<Scenario>) -> Result<SweepConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => SweepConfig::from_json_file(path)?,
            None => SweepConfig::default(),
        };
        if let Some(s) = scenario {
            c.scenario = s;
        }
        set(&mut c.z.min, self.z_min);
        set(&mut c.z.max, self.z_max);
        set(&mut c.z.steps, self.z_steps);
        set(&mut c.r.min, self.r_min);
        set(&mut c.r.max, self.r_max);
        set(&mut c.r.steps, self.r_steps);
        if let Some(t) = self.theta {
            c.theta = qsl_steer::config::Range::single(t);
        }
        if let Some(k) = self.k {
            c.k = qsl_steer::config::Range::single(k);
        }
        if let Some(n) = self.n {
            c.n.min = n;
            c.n.max = self.n_max.unwrap_or(n);
        } else {
            set(&mut c.n.max, self.n_max);
        }
        if let Some(p) = self.p {
            c.p = qsl_steer::config::Range::single(p);
        }
        set(&mut c.p.min, self.p_min);
        set(&mut c.p.max, self.p_max);
        set(&mut c.p.steps, self.p_steps);
        set(&mut c.dt, self.dt);
        set(&mut c.p0, self.p0);
        set(&mut c.seed, self.seed);
        if self.out.is_some() {
            c.out = self.out;
        }
        c.closed_form_only |= self.closed_form_only;
        if let Some(form) = self.cross_term {
            c.cross_term = match form {
                CrossTerm::Symmetric => CrossTermForm::Symmetric,
                CrossTerm::Scaled => CrossTermForm::ScaledPrefactor,
            };
        }
        Ok(c)
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn verify(cfg: &SweepConfig) -> Result<i32, CliError> {
    let checks = run_checks(&VerifyOptions {
        seed: cfg.seed,
        cross_term: cfg.cross_term,
    })?;
    print!("{}", report_text(&checks));
    if let Some(path) = &cfg.out {
        emit(&report_json(&checks)?, Some(path))?;
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.check_id.as_str())
        .collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("verification failed: {}", failed.join(", "));
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::FreeParticle(a) => cmd_free_particle(&a.resolve(Some(Scenario::FreeParticle))?)?,
        Command::Displacement(a) => cmd_displacement(&a.resolve(Some(Scenario::Displacement))?)?,
        Command::Ghz(a) => cmd_ghz(&a.resolve(Some(Scenario::Ghz))?)?,
        Command::Verify(a) => return verify(&a.resolve(None)?),
        Command::Run(a) => cmd_run(&a.resolve(None)?)?,
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
