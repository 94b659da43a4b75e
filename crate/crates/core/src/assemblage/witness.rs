//! Conditional speed-limit witnesses evaluated on a [`DiscreteAssemblage`].
//!
//! Conditional variances are minimized over Alice's settings, conditional
//! rates, quantum Fisher information and Bures displacements are maximized.
//! Ties keep the first setting in declaration order. The `*_at` variants
//! evaluate one fixed setting instead of optimizing.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ghz::{bures_distance, spectral_qfi};
use crate::linalg::{commutator, trace_product, Observable};
use crate::units::Constants;

use super::{DiscreteAssemblage, Outcome, SettingTable};

/// Relative size below which a rate or an energy variance counts as zero.
const DEGENERACY_EPS: f64 = 1e-12;
/// Mean squared Bures angle below which no evolution is visible.
const DISTANCE_EPS: f64 = 1e-12;
const VIOLATION_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingValue {
    pub value: f64,
    pub setting: String,
}

/// Outcome of evaluating one steering criterion.
///
/// `gamma` is `measured / lhs_bound`; any local-hidden-state model has
/// `gamma >= 1`. Degenerate criteria (zero rate or zero energy spread where
/// the inequality is vacuous) carry `gamma = inf` and never report violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub criterion: String,
    pub measured: f64,
    pub lhs_bound: f64,
    pub gamma: f64,
    pub violated: bool,
    /// Setting minimizing the conditional variance of the probe observable
    /// (the energy, for the geometric criterion).
    pub chosen_setting_min: String,
    /// Setting maximizing the conditional rate (or squared distance).
    pub chosen_setting_max: String,
    /// Setting minimizing the conditional energy variance.
    pub energy_setting: String,
    pub degenerate: bool,
}

fn check_dim(asm: &DiscreteAssemblage, op: &Observable) -> Result<()> {
    if op.dim() != asm.dim() {
        return Err(Error::DimensionMismatch {
            expected: asm.dim(),
            found: op.dim(),
        });
    }
    Ok(())
}

fn weighted(table: &SettingTable, f: impl Fn(&Outcome) -> Result<f64>) -> Result<f64> {
    table
        .outcomes
        .iter()
        .try_fold(0.0, |acc, o| Ok(acc + o.probability * f(o)?))
}

fn optimize(
    asm: &DiscreteAssemblage,
    maximize: bool,
    per_setting: impl Fn(&SettingTable) -> Result<f64>,
) -> Result<SettingValue> {
    let mut best: Option<SettingValue> = None;
    for table in asm.settings() {
        let v = per_setting(table)?;
        let better = match &best {
            None => true,
            Some(b) if maximize => v > b.value,
            Some(b) => v < b.value,
        };
        if better {
            best = Some(SettingValue {
                value: v,
                setting: table.label.clone(),
            });
        }
    }
    best.ok_or(Error::EmptyAssemblage)
}

fn variance_of_table(table: &SettingTable, m: &Observable) -> Result<f64> {
    weighted(table, |o| Ok(o.state.variance(m)?.max(0.0)))
}

fn rate_of_table(table: &SettingTable, m: &Observable, h: &Observable, c: &Constants) -> Result<f64> {
    let comm = commutator(h.matrix(), m.matrix());
    // d<M>/dt = (i/hbar) <[H, M]>; the commutator expectation is purely imaginary.
    weighted(table, |o| Ok(trace_product(o.state.matrix(), &comm).im.abs() / c.hbar))
}

fn qfi_of_table(table: &SettingTable, h: &Observable, c: &Constants) -> Result<f64> {
    weighted(table, |o| spectral_qfi(&o.state, h, c))
}

/// `(Delta M)^2_{B|A} = min_X sum_a p(a|X) Var(M; rho_{a|X})`.
pub fn conditional_variance(asm: &DiscreteAssemblage, m: &Observable) -> Result<SettingValue> {
    check_dim(asm, m)?;
    optimize(asm, false, |t| variance_of_table(t, m))
}

pub fn conditional_variance_at(asm: &DiscreteAssemblage, m: &Observable, setting: &str) -> Result<f64> {
    check_dim(asm, m)?;
    variance_of_table(asm.setting(setting)?, m)
}

/// `|d<M>/dt|_{B|A} = max_X sum_a p(a|X) |(i/hbar) <[H, M]>_{rho_{a|X}}|` at `t = 0`.
pub fn conditional_mean_rate(
    asm: &DiscreteAssemblage,
    m: &Observable,
    h: &Observable,
    c: &Constants,
) -> Result<SettingValue> {
    check_dim(asm, m)?;
    check_dim(asm, h)?;
    optimize(asm, true, |t| rate_of_table(t, m, h, c))
}

pub fn conditional_mean_rate_at(
    asm: &DiscreteAssemblage,
    m: &Observable,
    h: &Observable,
    c: &Constants,
    setting: &str,
) -> Result<f64> {
    check_dim(asm, m)?;
    check_dim(asm, h)?;
    rate_of_table(asm.setting(setting)?, m, h, c)
}

/// `F_{B|A}[H] = max_X sum_a p(a|X) F_Q[rho_{a|X}, H]`.
pub fn conditional_qfi(asm: &DiscreteAssemblage, h: &Observable, c: &Constants) -> Result<SettingValue> {
    check_dim(asm, h)?;
    optimize(asm, true, |t| qfi_of_table(t, h, c))
}

pub fn conditional_qfi_at(asm: &DiscreteAssemblage, h: &Observable, c: &Constants, setting: &str) -> Result<f64> {
    check_dim(asm, h)?;
    qfi_of_table(asm.setting(setting)?, h, c)
}

fn max_abs_entry(op: &nalgebra::DMatrix<crate::linalg::Complex64>) -> f64 {
    op.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Conditional Mandelstam-Tamm criterion.
///
/// Compares the conditional time scale `(Delta M)_{B|A} / |d<M>/dt|_{B|A}`
/// with `hbar / (2 (Delta H)_{B|A})`.
pub fn mt_witness(asm: &DiscreteAssemblage, m: &Observable, h: &Observable, c: &Constants) -> Result<WitnessReport> {
    let var_m = conditional_variance(asm, m)?;
    let rate = conditional_mean_rate(asm, m, h, c)?;
    let var_h = conditional_variance(asm, h)?;

    let rate_scale = max_abs_entry(&commutator(h.matrix(), m.matrix())) / c.hbar;
    let h_scale = max_abs_entry(h.matrix()).powi(2);
    let degenerate = rate.value <= DEGENERACY_EPS * rate_scale || var_h.value <= DEGENERACY_EPS * h_scale;

    let tau = var_m.value.sqrt() / rate.value;
    let lhs_bound = c.hbar / (2.0 * var_h.value.sqrt());
    let gamma = if degenerate {
        f64::INFINITY
    } else {
        tau * 2.0 * var_h.value.sqrt() / c.hbar
    };
    Ok(WitnessReport {
        criterion: "mandelstam-tamm".into(),
        measured: tau,
        lhs_bound,
        gamma,
        violated: !degenerate && gamma < 1.0 - VIOLATION_MARGIN,
        chosen_setting_min: var_m.setting,
        chosen_setting_max: rate.setting,
        energy_setting: var_h.setting,
        degenerate,
    })
}

/// Minimal time to shift `<M>` by `d_mean` under an LHS model:
/// `hbar d_mean / (2 sqrt(var_h) sqrt(var_m))`.
pub fn displacement_time_bound(d_mean: f64, var_m: f64, var_h: f64, c: &Constants) -> Result<f64> {
    if !(var_m > 0.0) {
        return Err(invalid("var_m", format!("must be > 0, got {var_m}")));
    }
    if !(var_h > 0.0) {
        return Err(invalid("var_h", format!("must be > 0, got {var_h}")));
    }
    if !(d_mean >= 0.0) {
        return Err(invalid("d_mean", format!("must be >= 0, got {d_mean}")));
    }
    Ok(c.hbar * d_mean / (2.0 * var_h.sqrt() * var_m.sqrt()))
}

/// Every conditional state evolved by `exp(-i H dt / hbar)`; probabilities unchanged.
pub fn evolve_assemblage(
    asm: &DiscreteAssemblage,
    h: &Observable,
    dt: f64,
    c: &Constants,
) -> Result<DiscreteAssemblage> {
    check_dim(asm, h)?;
    let mut tables = Vec::with_capacity(asm.settings().len());
    for t in asm.settings() {
        let outcomes = t
            .outcomes
            .iter()
            .map(|o| Ok(Outcome::new(o.label.clone(), o.probability, o.state.evolve(h, dt, c)?)))
            .collect::<Result<Vec<_>>>()?;
        tables.push(SettingTable::new(t.label.clone(), outcomes));
    }
    DiscreteAssemblage::new(asm.dim(), tables)
}

fn check_matching(a: &DiscreteAssemblage, b: &DiscreteAssemblage) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.settings().len() != b.settings().len() {
        return Err(Error::MismatchedTables("different number of settings".into()));
    }
    for (s, t) in a.settings().iter().zip(b.settings()) {
        if s.label != t.label || s.outcomes.len() != t.outcomes.len() {
            return Err(Error::MismatchedTables(format!("setting `{}`", s.label)));
        }
        for (o, q) in s.outcomes.iter().zip(&t.outcomes) {
            if o.label != q.label || (o.probability - q.probability).abs() > 1e-12 {
                return Err(Error::MismatchedTables(format!(
                    "outcome `{}` of setting `{}`",
                    o.label, s.label
                )));
            }
        }
    }
    Ok(())
}

/// `delta<M>_{B|A} = max_X sum_a p(a|X) |<M>_{rho_{a|X}(t1)} - <M>_{rho_{a|X}(t0)}|`.
pub fn conditional_displacement(
    before: &DiscreteAssemblage,
    after: &DiscreteAssemblage,
    m: &Observable,
) -> Result<SettingValue> {
    check_matching(before, after)?;
    check_dim(before, m)?;
    let mut best: Option<SettingValue> = None;
    for (s, t) in before.settings().iter().zip(after.settings()) {
        let mut v = 0.0;
        for (o, q) in s.outcomes.iter().zip(&t.outcomes) {
            v += o.probability * (q.state.expectation(m)? - o.state.expectation(m)?).abs();
        }
        if best.as_ref().is_none_or(|b| v > b.value) {
            best = Some(SettingValue {
                value: v,
                setting: s.label.clone(),
            });
        }
    }
    best.ok_or(Error::EmptyAssemblage)
}

/// Time-integrated geometric criterion `dt >= hbar sqrt(<D(dt)^2>_{B|A} / (Delta H)^2_{B|A})`.
///
/// `evolved` must be `initial` with every conditional state propagated for `dt`.
/// With no conditional energy spread left, any visible motion makes the bound
/// infinite (always violated); no motion at all is reported as degenerate.
pub fn geometric_time_bound(
    initial: &DiscreteAssemblage,
    evolved: &DiscreteAssemblage,
    h: &Observable,
    dt: f64,
    c: &Constants,
) -> Result<WitnessReport> {
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    check_matching(initial, evolved)?;
    check_dim(initial, h)?;

    let mut d2: Option<SettingValue> = None;
    for (s, t) in initial.settings().iter().zip(evolved.settings()) {
        let mut v = 0.0;
        for (o, q) in s.outcomes.iter().zip(&t.outcomes) {
            v += o.probability * bures_distance(&q.state, &o.state)?.powi(2);
        }
        if d2.as_ref().is_none_or(|b| v > b.value) {
            d2 = Some(SettingValue {
                value: v,
                setting: s.label.clone(),
            });
        }
    }
    let d2 = d2.ok_or(Error::EmptyAssemblage)?;
    let var_h = conditional_variance(initial, h)?;

    let h_scale = max_abs_entry(h.matrix()).powi(2);
    let no_spread = var_h.value <= DEGENERACY_EPS * h_scale;
    let no_motion = d2.value <= DISTANCE_EPS;

    let (bound, gamma, violated, degenerate) = if no_motion {
        (0.0, f64::INFINITY, false, true)
    } else if no_spread {
        (f64::INFINITY, 0.0, true, false)
    } else {
        let bound = c.hbar * (d2.value / var_h.value).sqrt();
        let gamma = dt / bound;
        (
            bound,
            gamma,
            dt < bound - VIOLATION_MARGIN && gamma < 1.0 - VIOLATION_MARGIN,
            false,
        )
    };
    Ok(WitnessReport {
        criterion: "geometric".into(),
        measured: dt,
        lhs_bound: bound,
        gamma,
        violated,
        chosen_setting_min: var_h.setting.clone(),
        chosen_setting_max: d2.setting,
        energy_setting: var_h.setting,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemblage::{assemblage_from_lhs, HiddenState, LhsModel};
    use crate::linalg::{c64, CMatrix, CVector, DensityMatrix};

    fn pauli(which: char) -> Observable {
        let z = c64(0., 0.);
        let one = c64(1., 0.);
        let m = match which {
            'x' => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            'y' => CMatrix::from_row_slice(2, 2, &[z, c64(0., -1.), c64(0., 1.), z]),
            _ => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        };
        Observable::new(m).unwrap()
    }

    fn single(state: DensityMatrix) -> DiscreteAssemblage {
        DiscreteAssemblage::new(
            state.dim(),
            vec![SettingTable::new("only", vec![Outcome::new("a", 1.0, state)])],
        )
        .unwrap()
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::pure(&CVector::from_vec(vec![c64(1., 0.), c64(1., 0.)])).unwrap()
    }

    #[test]
    fn eigenstate_has_zero_conditional_variance() {
        let asm = single(plus());
        let v = conditional_variance(&asm, &pauli('x')).unwrap();
        assert!(v.value.abs() < 1e-15);
        assert_eq!(v.setting, "only");
    }

    #[test]
    fn commuting_observables_have_zero_rate() {
        let asm = single(plus());
        let z = pauli('z');
        let r = conditional_mean_rate(&asm, &z, &z, &Constants::NATURAL).unwrap();
        assert_eq!(r.value, 0.0);
        let report = mt_witness(&asm, &z, &z, &Constants::NATURAL).unwrap();
        assert!(report.degenerate && !report.violated);
    }

    #[test]
    fn rate_matches_ehrenfest_for_precession() {
        // H = sz/2, M = sx on |+>: d<sx>/dt = -<sy> = 0; M = sy gives d<sy>/dt = <sx> = 1.
        let asm = single(plus());
        let h = pauli('z').scaled(0.5);
        let r = conditional_mean_rate(&asm, &pauli('y'), &h, &Constants::NATURAL).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        let r = conditional_mean_rate(&asm, &pauli('x'), &h, &Constants::NATURAL).unwrap();
        assert!(r.value.abs() < 1e-14);
    }

    #[test]
    fn single_state_mt_saturates_for_qubit_precession() {
        let asm = single(plus());
        let h = pauli('z').scaled(0.5);
        let rep = mt_witness(&asm, &pauli('y'), &h, &Constants::NATURAL).unwrap();
        // Var(sy) = 1, rate = 1, Var(H) = 1/4 -> gamma = 1 exactly.
        assert!((rep.gamma - 1.0).abs() < 1e-12);
        assert!(!rep.violated);
    }

    #[test]
    fn displacement_bound_formula() {
        let c = Constants::NATURAL;
        assert_eq!(displacement_time_bound(0.0, 0.25, 0.25, &c).unwrap(), 0.0);
        assert!((displacement_time_bound(1.0, 0.25, 0.25, &c).unwrap() - 2.0).abs() < 1e-15);
        assert!(displacement_time_bound(1.0, 0.0, 0.25, &c).is_err());
        assert!(displacement_time_bound(1.0, 0.25, -1.0, &c).is_err());
    }

    #[test]
    fn identity_hamiltonian_is_a_global_phase() {
        let asm = single(plus());
        let h = Observable::new(CMatrix::identity(2, 2).scale(3.0)).unwrap();
        let c = Constants::NATURAL;
        let ev = evolve_assemblage(&asm, &h, 0.4, &c).unwrap();
        let rep = geometric_time_bound(&asm, &ev, &h, 0.4, &c).unwrap();
        assert_eq!(rep.lhs_bound, 0.0);
        assert!(!rep.violated && rep.degenerate);
    }

    #[test]
    fn geometric_bound_rejects_bad_inputs() {
        let asm = single(plus());
        let h = pauli('z');
        let c = Constants::NATURAL;
        assert!(geometric_time_bound(&asm, &asm, &h, 0.0, &c).is_err());
        let other = DiscreteAssemblage::new(
            2,
            vec![SettingTable::new("other", vec![Outcome::new("a", 1.0, plus())])],
        )
        .unwrap();
        assert!(matches!(
            geometric_time_bound(&asm, &other, &h, 0.1, &c),
            Err(Error::MismatchedTables(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let asm = single(plus());
        let big = Observable::diagonal(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            conditional_variance(&asm, &big),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn first_setting_wins_ties() {
        let model = LhsModel::new(
            vec![HiddenState {
                weight: 1.0,
                state: plus(),
            }],
            vec![vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5]]],
        )
        .unwrap();
        let asm = assemblage_from_lhs(&model, &["first", "second"], &["+", "-"]).unwrap();
        let v = conditional_variance(&asm, &pauli('z')).unwrap();
        assert_eq!(v.setting, "first");
        let r = conditional_mean_rate(&asm, &pauli('y'), &pauli('z'), &Constants::NATURAL).unwrap();
        assert_eq!(r.setting, "first");
    }

    #[test]
    fn maximally_mixed_conditional_states_have_zero_qfi() {
        let asm = single(DensityMatrix::maximally_mixed(2));
        let q = conditional_qfi(&asm, &pauli('z'), &Constants::NATURAL).unwrap();
        assert!(q.value.abs() < 1e-15);
    }

    #[test]
    fn pure_conditional_states_give_four_variances() {
        let asm = single(plus());
        let h = pauli('z').scaled(0.5);
        let q = conditional_qfi(&asm, &h, &Constants::NATURAL).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
    }
}
