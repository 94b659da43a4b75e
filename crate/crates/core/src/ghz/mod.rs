//! Noisy GHZ states shared between Alice (first qubit) and Bob (`N` qubits).
//!
//! Alice measures `sigma_z` or `sigma_x`; Bob evolves under
//! `J_z = (mu / 2) sum_i sigma_z^(i)`. Closed forms for this scenario
//! are exposed next to dense simulations so the two can be compared.

mod metrics;

pub use metrics::{bures_distance, fidelity, spectral_qfi, QFI_SUPPORT_CUTOFF, SQRT_SUPPORT_CUTOFF};

use serde::{Deserialize, Serialize};

use crate::assemblage::{
    conditional_qfi, conditional_variance, evolve_assemblage, geometric_time_bound, DiscreteAssemblage, Outcome,
    SettingTable, WitnessReport,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{c64, CMatrix, DensityMatrix, Observable};
use crate::units::Constants;

/// Total qubit count (Alice + Bob) allowed in dense storage.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzScenario {
    /// Number of Bob's qubits.
    pub n: usize,
    /// Visibility of the GHZ component.
    pub p: f64,
    pub mu: f64,
    pub hbar: f64,
}

impl GhzScenario {
    pub fn new(n: usize, p: f64, mu: f64, hbar: f64) -> Result<Self> {
        if n < 1 {
            return Err(invalid("n", "Bob needs at least one qubit"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("p", format!("visibility must lie in [0, 1], got {p}")));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(invalid("mu", format!("must be > 0, got {mu}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(invalid("hbar", format!("must be > 0, got {hbar}")));
        }
        Ok(Self { n, p, mu, hbar })
    }

    pub fn natural(n: usize, p: f64) -> Result<Self> {
        Self::new(n, p, 1.0, 1.0)
    }

    pub fn constants(&self) -> Constants {
        Constants {
            hbar: self.hbar,
            m: 1.0,
            mu: self.mu,
        }
    }

    fn check_dense(&self) -> Result<()> {
        let qubits = self.n + 1;
        if qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooLarge {
                qubits,
                max: MAX_DENSE_QUBITS,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliSetting {
    X,
    Z,
}

impl PauliSetting {
    pub fn label(self) -> &'static str {
        match self {
            PauliSetting::X => "x",
            PauliSetting::Z => "z",
        }
    }

    /// Projectors onto the `+1` and `-1` eigenspaces, as 2x2 real matrices.
    fn projectors(self) -> [[[f64; 2]; 2]; 2] {
        match self {
            PauliSetting::Z => [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]],
            PauliSetting::X => [[[0.5, 0.5], [0.5, 0.5]], [[0.5, -0.5], [-0.5, 0.5]]],
        }
    }
}

/// `p |GHZ_{N+1}><GHZ_{N+1}| + (1 - p) / 2^{N+1} * 1`.
pub fn noisy_ghz(s: &GhzScenario) -> Result<DensityMatrix> {
    s.check_dense()?;
    let dim = 1usize << (s.n + 1);
    let mut m = CMatrix::identity(dim, dim).scale((1.0 - s.p) / dim as f64);
    let half = 0.5 * s.p;
    for &(i, j) in &[(0, 0), (0, dim - 1), (dim - 1, 0), (dim - 1, dim - 1)] {
        m[(i, j)] += c64(half, 0.0);
    }
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Bob's `J_z = (mu / 2) sum_i sigma_z^(i)` on `n` qubits (diagonal in the computational basis).
pub fn bob_jz(n: usize, mu: f64) -> Observable {
    let values: Vec<f64> = (0..1usize << n)
        .map(|idx| 0.5 * mu * (n as f64 - 2.0 * idx.count_ones() as f64))
        .collect();
    Observable::diagonal(&values)
}

fn split_dims(state: &DensityMatrix) -> Result<usize> {
    let dim = state.dim();
    if dim < 4 || !dim.is_power_of_two() {
        return Err(invalid(
            "state",
            format!("expected Alice's qubit plus at least one Bob qubit, got dimension {dim}"),
        ));
    }
    Ok(dim / 2)
}

fn setting_table(state: &DensityMatrix, setting: PauliSetting) -> Result<SettingTable> {
    let bob = split_dims(state)?;
    let rho = state.matrix();
    let mut outcomes = Vec::with_capacity(2);
    for (proj, label) in setting.projectors().iter().zip(["+", "-"]) {
        // Tr_A[(P x 1) rho (P x 1)] = sum_ij P_ji rho_(i,j) for a projector P.
        let mut block = CMatrix::zeros(bob, bob);
        for (i, row) in proj.iter().enumerate() {
            for (j, _) in row.iter().enumerate() {
                let w = proj[j][i];
                if w != 0.0 {
                    block += rho.view((i * bob, j * bob), (bob, bob)).scale(w);
                }
            }
        }
        let prob = block.trace().re;
        if prob < crate::assemblage::OUTCOME_PRUNE {
            continue;
        }
        let cond = DensityMatrix::from_matrix_unchecked(crate::linalg::hermitize(&block.unscale(prob)));
        outcomes.push(Outcome::new(label, prob, cond));
    }
    Ok(SettingTable::new(setting.label(), outcomes))
}

/// Bob's assemblage when Alice (first qubit) measures the given Pauli observable.
pub fn alice_pauli_assemblage(state: &DensityMatrix, setting: PauliSetting) -> Result<DiscreteAssemblage> {
    alice_assemblage(state, &[setting])
}

/// Assemblage with one table per listed setting, in the given order.
pub fn alice_assemblage(state: &DensityMatrix, settings: &[PauliSetting]) -> Result<DiscreteAssemblage> {
    let bob = split_dims(state)?;
    let tables = settings
        .iter()
        .map(|&s| setting_table(state, s))
        .collect::<Result<Vec<_>>>()?;
    DiscreteAssemblage::new(bob, tables)
}

/// Closed-form conditional energy variance: `mu^2 (1 - p) N / 4`.
pub fn ghz_energy_variance_bound(s: &GhzScenario) -> f64 {
    s.mu * s.mu * (1.0 - s.p) * s.n as f64 / 4.0
}

/// Exact `sigma_z`-setting conditional variance of `J_z`.
///
/// Bob's conditional state is `p |0..0><0..0| + (1 - p) 1 / 2^N`, whose variance
/// includes the spread between the two mixture components:
/// `mu^2 (1 - p) N (1 + p N) / 4`.
pub fn ghz_exact_energy_variance(s: &GhzScenario) -> f64 {
    let n = s.n as f64;
    s.mu * s.mu * (1.0 - s.p) * n * (1.0 + s.p * n) / 4.0
}

/// Closed form for `hbar^2 <v^2>_{B|A}`: `mu^2 p^2 N^2 / (p + 2 (1 - p) / 2^N)`.
///
/// Numerically this coincides with the canonical conditional QFI `F_{B|A}`
/// (times `hbar^2`), i.e. it is four times the canonical `hbar^2 F / 4`.
pub fn ghz_conditional_qfi_closed(s: &GhzScenario) -> f64 {
    let n = s.n as f64;
    let denom = s.p + 2.0 * (1.0 - s.p) / 2f64.powi(s.n as i32);
    s.mu * s.mu * s.p * s.p * n * n / denom
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzQfiComparison {
    /// `ghz_conditional_qfi_closed`.
    pub closed_v2: f64,
    /// Dense `F_{B|A}[J_z]`, maximized over both settings.
    pub dense_qfi: f64,
    /// Canonical `hbar^2 <v^2>_{B|A} = hbar^2 F_{B|A} / 4`.
    pub dense_v2: f64,
    /// `closed_v2 / dense_v2`.
    pub ratio: f64,
}

pub fn ghz_qfi_comparison(s: &GhzScenario) -> Result<GhzQfiComparison> {
    let rho = noisy_ghz(s)?;
    let asm = alice_assemblage(&rho, &[PauliSetting::Z, PauliSetting::X])?;
    let dense_qfi = conditional_qfi(&asm, &bob_jz(s.n, s.mu), &s.constants())?.value;
    let closed_v2 = ghz_conditional_qfi_closed(s);
    let dense_v2 = s.hbar * s.hbar * dense_qfi / 4.0;
    Ok(GhzQfiComparison {
        closed_v2,
        dense_qfi,
        dense_v2,
        ratio: closed_v2 / dense_v2,
    })
}

/// Dense conditional variance of `J_z`, minimized over Alice's `sigma_z` and `sigma_x` settings.
pub fn ghz_dense_energy_variance(s: &GhzScenario) -> Result<f64> {
    let rho = noisy_ghz(s)?;
    let asm = alice_assemblage(&rho, &[PauliSetting::Z, PauliSetting::X])?;
    Ok(conditional_variance(&asm, &bob_jz(s.n, s.mu))?.value)
}

fn check_n(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(invalid("n", "Bob needs at least one qubit"));
    }
    Ok(n as f64)
}

/// Closed-form critical visibility
/// `(2^N + sqrt(2^N (2^N + 32 N)) - 4) / (8 2^N N + 2 2^N - 4)`.
pub fn critical_visibility(n: usize) -> Result<f64> {
    let nf = check_n(n)?;
    let two_n = 2f64.powi(n as i32);
    Ok((two_n + (two_n * (two_n + 32.0 * nf)).sqrt() - 4.0) / (8.0 * two_n * nf + 2.0 * two_n - 4.0))
}

/// Residual of `4 p^2 N = (1 - p)(p + 2^{1-N}(1 - p))`, the crossing of the
/// closed-form energy-variance bound and the closed-form conditional speed.
pub fn critical_visibility_residual(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let c = 2f64.powi(1 - n as i32);
    4.0 * p * p * nf - (1.0 - p) * (p + c * (1.0 - p))
}

/// Visibility above which the canonical conditional QFI exceeds
/// `4 (Delta J_z)^2_{B|A} / hbar^2`, using the exact conditional variance.
pub fn canonical_critical_visibility(n: usize) -> Result<f64> {
    let nf = check_n(n)?;
    let c = 2f64.powi(1 - n as i32);
    let excess = |p: f64| nf * nf * p * p / (p + c * (1.0 - p)) - (1.0 - p) * nf * (1.0 + p * nf);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form time bound `(hbar / mu) p sqrt(N / ((2^{1-N}(1-p) + p)(1 - p + N(1-p)p)))`.
///
/// Returns `+inf` at `p = 1`: the steering condition is then violated for any finite time.
pub fn ghz_time_bound(s: &GhzScenario) -> f64 {
    if s.p >= 1.0 {
        return f64::INFINITY;
    }
    let n = s.n as f64;
    let c = 2f64.powi(1 - s.n as i32);
    let denom = (c * (1.0 - s.p) + s.p) * (1.0 - s.p + n * (1.0 - s.p) * s.p);
    s.hbar / s.mu * s.p * (n / denom).sqrt()
}

/// Dense evaluation of the time-integrated geometric criterion after Bob evolves
/// every conditional state for `dt` under `J_z`.
pub fn ghz_geometric_witness(s: &GhzScenario, dt: f64) -> Result<WitnessReport> {
    s.check_dense()?;
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    let c = s.constants();
    let rho = noisy_ghz(s)?;
    let asm = alice_assemblage(&rho, &[PauliSetting::Z, PauliSetting::X])?;
    let h = bob_jz(s.n, s.mu);
    let evolved = evolve_assemblage(&asm, &h, dt, &c)?;
    let mut report = geometric_time_bound(&asm, &evolved, &h, dt, &c)?;
    report.criterion = "ghz-geometric".into();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_visibility_is_maximally_mixed() {
        let s = GhzScenario::natural(2, 0.0).unwrap();
        let rho = noisy_ghz(&s).unwrap();
        for v in rho.eigenvalues() {
            assert!((v - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_visibility_single_bob_qubit_is_bell_state() {
        let rho = noisy_ghz(&GhzScenario::natural(1, 1.0).unwrap()).unwrap();
        let m = rho.matrix();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((m[(i, j)].re - 0.5).abs() < 1e-15);
        }
        assert!((m[(1, 1)].re).abs() < 1e-15);
    }

    #[test]
    fn size_guard() {
        let s = GhzScenario::natural(MAX_DENSE_QUBITS, 0.5).unwrap();
        assert!(matches!(noisy_ghz(&s), Err(Error::TooLarge { .. })));
        assert!(matches!(ghz_geometric_witness(&s, 0.1), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn z_outcomes_are_equiprobable() {
        for n in 1..=4 {
            for p in [0.0, 0.3, 1.0] {
                let rho = noisy_ghz(&GhzScenario::natural(n, p).unwrap()).unwrap();
                let asm = alice_pauli_assemblage(&rho, PauliSetting::Z).unwrap();
                for o in &asm.settings()[0].outcomes {
                    assert!((o.probability - 0.5).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn x_setting_of_bell_state_gives_plus_minus() {
        let rho = noisy_ghz(&GhzScenario::natural(1, 1.0).unwrap()).unwrap();
        let asm = alice_pauli_assemblage(&rho, PauliSetting::X).unwrap();
        let out = &asm.settings()[0].outcomes;
        let plus = out[0].state.matrix();
        let minus = out[1].state.matrix();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((plus[(i, j)].re - 0.5).abs() < 1e-15);
            let sign = if i == j { 1.0 } else { -1.0 };
            assert!((minus[(i, j)].re - 0.5 * sign).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((critical_visibility(1).unwrap() - (17f64.sqrt() - 1.0) / 8.0).abs() < 1e-15);
        assert!(critical_visibility(0).is_err());
        let s = GhzScenario::natural(1, 0.5).unwrap();
        assert!((ghz_time_bound(&s) - 0.5 / 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(ghz_time_bound(&GhzScenario::natural(3, 1.0).unwrap()), f64::INFINITY);
        assert_eq!(ghz_time_bound(&GhzScenario::natural(3, 0.0).unwrap()), 0.0);
        assert_eq!(ghz_conditional_qfi_closed(&GhzScenario::natural(2, 1.0).unwrap()), 4.0);
        assert_eq!(ghz_conditional_qfi_closed(&GhzScenario::natural(2, 0.0).unwrap()), 0.0);
        assert_eq!(ghz_energy_variance_bound(&GhzScenario::natural(4, 0.0).unwrap()), 1.0);
        assert_eq!(ghz_energy_variance_bound(&GhzScenario::natural(4, 1.0).unwrap()), 0.0);
    }

    #[test]
    fn jz_spectrum() {
        let jz = bob_jz(2, 2.0);
        let d: Vec<f64> = (0..4).map(|i| jz.matrix()[(i, i)].re).collect();
        assert_eq!(d, vec![2.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn rejects_bad_scenarios() {
        assert!(GhzScenario::new(0, 0.5, 1.0, 1.0).is_err());
        assert!(GhzScenario::new(1, 1.5, 1.0, 1.0).is_err());
        assert!(GhzScenario::new(1, 0.5, 0.0, 1.0).is_err());
    }
}
