//! Finite assemblages: for every setting `X` Alice may measure, the list of
//! outcomes `a` with their probabilities `p(a|X)` and Bob's conditional states.
//!
//! [`DiscreteAssemblage::new`] enforces normalization, state validity and
//! no-signaling, so every witness in [`witness`] can assume a well-formed table.

mod lhs;
mod witness;

pub use lhs::{assemblage_from_lhs, HiddenState, LhsModel, OUTCOME_PRUNE};
pub use witness::{
    conditional_displacement, conditional_mean_rate, conditional_mean_rate_at, conditional_qfi, conditional_qfi_at,
    conditional_variance, conditional_variance_at, displacement_time_bound, evolve_assemblage, geometric_time_bound,
    mt_witness, SettingValue, WitnessReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, RawMatrix};

pub const PROBABILITY_TOL: f64 = 1e-10;
pub const NO_SIGNALING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub probability: f64,
    pub state: DensityMatrix,
}

impl Outcome {
    pub fn new(label: impl Into<String>, probability: f64, state: DensityMatrix) -> Self {
        Self {
            label: label.into(),
            probability,
            state,
        }
    }
}

/// All outcomes of one measurement setting.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingTable {
    pub label: String,
    pub outcomes: Vec<Outcome>,
}

impl SettingTable {
    pub fn new(label: impl Into<String>, outcomes: Vec<Outcome>) -> Self {
        Self {
            label: label.into(),
            outcomes,
        }
    }

    /// `sum_a p(a|X) rho_{a|X}`.
    pub fn reduced_state(&self, dim: usize) -> CMatrix {
        self.outcomes.iter().fold(CMatrix::zeros(dim, dim), |acc, o| {
            acc + o.state.matrix().scale(o.probability)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAssemblage", into = "RawAssemblage")]
pub struct DiscreteAssemblage {
    dim: usize,
    settings: Vec<SettingTable>,
}

impl DiscreteAssemblage {
    pub fn new(dim: usize, settings: Vec<SettingTable>) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::EmptyAssemblage);
        }
        for (i, table) in settings.iter().enumerate() {
            if settings[..i].iter().any(|t| t.label == table.label) {
                return Err(Error::InvalidProbabilities(format!(
                    "duplicate setting label `{}`",
                    table.label
                )));
            }
            if table.outcomes.is_empty() {
                return Err(Error::InvalidProbabilities(format!(
                    "setting `{}` has no outcomes",
                    table.label
                )));
            }
            let mut total = 0.0;
            for o in &table.outcomes {
                if o.state.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: o.state.dim(),
                    });
                }
                if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&o.probability) {
                    return Err(Error::InvalidProbabilities(format!(
                        "p({}|{}) = {}",
                        o.label, table.label, o.probability
                    )));
                }
                total += o.probability;
            }
            if !((total - 1.0).abs() <= PROBABILITY_TOL) {
                return Err(Error::InvalidProbabilities(format!(
                    "outcomes of `{}` sum to {total}",
                    table.label
                )));
            }
        }
        let reference = settings[0].reduced_state(dim);
        for table in &settings[1..] {
            let diff = (table.reduced_state(dim) - &reference)
                .iter()
                .fold(0.0f64, |m, z| m.max(z.norm()));
            if !(diff <= NO_SIGNALING_TOL) {
                return Err(Error::Signaling(diff));
            }
        }
        Ok(Self { dim, settings })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn settings(&self) -> &[SettingTable] {
        &self.settings
    }

    pub fn setting(&self, label: &str) -> Result<&SettingTable> {
        self.settings
            .iter()
            .find(|t| t.label == label)
            .ok_or_else(|| Error::UnknownSetting(label.to_string()))
    }

    /// Bob's unconditioned state, identical for every setting.
    pub fn reduced_state(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.settings[0].reduced_state(self.dim))
    }

    /// A copy keeping only the listed settings, in their original order.
    pub fn restricted(&self, labels: &[&str]) -> Result<Self> {
        for l in labels {
            self.setting(l)?;
        }
        let settings = self
            .settings
            .iter()
            .filter(|t| labels.contains(&t.label.as_str()))
            .cloned()
            .collect();
        Self::new(self.dim, settings)
    }

    pub fn into_settings(self) -> Vec<SettingTable> {
        self.settings
    }
}

#[derive(Serialize, Deserialize)]
struct RawOutcome {
    label: String,
    probability: f64,
    state: RawMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawSetting {
    label: String,
    outcomes: Vec<RawOutcome>,
}

/// JSON form: `{dim, settings: [{label, outcomes: [{label, probability, state: {re, im}}]}]}`.
#[derive(Serialize, Deserialize)]
struct RawAssemblage {
    dim: usize,
    settings: Vec<RawSetting>,
}

impl From<DiscreteAssemblage> for RawAssemblage {
    fn from(asm: DiscreteAssemblage) -> Self {
        Self {
            dim: asm.dim,
            settings: asm
                .settings
                .iter()
                .map(|t| RawSetting {
                    label: t.label.clone(),
                    outcomes: t
                        .outcomes
                        .iter()
                        .map(|o| RawOutcome {
                            label: o.label.clone(),
                            probability: o.probability,
                            state: RawMatrix::from(o.state.matrix()),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<RawAssemblage> for DiscreteAssemblage {
    type Error = Error;

    fn try_from(raw: RawAssemblage) -> Result<Self> {
        let mut settings = Vec::with_capacity(raw.settings.len());
        for s in raw.settings {
            let mut outcomes = Vec::with_capacity(s.outcomes.len());
            for o in s.outcomes {
                let state = DensityMatrix::new(CMatrix::try_from(&o.state)?)?;
                outcomes.push(Outcome::new(o.label, o.probability, state));
            }
            settings.push(SettingTable::new(s.label, outcomes));
        }
        Self::new(raw.dim, settings)
    }
}
