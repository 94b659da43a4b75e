use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix};

use super::{DiscreteAssemblage, Outcome, SettingTable};

/// Outcomes rarer than this are dropped when building an assemblage from a model.
pub const OUTCOME_PRUNE: f64 = 1e-14;

const MODEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState {
    pub weight: f64,
    pub state: DensityMatrix,
}

/// A local-hidden-state ensemble `{p(lambda), sigma_lambda}` with response
/// function `p(a|X, lambda)`, stored as `response[setting][lambda][outcome]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LhsModel {
    hidden: Vec<HiddenState>,
    response: Vec<Vec<Vec<f64>>>,
}

impl LhsModel {
    pub fn new(hidden: Vec<HiddenState>, response: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let Some(first) = hidden.first() else {
            return Err(Error::InvalidProbabilities("no hidden states".into()));
        };
        let dim = first.state.dim();
        let mut total = 0.0;
        for h in &hidden {
            if h.state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.state.dim(),
                });
            }
            if !(h.weight >= 0.0) {
                return Err(Error::InvalidProbabilities(format!(
                    "negative hidden weight {}",
                    h.weight
                )));
            }
            total += h.weight;
        }
        if !((total - 1.0).abs() <= MODEL_TOL) {
            return Err(Error::InvalidProbabilities(format!("hidden weights sum to {total}")));
        }
        if response.is_empty() {
            return Err(Error::EmptyAssemblage);
        }
        let n_outcomes = response[0].first().map_or(0, Vec::len);
        for (x, per_setting) in response.iter().enumerate() {
            if per_setting.len() != hidden.len() {
                return Err(Error::DimensionMismatch {
                    expected: hidden.len(),
                    found: per_setting.len(),
                });
            }
            for (l, row) in per_setting.iter().enumerate() {
                if row.len() != n_outcomes || n_outcomes == 0 {
                    return Err(Error::DimensionMismatch {
                        expected: n_outcomes,
                        found: row.len(),
                    });
                }
                if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(Error::InvalidProbabilities(format!(
                        "response for setting {x}, lambda {l} outside [0, 1]"
                    )));
                }
                let s: f64 = row.iter().sum();
                if !((s - 1.0).abs() <= MODEL_TOL) {
                    return Err(Error::InvalidProbabilities(format!(
                        "response for setting {x}, lambda {l} sums to {s}"
                    )));
                }
            }
        }
        Ok(Self { hidden, response })
    }

    pub fn hidden(&self) -> &[HiddenState] {
        &self.hidden
    }

    pub fn response(&self) -> &[Vec<Vec<f64>>] {
        &self.response
    }

    pub fn dim(&self) -> usize {
        self.hidden[0].state.dim()
    }

    pub fn n_settings(&self) -> usize {
        self.response.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.response[0][0].len()
    }
}

/// `A(a, X) = sum_lambda p(lambda) p(a|X, lambda) sigma_lambda`, normalized per outcome.
pub fn assemblage_from_lhs(model: &LhsModel, settings: &[&str], outcomes: &[&str]) -> Result<DiscreteAssemblage> {
    if settings.len() != model.n_settings() {
        return Err(Error::DimensionMismatch {
            expected: model.n_settings(),
            found: settings.len(),
        });
    }
    if outcomes.len() != model.n_outcomes() {
        return Err(Error::DimensionMismatch {
            expected: model.n_outcomes(),
            found: outcomes.len(),
        });
    }
    let dim = model.dim();
    let mut tables = Vec::with_capacity(settings.len());
    for (x, label) in settings.iter().enumerate() {
        let mut rows = Vec::new();
        for (a, outcome) in outcomes.iter().enumerate() {
            let mut unnormalized = CMatrix::zeros(dim, dim);
            let mut prob = 0.0;
            for (l, h) in model.hidden.iter().enumerate() {
                let w = h.weight * model.response[x][l][a];
                prob += w;
                unnormalized += h.state.matrix().scale(w);
            }
            if prob < OUTCOME_PRUNE {
                continue;
            }
            let state = DensityMatrix::new(unnormalized.unscale(prob))?;
            rows.push(Outcome::new(*outcome, prob, state));
        }
        tables.push(SettingTable::new(*label, rows));
    }
    DiscreteAssemblage::new(dim, tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, CVector};

    fn ket(a: f64, b: f64) -> DensityMatrix {
        DensityMatrix::pure(&CVector::from_vec(vec![c64(a, 0.), c64(b, 0.)])).unwrap()
    }

    #[test]
    fn single_hidden_state_passes_through() {
        let sigma = ket(0.6, 0.8);
        let model = LhsModel::new(
            vec![HiddenState {
                weight: 1.0,
                state: sigma.clone(),
            }],
            vec![vec![vec![0.3, 0.7]], vec![vec![1.0, 0.0]]],
        )
        .unwrap();
        let asm = assemblage_from_lhs(&model, &["X", "Z"], &["+", "-"]).unwrap();
        for table in asm.settings() {
            for o in &table.outcomes {
                assert!((o.state.matrix() - sigma.matrix()).norm() < 1e-15);
            }
        }
        // the impossible outcome is pruned
        assert_eq!(asm.setting("Z").unwrap().outcomes.len(), 1);
    }

    #[test]
    fn deterministic_response_selects_hidden_states() {
        let up = ket(1.0, 0.0);
        let down = ket(0.0, 1.0);
        let model = LhsModel::new(
            vec![
                HiddenState {
                    weight: 0.25,
                    state: up.clone(),
                },
                HiddenState {
                    weight: 0.75,
                    state: down.clone(),
                },
            ],
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
        )
        .unwrap();
        let asm = assemblage_from_lhs(&model, &["X"], &["0", "1"]).unwrap();
        let out = &asm.settings()[0].outcomes;
        assert!((out[0].probability - 0.25).abs() < 1e-15);
        assert!((out[0].state.matrix() - up.matrix()).norm() < 1e-15);
        assert!((out[1].state.matrix() - down.matrix()).norm() < 1e-15);
    }

    #[test]
    fn rejects_invalid_models() {
        let s = ket(1.0, 0.0);
        let bad_weight = LhsModel::new(
            vec![HiddenState {
                weight: 0.9,
                state: s.clone(),
            }],
            vec![vec![vec![1.0]]],
        );
        assert!(matches!(bad_weight, Err(Error::InvalidProbabilities(_))));
        let bad_response = LhsModel::new(vec![HiddenState { weight: 1.0, state: s }], vec![vec![vec![0.6, 0.6]]]);
        assert!(matches!(bad_response, Err(Error::InvalidProbabilities(_))));
    }
}
