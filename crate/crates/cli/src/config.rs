use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};

use qsl_steering::gaussian::CrossTermForm;
use qsl_steering::Constants;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    #[default]
    FreeParticle,
    Displacement,
    Ghz,
}

/// `steps` evenly spaced values from `min` to `max` inclusive; one step means `min` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn single(v: f64) -> Self {
        Self::new(v, v, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + span * i as f64 / last
                }
            })
            .collect()
    }

    fn validate(&self, name: &str, lo: f64, hi: f64, open_lo: bool) -> Result<(), CliError> {
        let bad = |why: String| Err(CliError::Config(format!("{name}: {why}")));
        if self.steps == 0 {
            return bad("steps must be >= 1".into());
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return bad("bounds must be finite".into());
        }
        if self.min > self.max {
            return bad(format!("empty range, min {} > max {}", self.min, self.max));
        }
        let below = if open_lo { self.min <= lo } else { self.min < lo };
        if below || self.max > hi {
            let open = if open_lo { "(" } else { "[" };
            return bad(format!("values must lie in {open}{lo}, {hi}]"));
        }
        Ok(())
    }
}

/// Inclusive range of Bob's qubit counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

impl CountRange {
    pub fn values(&self) -> Vec<usize> {
        (self.min..=self.max).collect()
    }
}

/// Sweep parameters. The JSON config file uses these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub z: Range,
    /// `R = dp0 / |p0|`.
    pub r: Range,
    /// Radians.
    pub theta: Range,
    pub k: Range,
    pub n: CountRange,
    pub p: Range,
    pub dt: f64,
    /// Mean momentum for the displacement protocol.
    pub p0: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub units: Constants,
    /// Skip dense GHZ columns, lifting the qubit limit.
    pub closed_form_only: bool,
    pub cross_term: CrossTermForm,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::FreeParticle,
            z: Range::new(0.01, 1.0, 100),
            r: Range::new(0.01, 2.0, 100),
            theta: Range::single(FRAC_PI_4),
            k: Range::single(0.0),
            n: CountRange { min: 1, max: 6 },
            p: Range::new(0.0, 1.0, 11),
            dt: 1.0,
            p0: 1.0,
            seed: 0,
            out: None,
            units: Constants::NATURAL,
            closed_form_only: false,
            cross_term: CrossTermForm::Symmetric,
        }
    }
}

impl SweepConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Checks the ranges used by the configured scenario.
    pub fn validate(&self) -> Result<(), CliError> {
        Constants::new(self.units.hbar, self.units.m, self.units.mu)
            .map_err(|e| CliError::Config(format!("units: {e}")))?;
        match self.scenario {
            Scenario::FreeParticle | Scenario::Displacement => {
                self.z.validate("z", 0.0, 1.0, true)?;
                self.r
                    .validate("r", 0.0, f64::MAX, self.scenario == Scenario::Displacement)?;
                self.theta.validate("theta", 0.0, FRAC_PI_2, false)?;
                self.k.validate("k", 0.0, f64::MAX, false)?;
                if self.scenario == Scenario::Displacement {
                    if !(self.dt > 0.0 && self.dt.is_finite()) {
                        return Err(CliError::Config(format!("dt: must be > 0, got {}", self.dt)));
                    }
                    if !(self.p0 != 0.0 && self.p0.is_finite()) {
                        return Err(CliError::Config(format!("p0: must be non-zero, got {}", self.p0)));
                    }
                }
            }
            Scenario::Ghz => {
                if self.n.min < 1 || self.n.min > self.n.max {
                    return Err(CliError::Config(format!(
                        "n: need 1 <= min <= max, got {}..{}",
                        self.n.min, self.n.max
                    )));
                }
                self.p.validate("p", 0.0, 1.0, false)?;
                if !(self.dt >= 0.0 && self.dt.is_finite()) {
                    return Err(CliError::Config(format!("dt: must be >= 0, got {}", self.dt)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values_hit_both_ends() {
        let v = Range::new(0.1, 0.3, 3).values();
        assert_eq!(v.len(), 3);
        assert_eq!((v[0], v[2]), (0.1, 0.3));
        assert_eq!(Range::single(0.7).values(), vec![0.7]);
    }

    #[test]
    fn empty_ranges_are_rejected() {
        let mut c = SweepConfig {
            z: Range::new(0.5, 0.4, 3),
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
        c.z = Range::new(0.1, 0.4, 0);
        assert!(c.validate().is_err());
        c.z = Range::new(0.0, 0.4, 3);
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_uses_snake_case_fields() {
        let text = r#"{"scenario": "ghz", "n": {"min": 2, "max": 3}, "closed_form_only": true,
                       "cross_term": "scaled_prefactor"}"#;
        let c: SweepConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.scenario, Scenario::Ghz);
        assert_eq!(c.n.values(), vec![2, 3]);
        assert!(c.closed_form_only);
        assert_eq!(c.cross_term, CrossTermForm::ScaledPrefactor);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"zz": 1}"#).is_err());
    }
}
