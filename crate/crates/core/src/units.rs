use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Physical constants threaded through every bound. Natural units by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub hbar: f64,
    /// Particle mass.
    pub m: f64,
    /// Energy scale of the qubit Hamiltonian.
    pub mu: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self::NATURAL
    }
}

impl Constants {
    pub const NATURAL: Constants = Constants {
        hbar: 1.0,
        m: 1.0,
        mu: 1.0,
    };

    pub fn new(hbar: f64, m: f64, mu: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("m", m), ("mu", mu)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { hbar, m, mu })
    }

    pub fn is_natural(&self) -> bool {
        (self.hbar - 1.0).abs() <= 1e-12 && (self.m - 1.0).abs() <= 1e-12
    }
}
