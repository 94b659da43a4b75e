use crate::error::{Error, Result};
use crate::linalg::{c64, eigh, spectral_map, CMatrix, DensityMatrix, Observable};
use crate::units::Constants;

/// Eigenvalue pairs whose sum falls below this are outside the support and skipped.
pub const QFI_SUPPORT_CUTOFF: f64 = 1e-12;

/// Quantum Fisher information of `rho` for the time parameter of `exp(-i H t / hbar)`:
///
/// `F_Q = (2 / hbar^2) sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<i|H|j>|^2`.
///
/// Pure states give `4 Var(H) / hbar^2`.
pub fn spectral_qfi(rho: &DensityMatrix, h: &Observable, c: &Constants) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: h.dim(),
        });
    }
    let (vals, vecs) = eigh(rho.matrix());
    let lam: Vec<f64> = vals.iter().map(|l| l.max(0.0)).collect();
    let h_eig = vecs.adjoint() * h.matrix() * &vecs;
    let n = lam.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = lam[i] + lam[j];
            if s > QFI_SUPPORT_CUTOFF {
                let d = lam[i] - lam[j];
                acc += d * d / s * h_eig[(i, j)].norm_sqr();
            }
        }
    }
    Ok(2.0 * acc / (c.hbar * c.hbar))
}

/// Eigenvalues of a unit-trace state below this are treated as exact zeros when taking
/// square roots, so round-off in a rank-deficient spectrum does not leak into the fidelity.
pub const SQRT_SUPPORT_CUTOFF: f64 = 1e-14;

fn state_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    spectral_map(&vals, &vecs, |l| {
        c64(if l > SQRT_SUPPORT_CUTOFF { l.sqrt() } else { 0.0 }, 0.0)
    })
}

/// Uhlmann fidelity root `Tr sqrt(sqrt(rho) sigma sqrt(rho))`.
///
/// Evaluated as the trace norm of `sqrt(rho) sqrt(sigma)`, which avoids taking
/// square roots of round-off sized eigenvalues near the support boundary.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let product = state_sqrt(rho.matrix()) * state_sqrt(sigma.matrix());
    let f: f64 = product.singular_values().iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Bures angle `arccos F(rho, sigma)`, in `[0, pi/2]`.
pub fn bures_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(fidelity(rho, sigma)?.acos())
}
