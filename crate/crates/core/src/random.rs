//! Seeded generators for random states, observables, and LHS models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::assemblage::{HiddenState, LhsModel};
use crate::error::Result;
use crate::linalg::{c64, CMatrix, CVector, DensityMatrix, Observable};

/// Independent stream `stream` of the ChaCha generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Ginibre ensemble `G G^dag / Tr` with `G` of size `dim x rank`.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<DensityMatrix> {
    let g = gaussian_matrix(rng, dim, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr))
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    let v = gaussian_matrix(rng, dim, 1).column(0).into_owned();
    let n = v.norm();
    v.unscale(n)
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    let g = gaussian_matrix(rng, dim, dim);
    Observable::new((&g + g.adjoint()).scale(0.5)).expect("Hermitian by construction")
}

fn simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// LHS model with Dirichlet-distributed weights and responses and Ginibre hidden states
/// of random rank.
pub fn random_lhs_model<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n_hidden: usize,
    n_settings: usize,
    n_outcomes: usize,
) -> Result<LhsModel> {
    let weights = simplex(rng, n_hidden);
    let mut hidden = Vec::with_capacity(n_hidden);
    for w in weights {
        let rank = rng.random_range(1..=dim);
        hidden.push(HiddenState {
            weight: w,
            state: random_density_matrix(rng, dim, rank)?,
        });
    }
    let response = (0..n_settings)
        .map(|_| (0..n_hidden).map(|_| simplex(rng, n_outcomes)).collect())
        .collect();
    LhsModel::new(hidden, response)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(3, 0).random();
        let b: u64 = stream_rng(3, 0).random();
        let c: u64 = stream_rng(3, 1).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = stream_rng(11, 0);
        for dim in 2..=4 {
            let rho = random_density_matrix(&mut rng, dim, dim).unwrap();
            assert!(rho.eigenvalues().iter().all(|&l| l > 0.0));
            assert!((random_pure_state(&mut rng, dim).norm() - 1.0).abs() < 1e-14);
            let m = random_lhs_model(&mut rng, dim, 3, 2, 2).unwrap();
            assert_eq!(m.n_settings(), 2);
        }
    }
}
