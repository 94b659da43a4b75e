//! Dense Hermitian linear algebra shared by the discrete-variable modules.
//!
//! Operators are stored as `DMatrix<Complex64>`. Every spectral routine goes
//! through [`eigh`], which wraps nalgebra's Hermitian eigensolver.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Constants;

pub type Complex64 = Complex<f64>;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex::new(re, im)
}

/// Largest entry of `|m - m†|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues and eigenvectors (as columns) of a Hermitian matrix.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Rebuilds `V f(Λ) V†` from an eigendecomposition.
pub fn spectral_map(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &lam) in values.iter().enumerate() {
        let fj = f(lam);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * vectors.adjoint()
}

/// Square root of a PSD matrix; negative eigenvalues from round-off are clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    spectral_map(&vals, &vecs, |l| c64(l.max(0.0).sqrt(), 0.0))
}

/// `exp(-i H t / hbar)`.
pub fn propagator(h: &CMatrix, t: f64, hbar: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    spectral_map(&vals, &vecs, |l| {
        let phase = -l * t / hbar;
        c64(phase.cos(), phase.sin())
    })
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `Re Tr(rho op)` without forming the product.
pub fn trace_product(rho: &CMatrix, op: &CMatrix) -> Complex64 {
    let n = rho.nrows();
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += rho[(i, j)] * op[(j, i)];
        }
    }
    acc
}

/// A Hermitian operator on Bob's Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
    units: String,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_units(matrix, "")
    }

    pub fn with_units(matrix: CMatrix, units: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let defect = hermitian_defect(&matrix);
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            matrix,
            units: units.into(),
        })
    }

    /// Diagonal observable with the given real spectrum.
    pub fn diagonal(values: &[f64]) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| c64(v, 0.0)));
        Self {
            matrix: CMatrix::from_diagonal(&d),
            units: String::new(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
            units: self.units.clone(),
        }
    }
}

/// A validated density matrix: Hermitian, PSD and unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let defect = hermitian_defect(&matrix);
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace().re;
        if !((tr - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::BadTrace(tr));
        }
        let (vals, _) = eigh(&matrix);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min >= -PSD_TOL) {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { matrix })
    }

    /// Normalizes `psi` and returns `|psi><psi|`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numerical("cannot normalize a zero vector".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self {
            matrix: &v * v.adjoint(),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim).unscale(dim as f64),
        }
    }

    /// Convex combination `sum_i w_i rho_i`. Weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::InvalidProbabilities("empty mixture".into()));
        };
        let dim = first.dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rho.dim(),
                });
            }
            if !(*w >= 0.0) {
                return Err(Error::InvalidProbabilities(format!("negative weight {w}")));
            }
            acc += rho.matrix.scale(*w);
        }
        Self::new(acc)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).0
    }

    pub fn expectation(&self, op: &Observable) -> Result<f64> {
        self.check_dim(op.dim())?;
        Ok(trace_product(&self.matrix, op.matrix()).re)
    }

    pub fn variance(&self, op: &Observable) -> Result<f64> {
        self.check_dim(op.dim())?;
        let m = op.matrix();
        let second = trace_product(&self.matrix, &(m * m)).re;
        let mean = trace_product(&self.matrix, m).re;
        Ok(second - mean * mean)
    }

    /// `U rho U†` with `U = exp(-i H t / hbar)`.
    pub fn evolve(&self, h: &Observable, t: f64, c: &Constants) -> Result<Self> {
        self.check_dim(h.dim())?;
        let u = propagator(h.matrix(), t, c.hbar);
        Ok(Self {
            matrix: hermitize(&(&u * &self.matrix * u.adjoint())),
        })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}

/// Serializable `{re, im}` form of a complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMatrix {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for RawMatrix {
    fn from(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<&RawMatrix> for CMatrix {
    type Error = Error;

    fn try_from(raw: &RawMatrix) -> Result<Self> {
        let n = raw.re.len();
        if raw.im.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: raw.im.len(),
            });
        }
        for row in raw.re.iter().chain(raw.im.iter()) {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        Ok(CMatrix::from_fn(n, n, |i, j| c64(raw.re[i][j], raw.im[i][j])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)])
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c64(1., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)]);
        assert!(matches!(Observable::new(m.clone()), Err(Error::NotHermitian(_))));
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rejects_bad_trace_and_negative_spectrum() {
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::BadTrace(_))));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.5, 0.), c64(-0.5, 0.)]));
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPsd(_))));
    }

    #[test]
    fn propagator_is_unitary_and_rotates() {
        let u = propagator(&sigma_x(), 0.7, 1.0);
        let id = &u * u.adjoint();
        assert!((id - CMatrix::identity(2, 2)).norm() < 1e-14);
        // exp(-i t sx) = cos t - i sin t sx
        assert!((u[(0, 0)].re - 0.7f64.cos()).abs() < 1e-14);
        assert!((u[(0, 1)].im + 0.7f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let rho = DensityMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.7, 0.), c64(0.1, 0.2), c64(0.1, -0.2), c64(0.3, 0.)],
        ))
        .unwrap();
        let s = psd_sqrt(rho.matrix());
        assert!((&s * &s - rho.matrix()).norm() < 1e-14);
    }

    #[test]
    fn variance_of_eigenstate_is_zero() {
        let rho = DensityMatrix::pure(&CVector::from_vec(vec![c64(1., 0.), c64(1., 0.)])).unwrap();
        let sx = Observable::new(sigma_x()).unwrap();
        assert!(rho.variance(&sx).unwrap().abs() < 1e-15);
        assert!((rho.expectation(&sx).unwrap() - 1.0).abs() < 1e-15);
    }
}
