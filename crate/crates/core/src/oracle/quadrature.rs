use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};

pub const MIN_ORDER: usize = 20;
pub const DEFAULT_ORDER: usize = 40;
/// Largest order reached by adaptive doubling; beyond this the Hermite recurrence overflows.
pub const MAX_ORDER: usize = 320;

/// Gauss-Hermite rule for the standard normal weight `exp(-x^2/2) / sqrt(2 pi)`.
/// Weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
            return Err(invalid(
                "order",
                format!("must lie in [{MIN_ORDER}, {MAX_ORDER}], got {order}"),
            ));
        }
        let (x, w) = physicists_rule(order)?;
        let scale = std::f64::consts::PI.sqrt();
        Ok(Self {
            nodes: x.iter().map(|v| v * std::f64::consts::SQRT_2).collect(),
            weights: w.iter().map(|v| v / scale).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(X)]` for `X ~ N(0, 1)`.
    pub fn integrate(&self, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(*x)?;
        }
        Ok(acc)
    }
}

/// Shared rules for the adaptive sequence 40, 80, 160, 320.
pub(crate) fn cached_rule(order: usize) -> &'static QuadratureRule {
    static RULES: [OnceLock<QuadratureRule>; 4] = [const { OnceLock::new() }; 4];
    let slot = match order {
        40 => 0,
        80 => 1,
        160 => 2,
        320 => 3,
        _ => unreachable!("no cached rule of order {order}"),
    };
    RULES[slot].get_or_init(|| QuadratureRule::gauss_hermite(order).expect("valid order"))
}

/// Doubles the order from 40 until successive estimates agree to `rel_tol`.
pub fn integrate_adaptive(f: impl Fn(f64) -> Result<f64>, rel_tol: f64) -> Result<f64> {
    let mut order = DEFAULT_ORDER;
    let mut prev = cached_rule(order).integrate(&f)?;
    while order < MAX_ORDER {
        order *= 2;
        let next = cached_rule(order).integrate(&f)?;
        if (next - prev).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Numerical(format!(
        "quadrature did not converge to {rel_tol} by order {MAX_ORDER}"
    )))
}

/// Nodes and weights for `exp(-x^2)`: Jacobi-matrix eigenvalues as starting points,
/// polished by Newton iteration on the orthonormal recurrence, which also gives the weights.
fn physicists_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    guesses.sort_by(|a, b| b.total_cmp(a));

    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = guesses[i];
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !pp.is_finite() {
            return Err(Error::Numerical(format!(
                "Hermite root {i} of order {n} did not converge"
            )));
        }
        if n % 2 == 1 && i == n / 2 {
            z = 0.0;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    Ok((x, w))
}
