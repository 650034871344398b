//! Fourier coordinate basis for the periodic Sobolev space H_r([0, 2π]).
//!
//! Index layout (1-based): index 1 is the constant, indices 2m and 2m+1 are
//! the cosine and sine at frequency m. The L² basis functions
//!
//! ```text
//! φ₁(u) = 1/√(2π),   φ₂ₘ(u) = cos(mu)/√π,   φ₂ₘ₊₁(u) = sin(mu)/√π
//! ```
//!
//! are rescaled by the Sobolev weights w_k = (1 + m_k²)^r, where m_k is the
//! frequency of index k, so that ψ_k = φ_k/√w_k is orthonormal in H_r. All
//! linear algebra elsewhere in the crate works in ψ-coordinates, where the
//! H_r norm is the Euclidean norm and operator Schatten norms are matrix
//! singular-value norms.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Basis family. Only the Fourier basis on the circle is implemented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    FourierCircle,
}

/// Finite orthonormal-basis truncation of H_r([0, 2π]).
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSpec {
    dimension: usize,
    sobolev_order: f64,
    kind: BasisKind,
    weights: Vec<f64>,
}

impl BasisSpec {
    /// Fourier basis with `dimension` functions on H_r([0, 2π]).
    pub fn fourier_circle(dimension: usize, sobolev_order: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("basis dimension must be positive".into()));
        }
        if !sobolev_order.is_finite() || sobolev_order < 0.0 {
            return Err(Error::InvalidInput(format!(
                "Sobolev order must be a nonnegative real, got {sobolev_order}"
            )));
        }
        let weights = (1..=dimension)
            .map(|k| {
                let m = Self::frequency_of(k) as f64;
                (1.0 + m * m).powf(sobolev_order)
            })
            .collect();
        Ok(BasisSpec {
            dimension,
            sobolev_order,
            kind: BasisKind::FourierCircle,
            weights,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn sobolev_order(&self) -> f64 {
        self.sobolev_order
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Sobolev weight w_k, 1-based index.
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k - 1]
    }

    /// Frequency of basis index k: 0, 1, 1, 2, 2, …
    pub fn frequency_of(k: usize) -> usize {
        k / 2
    }

    /// Evaluate ψ_k(u) = φ_k(u)/√w_k, 1-based index.
    pub fn eval(&self, k: usize, u: f64) -> Result<f64> {
        if k == 0 || k > self.dimension {
            return Err(Error::InvalidInput(format!(
                "basis index {k} out of range 1..={}",
                self.dimension
            )));
        }
        let raw = if k == 1 {
            1.0 / (2.0 * PI).sqrt()
        } else {
            let m = Self::frequency_of(k) as f64;
            if k.is_multiple_of(2) {
                (m * u).cos() / PI.sqrt()
            } else {
                (m * u).sin() / PI.sqrt()
            }
        };
        Ok(raw / self.weights[k - 1].sqrt())
    }

    /// All ψ_k(u), k = 1..=dimension, as one row of a design matrix.
    pub fn eval_all(&self, u: f64) -> Vec<f64> {
        (1..=self.dimension)
            .map(|k| self.eval(k, u).expect("index in range"))
            .collect()
    }

    pub(crate) fn summary(&self) -> String {
        format!("J={} r={}", self.dimension, self.sobolev_order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_function_value() {
        let b = BasisSpec::fourier_circle(3, 0.0).unwrap();
        for u in [0.0, 1.0, 2.0 * PI] {
            assert_abs_diff_eq!(b.eval(1, u).unwrap(), 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn cosine_at_zero() {
        let b = BasisSpec::fourier_circle(3, 0.0).unwrap();
        assert_abs_diff_eq!(b.eval(2, 0.0).unwrap(), 1.0 / PI.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn cosine_at_zero_with_sobolev_weight() {
        // w₂ = (1 + 1²)¹ = 2
        let b = BasisSpec::fourier_circle(3, 1.0).unwrap();
        assert_abs_diff_eq!(
            b.eval(2, 0.0).unwrap(),
            1.0 / PI.sqrt() / 2f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn weights_start_at_one_and_grow_with_frequency() {
        let b = BasisSpec::fourier_circle(9, 1.5).unwrap();
        assert_eq!(b.weight(1), 1.0);
        for k in 2..=9 {
            assert!(b.weight(k) > 0.0);
            assert!(b.weight(k) >= b.weight(k - 1));
        }
        // paired sine/cosine share a weight
        assert_eq!(b.weight(4), b.weight(5));
    }

    #[test]
    fn out_of_range_index_rejected() {
        let b = BasisSpec::fourier_circle(3, 0.0).unwrap();
        assert!(b.eval(0, 0.0).is_err());
        assert!(b.eval(4, 0.0).is_err());
    }

    /// ψ_k must be orthonormal for the H_r inner product
    /// ⟨f, g⟩ = Σ_k (1 + m_k²)^r f̂_k ĝ_k, with f̂_k the L² Fourier
    /// coefficients. The coefficients are computed by the rectangle rule,
    /// which is exact for trigonometric polynomials below the grid's
    /// Nyquist frequency.
    #[test]
    fn sobolev_orthonormality_by_quadrature() {
        let j = 7;
        let r = 2.0;
        let b = BasisSpec::fourier_circle(j, r).unwrap();
        let b_l2 = BasisSpec::fourier_circle(j, 0.0).unwrap();
        let n_grid = 256;
        let h = 2.0 * PI / n_grid as f64;
        let grid: Vec<f64> = (0..n_grid).map(|i| i as f64 * h).collect();

        let fourier_coef = |f: &dyn Fn(f64) -> f64, k: usize| -> f64 {
            grid.iter().map(|&u| f(u) * b_l2.eval(k, u).unwrap() * h).sum()
        };

        for a in 1..=j {
            for c in 1..=j {
                let inner: f64 = (1..=j)
                    .map(|k| {
                        let m = BasisSpec::frequency_of(k) as f64;
                        let w = (1.0 + m * m).powf(r);
                        let fa = fourier_coef(&|u| b.eval(a, u).unwrap(), k);
                        let fc = fourier_coef(&|u| b.eval(c, u).unwrap(), k);
                        w * fa * fc
                    })
                    .sum();
                let expected = if a == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(inner, expected, epsilon = 1e-10);
            }
        }
    }
}
