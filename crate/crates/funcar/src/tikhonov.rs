//! Tikhonov-regularized inversion of the covariance equation R₋₁ = R₀Φ.
//!
//! The regularized inverse is K_α = (R₀R₀ + αI)⁻¹R₀ and the estimator of
//! ρ* is Φ̂_α = K̂_α R̂₋₁, the unique minimizer of
//!
//! ```text
//! ‖R̂₋₁ − R̂₀Φ‖₂² + α‖Φ‖₂²   over Hilbert-Schmidt Φ.
//! ```
//!
//! The exact solution (for a positive definite R₀) is
//! ρ* = (R₀R₀)†R₀R₋₁, recovered here through the Moore-Penrose inverse,
//! and Φ_α → ρ* as α ↓ 0. Two deterministic facts are relied on
//! throughout and exercised in the tests: ‖(R₀² + αI)⁻¹‖_∞ ≤ 1/α,
//! ‖K_α‖_∞ ≤ 1/√α, and — under the source condition ρ* = R₀w with
//! ‖w‖_p ≤ M — the bias bound ‖Φ_α − ρ*‖_p ≤ √α·M.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimate::CovPair;
use crate::operator::{HilbertOperator, DEFAULT_PINV_TOL};

fn require_self_adjoint(op: &HilbertOperator, role: &str) -> Result<()> {
    if op.is_self_adjoint() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{role} must be self-adjoint")))
    }
}

fn require_positive(value: f64, role: &str) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{role} must be a positive real, got {value}"
        )))
    }
}

/// The resolvent (R₀² + αI)⁻¹, computed by a symmetric positive-definite
/// factorization (R₀² is PSD for self-adjoint R₀, so the system is SPD for
/// any α > 0; no explicit inverse is formed elsewhere in the crate).
pub fn resolvent(r0: &HilbertOperator, alpha: f64) -> Result<HilbertOperator> {
    require_self_adjoint(r0, "covariance operator")?;
    require_positive(alpha, "regularization weight")?;
    let j = r0.basis().dimension();
    let system = r0.matrix() * r0.matrix() + DMatrix::identity(j, j) * alpha;
    let chol = system
        .cholesky()
        .ok_or_else(|| Error::Numerical("resolvent system not positive definite".into()))?;
    let inv = chol.solve(&DMatrix::identity(j, j));
    HilbertOperator::self_adjoint_from_matrix(r0.basis().clone(), (&inv + inv.transpose()) * 0.5)
}

/// The regularized inverse K_α = (R₀R₀ + αI)⁻¹R₀.
pub fn k_alpha(r0: &HilbertOperator, alpha: f64) -> Result<HilbertOperator> {
    require_self_adjoint(r0, "covariance operator")?;
    require_positive(alpha, "regularization weight")?;
    let j = r0.basis().dimension();
    let system = r0.matrix() * r0.matrix() + DMatrix::identity(j, j) * alpha;
    let chol = system
        .cholesky()
        .ok_or_else(|| Error::Numerical("regularized system not positive definite".into()))?;
    let k = chol.solve(r0.matrix());
    // (R₀² + αI)⁻¹ commutes with R₀, so K_α is self-adjoint; symmetrize the
    // factorization roundoff away.
    HilbertOperator::self_adjoint_from_matrix(r0.basis().clone(), (&k + k.transpose()) * 0.5)
}

/// A Tikhonov estimate of the autocorrelation: Φ̂_α estimates ρ*, its
/// adjoint estimates ρ.
#[derive(Clone, Debug)]
pub struct TikhonovEstimate {
    phi_hat: HilbertOperator,
    rho_hat: HilbertOperator,
    alpha: f64,
    source: CovPair,
}

impl TikhonovEstimate {
    /// Estimate of ρ*.
    pub fn phi_hat(&self) -> &HilbertOperator {
        &self.phi_hat
    }

    /// Estimate of ρ; exactly the adjoint of [`TikhonovEstimate::phi_hat`].
    pub fn rho_hat(&self) -> &HilbertOperator {
        &self.rho_hat
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The covariance estimates the estimator was built from.
    pub fn source(&self) -> &CovPair {
        &self.source
    }
}

/// Φ̂_α = K̂_α R̂₋₁ with R̂₋₁ = R̂₁*, the unique minimizer of the ridge
/// functional above, together with ρ̂ = Φ̂_α*.
pub fn estimate_rho(cov: &CovPair, alpha: f64) -> Result<TikhonovEstimate> {
    require_positive(alpha, "regularization weight")?;
    let k = k_alpha(cov.r0_hat(), alpha)?;
    let phi_hat = k.compose(&cov.r_minus1_hat())?;
    let rho_hat = phi_hat.adjoint();
    Ok(TikhonovEstimate {
        phi_hat,
        rho_hat,
        alpha,
        source: cov.clone(),
    })
}

/// The exact (unregularized) solution Φ = (R₀R₀)†R₀R₋₁ of R₋₁ = R₀Φ,
/// with the reported equation residual ‖R₋₁ − R₀Φ‖₂. For a positive
/// definite R₀ this is ρ*; rank deficiency surfaces through the residual.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub phi: HilbertOperator,
    pub residual: f64,
}

/// Solve R₋₁ = R₀Φ by the Moore-Penrose route with relative singular-value
/// cutoff `tol`.
pub fn oracle_rho_star(
    r0: &HilbertOperator,
    r1: &HilbertOperator,
    tol: f64,
) -> Result<ExactSolution> {
    require_self_adjoint(r0, "covariance operator")?;
    let r_minus1 = r1.adjoint();
    let r0_sq = r0.compose(r0)?;
    let pinv = r0_sq.pseudo_inverse(tol)?;
    let phi = pinv.compose(r0)?.compose(&r_minus1)?;
    let residual = r_minus1.sub(&r0.compose(&phi)?)?.hs_norm();
    Ok(ExactSolution { phi, residual })
}

/// Result of checking the source condition ρ* = R₀w, ‖w‖_p ≤ M.
#[derive(Clone, Debug)]
pub struct SourceCheck {
    /// The candidate source element w = R₀†ρ*.
    pub source_element: HilbertOperator,
    /// Schatten index the norm was measured in.
    pub p: f64,
    /// ‖w‖_p — the constant M entering the bias bound √α·M.
    pub source_norm: f64,
    /// Equation residual ‖ρ* − R₀w‖₂.
    pub residual: f64,
    /// Residual tolerance the verdict used.
    pub tolerance: f64,
    /// Whether ρ* lies in the range of R₀ at the given tolerance.
    pub satisfied: bool,
}

/// Check the source condition for a covariance `r0` and autocorrelation
/// `rho` at Schatten index `p`. `tol` is the residual tolerance; when
/// `None` it defaults to 1e-8·‖ρ*‖₂ (relative, since the condition is an
/// exact-arithmetic statement).
pub fn source_condition_check(
    r0: &HilbertOperator,
    rho: &HilbertOperator,
    p: f64,
    tol: Option<f64>,
) -> Result<SourceCheck> {
    require_self_adjoint(r0, "covariance operator")?;
    let rho_star = rho.adjoint();
    let tolerance = match tol {
        Some(t) => {
            require_positive(t, "residual tolerance")?;
            t
        }
        None => 1e-8 * rho_star.hs_norm().max(f64::MIN_POSITIVE),
    };
    let source_element = r0.pseudo_inverse(DEFAULT_PINV_TOL)?.compose(&rho_star)?;
    let residual = rho_star.sub(&r0.compose(&source_element)?)?.hs_norm();
    let source_norm = source_element.schatten_norm(p)?;
    Ok(SourceCheck {
        satisfied: residual <= tolerance && source_norm.is_finite(),
        source_element,
        p,
        source_norm,
        residual,
        tolerance,
    })
}

/// The tuned regularization weight α = c·γ^{1/4} for a plug-in rate γ.
pub fn choose_alpha(gamma_n: f64, c: f64) -> Result<f64> {
    require_positive(gamma_n, "plug-in rate γ")?;
    require_positive(c, "tuning constant c")?;
    Ok(c * gamma_n.powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arh::{random_orthogonal, ArhModel};
    use crate::basis::BasisSpec;
    use crate::estimate::{complete_cov_pair, CovMeta, Regime};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::sync::Arc;

    fn basis(j: usize) -> Arc<BasisSpec> {
        Arc::new(BasisSpec::fourier_circle(j, 0.0).unwrap())
    }

    fn cov_pair(r0: HilbertOperator, r1: HilbertOperator) -> CovPair {
        CovPair::new(
            r0,
            r1,
            CovMeta {
                regime: Regime::Complete,
                n: 0,
                m: None,
                ridge: None,
                noise_var: None,
                warnings: Vec::new(),
            },
        )
        .unwrap()
    }

    fn random_symmetric(j: usize, rng: &mut ChaCha12Rng) -> HilbertOperator {
        let g = DMatrix::from_fn(j, j, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let sym = (&g + g.transpose()) * 0.5;
        HilbertOperator::self_adjoint_from_matrix(basis(j), sym).unwrap()
    }

    #[test]
    fn k_alpha_of_identity() {
        let k = k_alpha(&HilbertOperator::identity(basis(3)), 1.0).unwrap();
        assert!((k.matrix() - DMatrix::<f64>::identity(3, 3) * 0.5).amax() < 1e-14);
    }

    #[test]
    fn k_alpha_diagonal_closed_form() {
        // λ/(λ² + α) with λ = 2, 1 and α = 2 gives 1/3 twice.
        let r0 = HilbertOperator::diagonal(basis(2), &[2.0, 1.0]).unwrap();
        let k = k_alpha(&r0, 2.0).unwrap();
        assert_abs_diff_eq!(k.matrix()[(0, 0)], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.matrix()[(1, 1)], 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn k_alpha_norm_bound_on_indefinite_inputs() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let r0 = random_symmetric(6, &mut rng);
            let alpha = 0.01;
            let k = k_alpha(&r0, alpha).unwrap();
            let bound = 1.0 / alpha.sqrt();
            assert!(k.operator_norm().unwrap() <= bound * (1.0 + 1e-10));
        }
    }

    #[test]
    fn resolvent_norm_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..50 {
            let r0 = random_symmetric(5, &mut rng);
            for alpha in [1e-4, 1e-2, 1.0] {
                let res = resolvent(&r0, alpha).unwrap();
                assert!(res.operator_norm().unwrap() <= (1.0 / alpha) * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn estimate_rho_diagonal_closed_form() {
        let lambdas = [1.0, 0.5];
        let ratios = [0.8, 0.4];
        let r0 = HilbertOperator::diagonal(basis(2), &lambdas).unwrap();
        let r1 = HilbertOperator::diagonal(
            basis(2),
            &[ratios[0] * lambdas[0], ratios[1] * lambdas[1]],
        )
        .unwrap();
        for alpha in [0.5, 1e-2, 1e-6] {
            let est = estimate_rho(&cov_pair(r0.clone(), r1.clone()), alpha).unwrap();
            for (k, (&l, &ratio)) in lambdas.iter().zip(&ratios).enumerate() {
                let expected = ratio * l * l / (l * l + alpha);
                assert_abs_diff_eq!(est.rho_hat().matrix()[(k, k)], expected, epsilon = 1e-12);
            }
        }
        // small α recovers the ratios
        let est = estimate_rho(&cov_pair(r0, r1), 1e-6).unwrap();
        assert!((est.rho_hat().matrix()[(0, 0)] - 0.8).abs() < 1e-4);
        assert!((est.rho_hat().matrix()[(1, 1)] - 0.4).abs() < 1e-4);
    }

    #[test]
    fn zero_cross_covariance_gives_zero_estimate() {
        let r0 = HilbertOperator::diagonal(basis(3), &[1.0, 0.5, 0.2]).unwrap();
        let r1 = HilbertOperator::zero(basis(3));
        for alpha in [1.0, 1e-3, 1e-7] {
            let est = estimate_rho(&cov_pair(r0.clone(), r1.clone()), alpha).unwrap();
            assert_eq!(est.rho_hat().hs_norm(), 0.0);
        }
    }

    #[test]
    fn rho_hat_is_exactly_the_adjoint_of_phi_hat() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let r0 = random_symmetric(4, &mut rng);
        let r1 = HilbertOperator::from_matrix(
            basis(4),
            DMatrix::from_fn(4, 4, |_, _| rng.random::<f64>() - 0.5),
        )
        .unwrap();
        let est = estimate_rho(&cov_pair(r0, r1), 0.1).unwrap();
        assert_eq!(
            est.rho_hat().matrix(),
            &est.phi_hat().matrix().transpose()
        );
        // Schatten norms are adjoint-invariant, so both estimate errors agree.
        for p in [1.0, 2.0, f64::INFINITY] {
            let a = est.phi_hat().schatten_norm(p).unwrap();
            let b = est.rho_hat().schatten_norm(p).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn oracle_recovers_diagonal_autocorrelation() {
        let lambdas = [1.0, 0.5, 0.25];
        let ratios = [0.6, 0.3, 0.15];
        let r0 = HilbertOperator::diagonal(basis(3), &lambdas).unwrap();
        let r1 = HilbertOperator::diagonal(
            basis(3),
            &[
                ratios[0] * lambdas[0],
                ratios[1] * lambdas[1],
                ratios[2] * lambdas[2],
            ],
        )
        .unwrap();
        let sol = oracle_rho_star(&r0, &r1, DEFAULT_PINV_TOL).unwrap();
        for (k, &ratio) in ratios.iter().enumerate() {
            assert_abs_diff_eq!(sol.phi.matrix()[(k, k)], ratio, epsilon = 1e-10);
        }
        assert!(sol.residual < 1e-10);
    }

    #[test]
    fn oracle_with_zero_cross_covariance_is_zero() {
        let r0 = HilbertOperator::diagonal(basis(2), &[1.0, 0.5]).unwrap();
        let sol = oracle_rho_star(&r0, &HilbertOperator::zero(basis(2)), DEFAULT_PINV_TOL).unwrap();
        assert_eq!(sol.phi.hs_norm(), 0.0);
    }

    #[test]
    fn oracle_round_trip_on_a_stationary_model() {
        let b = basis(6);
        let lambdas: Vec<f64> = (1..=6).map(|k| (k as f64).powi(-2)).collect();
        let mus: Vec<f64> = lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| 0.8 * l / (i + 1) as f64)
            .collect();
        let q = random_orthogonal(b.clone(), 3);
        let model = ArhModel::from_rotated_spectra(b, &lambdas, &mus, Some(&q)).unwrap();
        let sol = oracle_rho_star(
            model.stationary_cov(),
            &model.lag_cov(1),
            DEFAULT_PINV_TOL,
        )
        .unwrap();
        let rho_star = model.rho().adjoint();
        assert!(sol.phi.sub(&rho_star).unwrap().hs_norm() < 1e-6);
    }

    #[test]
    fn regularized_solution_converges_to_oracle_as_alpha_vanishes() {
        let b = basis(5);
        let lambdas: Vec<f64> = (1..=5).map(|k| (k as f64).powi(-2)).collect();
        let mus: Vec<f64> = lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| 0.7 * l / (i + 1) as f64)
            .collect();
        let model = ArhModel::from_spectra(b, &lambdas, &mus).unwrap();
        let r0 = model.stationary_cov();
        let r_minus1 = model.lag_cov(1).adjoint();
        let rho_star = model.rho().adjoint();
        let mut last = f64::INFINITY;
        for exp in 1..=8 {
            let alpha = 10f64.powi(-exp);
            let phi_alpha = k_alpha(r0, alpha).unwrap().compose(&r_minus1).unwrap();
            let err = phi_alpha.sub(&rho_star).unwrap().hs_norm();
            assert!(err <= last * (1.0 + 1e-9), "error increased at α = {alpha}");
            last = err;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn source_check_identity_case() {
        let r0 = HilbertOperator::diagonal(basis(4), &[1.0, 0.5, 0.25, 0.125]).unwrap();
        let check = source_condition_check(&r0, &r0, f64::INFINITY, None).unwrap();
        assert!(check.satisfied);
        assert_abs_diff_eq!(check.source_norm, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn source_check_summable_ratio_case() {
        let j = 30;
        let lambdas: Vec<f64> = (1..=j).map(|k| (k as f64).powi(-2)).collect();
        let mus: Vec<f64> = (1..=j).map(|k| (k as f64).powi(-3)).collect();
        let r0 = HilbertOperator::diagonal(basis(j), &lambdas).unwrap();
        let rho = HilbertOperator::diagonal(basis(j), &mus).unwrap();
        let check = source_condition_check(&r0, &rho, 2.0, None).unwrap();
        let partial_sum: f64 = (1..=j).map(|k| (k as f64).powi(-2)).sum();
        assert!(check.satisfied);
        assert_abs_diff_eq!(check.source_norm.powi(2), partial_sum, epsilon = 1e-6);
    }

    #[test]
    fn source_check_flags_unbounded_ratio() {
        let norm_at = |j: usize| {
            let lambdas: Vec<f64> = (1..=j).map(|k| (k as f64).powi(-2)).collect();
            let mus: Vec<f64> = (1..=j).map(|k| 1.0 / k as f64).collect();
            let r0 = HilbertOperator::diagonal(basis(j), &lambdas).unwrap();
            let rho = HilbertOperator::diagonal(basis(j), &mus).unwrap();
            source_condition_check(&r0, &rho, f64::INFINITY, None)
                .unwrap()
                .source_norm
        };
        // w = diag(j): the ∞-norm grows linearly with the truncation level,
        // violating any fixed budget M.
        assert_abs_diff_eq!(norm_at(30), 30.0, epsilon = 1e-6);
        assert_abs_diff_eq!(norm_at(60), 60.0, epsilon = 1e-6);
    }

    #[test]
    fn deterministic_source_bound_holds_on_a_rotated_model() {
        let b = basis(8);
        let lambdas: Vec<f64> = (1..=8).map(|k| (k as f64).powi(-2)).collect();
        let mus: Vec<f64> = lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| 0.8 * l / (i + 1) as f64)
            .collect();
        let q = random_orthogonal(b.clone(), 12);
        let model = ArhModel::from_rotated_spectra(b, &lambdas, &mus, Some(&q)).unwrap();
        let r0 = model.stationary_cov();
        let r_minus1 = model.lag_cov(1).adjoint();
        let rho_star = model.rho().adjoint();
        for p in [1.0, 2.0, f64::INFINITY] {
            let m_bound = source_condition_check(r0, model.rho(), p, None)
                .unwrap()
                .source_norm;
            for exp in 1..=6 {
                let alpha = 10f64.powi(-exp);
                let phi_alpha = k_alpha(r0, alpha).unwrap().compose(&r_minus1).unwrap();
                let err = phi_alpha.sub(&rho_star).unwrap().schatten_norm(p).unwrap();
                let bound = alpha.sqrt() * m_bound;
                assert!(
                    err <= bound + 1e-10 * bound.max(1.0),
                    "p={p} α={alpha}: {err} > {bound}"
                );
            }
        }
    }

    #[test]
    fn population_plug_in_recovers_rho() {
        // Bridge: exact covariances from the model into the estimator chain.
        let model = ArhModel::from_spectra(
            basis(4),
            &[1.0, 0.25, 0.111, 0.0625],
            &[0.8, 0.4, 0.26, 0.2],
        )
        .unwrap();
        let pair = cov_pair(model.stationary_cov().clone(), model.lag_cov(1));
        let est = estimate_rho(&pair, 1e-8).unwrap();
        assert!(est.rho_hat().sub(model.rho()).unwrap().hs_norm() < 1e-4);
    }

    #[test]
    fn estimate_matches_complete_pipeline() {
        let model = ArhModel::from_spectra(
            basis(3),
            &[1.0, 0.5, 0.25],
            &[0.7, 0.4, 0.2],
        )
        .unwrap();
        let path = model.simulate(400, 0, 77).unwrap();
        let pair = complete_cov_pair(&path).unwrap();
        let est = estimate_rho(&pair, 0.05).unwrap();
        assert!(est.rho_hat().hs_norm().is_finite());
        assert_eq!(est.alpha(), 0.05);
        assert_eq!(est.source().meta().regime, Regime::Complete);
    }

    #[test]
    fn choose_alpha_fourth_root() {
        assert_abs_diff_eq!(choose_alpha(1e-4, 1.0).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(choose_alpha(1.0, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        // complete-data regime γ = 1/n at n = 4096
        assert_abs_diff_eq!(
            choose_alpha(1.0 / 4096.0, 1.0).unwrap(),
            0.125,
            epsilon = 1e-15
        );
    }

    #[test]
    fn invalid_parameters_rejected() {
        let r0 = HilbertOperator::identity(basis(2));
        assert!(k_alpha(&r0, 0.0).is_err());
        assert!(k_alpha(&r0, -1.0).is_err());
        assert!(choose_alpha(0.0, 1.0).is_err());
        assert!(choose_alpha(1.0, 0.0).is_err());
        let general = HilbertOperator::from_matrix(
            basis(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]),
        )
        .unwrap();
        assert!(k_alpha(&general, 0.1).is_err());
    }
}
