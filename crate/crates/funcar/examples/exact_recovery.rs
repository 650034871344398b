//! The unregularized solution: Φ = (R₀R₀)†R₀R₋₁ recovers ρ* exactly from
//! the population covariances, and the regularized solutions Φ_α converge
//! to it monotonically as α ↓ 0.

use std::sync::Arc;

use funcar::{k_alpha, oracle_rho_star, random_orthogonal, ArhModel, BasisSpec, DEFAULT_PINV_TOL};

fn main() -> funcar::Result<()> {
    let j = 8;
    let basis = Arc::new(BasisSpec::fourier_circle(j, 0.0)?);
    let lambdas: Vec<f64> = (1..=j).map(|k| (k as f64).powi(-2)).collect();
    let mus: Vec<f64> = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| 0.8 * l / (i + 1) as f64)
        .collect();
    // Rotate so nothing is diagonal in the coordinate basis.
    let q = random_orthogonal(basis.clone(), 99);
    let model = ArhModel::from_rotated_spectra(basis, &lambdas, &mus, Some(&q))?;

    let r0 = model.stationary_cov();
    let r1 = model.lag_cov(1);
    let rho_star = model.rho().adjoint();

    let sol = oracle_rho_star(r0, &r1, DEFAULT_PINV_TOL)?;
    println!(
        "pseudo-inverse solution:  ‖Φ − ρ*‖₂ = {:.2e}   equation residual = {:.2e}",
        sol.phi.sub(&rho_star)?.hs_norm(),
        sol.residual
    );

    println!("\n     α      ‖Φ_α − ρ*‖₂");
    let r_minus1 = r1.adjoint();
    for exp in 1..=8 {
        let alpha = 10f64.powi(-exp);
        let phi_alpha = k_alpha(r0, alpha)?.compose(&r_minus1)?;
        let err = phi_alpha.sub(&rho_star)?.hs_norm();
        println!("  {alpha:>8.0e}   {err:.3e}");
    }
    Ok(())
}
