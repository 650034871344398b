//! Numerical verification of the deterministic operator bounds:
//! ‖(R₀² + αI)⁻¹‖_∞ ≤ 1/α, ‖K_α‖_∞ ≤ 1/√α for arbitrary self-adjoint R₀
//! (including indefinite ones), and the source bound ‖Φ_α − ρ*‖_p ≤ √α·M
//! for models whose source condition holds with constant M = ‖w‖_p.

use std::sync::Arc;

use funcar::{
    k_alpha, random_orthogonal, resolvent, source_condition_check, ArhModel, BasisSpec,
    HilbertOperator,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn main() -> funcar::Result<()> {
    let j = 10;
    let basis = Arc::new(BasisSpec::fourier_circle(j, 0.0)?);
    let mut rng = ChaCha12Rng::seed_from_u64(1);

    println!("resolvent and regularizer norms over 200 random self-adjoint operators:");
    for alpha in [1e-4, 1e-2, 1.0] {
        let mut worst_res: f64 = 0.0;
        let mut worst_k: f64 = 0.0;
        for _ in 0..200 {
            let g = DMatrix::from_fn(j, j, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let r0 = HilbertOperator::self_adjoint_from_matrix(
                basis.clone(),
                (&g + g.transpose()) * 0.5,
            )?;
            worst_res = worst_res.max(resolvent(&r0, alpha)?.operator_norm()?);
            worst_k = worst_k.max(k_alpha(&r0, alpha)?.operator_norm()?);
        }
        println!(
            "  α = {alpha:>6.0e}:  max ‖(R0²+αI)⁻¹‖ = {worst_res:>10.3e}  (bound {:.3e})",
            1.0 / alpha
        );
        println!(
            "               max ‖K_α‖        = {worst_k:>10.3e}  (bound {:.3e})",
            1.0 / alpha.sqrt()
        );
    }

    // Source bound on a rotated model: the bias of the population-level
    // regularized solution never exceeds √α·M.
    let lambdas: Vec<f64> = (1..=j).map(|k| (k as f64).powi(-2)).collect();
    let mus: Vec<f64> = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| 0.8 * l / (i + 1) as f64)
        .collect();
    let q = random_orthogonal(basis.clone(), 5);
    let model = ArhModel::from_rotated_spectra(basis, &lambdas, &mus, Some(&q))?;
    let r0 = model.stationary_cov();
    let r_minus1 = model.lag_cov(1).adjoint();
    let rho_star = model.rho().adjoint();

    println!("\nsource bound ‖Φ_α − ρ*‖_p ≤ √α·M with M = ‖w‖_p:");
    for p in [1.0, 2.0, f64::INFINITY] {
        let m = source_condition_check(r0, model.rho(), p, None)?.source_norm;
        println!("  p = {p}:  M = {m:.4}");
        for exp in 1..=6 {
            let alpha = 10f64.powi(-exp);
            let phi_alpha = k_alpha(r0, alpha)?.compose(&r_minus1)?;
            let err = phi_alpha.sub(&rho_star)?.schatten_norm(p)?;
            let bound = alpha.sqrt() * m;
            println!(
                "    α = {alpha:>6.0e}:  error {err:>10.3e}  ≤  bound {bound:>10.3e}  ({})",
                if err <= bound { "ok" } else { "VIOLATED" }
            );
        }
    }
    Ok(())
}
