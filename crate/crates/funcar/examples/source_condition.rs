//! Source-condition diagnostics: when is ρ* = R₀w solvable with a bounded
//! w? Three spectra illustrate the regimes — the identity case, a
//! summable-ratio case, and a case whose source norm diverges with the
//! truncation level.

use std::sync::Arc;

use funcar::{source_condition_check, BasisSpec, HilbertOperator};

fn diag_ops(j: usize, lambda: impl Fn(f64) -> f64, mu: impl Fn(f64) -> f64) -> (HilbertOperator, HilbertOperator) {
    let basis = Arc::new(BasisSpec::fourier_circle(j, 0.0).unwrap());
    let l: Vec<f64> = (1..=j).map(|k| lambda(k as f64)).collect();
    let m: Vec<f64> = (1..=j).map(|k| mu(k as f64)).collect();
    (
        HilbertOperator::diagonal(basis.clone(), &l).unwrap(),
        HilbertOperator::diagonal(basis, &m).unwrap(),
    )
}

fn main() -> funcar::Result<()> {
    // ρ = R₀: the source element is the identity, ‖w‖_∞ = 1.
    let (r0, rho) = diag_ops(10, |k| k.powi(-1), |k| k.powi(-1));
    let check = source_condition_check(&r0, &rho, f64::INFINITY, None)?;
    println!(
        "identity case:      ‖w‖_∞ = {:.4}, residual = {:.1e}, satisfied = {}",
        check.source_norm, check.residual, check.satisfied
    );

    // λ_j = j⁻², μ_j = j⁻³: w = diag(1/j), ‖w‖₂² is a partial zeta sum.
    let (r0, rho) = diag_ops(30, |k| k.powi(-2), |k| k.powi(-3));
    let check = source_condition_check(&r0, &rho, 2.0, None)?;
    println!(
        "summable ratio:     ‖w‖₂² = {:.4} (Σ_(j≤30) j⁻² = {:.4}), satisfied = {}",
        check.source_norm.powi(2),
        (1..=30).map(|k| f64::powi(k as f64, -2)).sum::<f64>(),
        check.satisfied
    );

    // λ_j = j⁻², μ_j = j⁻¹: w = diag(j). The equation is solvable at any
    // fixed truncation, but the source norm grows without bound, so no
    // budget M works uniformly.
    println!("unbounded ratio:    ‖w‖_∞ by truncation level:");
    for j in [10, 20, 40, 80] {
        let (r0, rho) = diag_ops(j, |k| k.powi(-2), |k| k.powi(-1));
        let check = source_condition_check(&r0, &rho, f64::INFINITY, None)?;
        println!("    J = {j:>3}:  ‖w‖_∞ = {:.1}", check.source_norm);
    }
    Ok(())
}
