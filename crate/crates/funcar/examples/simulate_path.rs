//! Build an ARH(1) model, verify stationarity, simulate a path, and export
//! it as CSV.

use std::sync::Arc;

use funcar::{check_stationarity, ArhModel, BasisSpec};

fn main() -> funcar::Result<()> {
    let j = 12;
    let basis = Arc::new(BasisSpec::fourier_circle(j, 0.0)?);

    // Stationary spectrum λ_j = j⁻² and autocorrelation spectrum
    // μ_j = 0.8·j⁻¹·λ_j; the noise covariance is derived so these hold.
    let lambdas: Vec<f64> = (1..=j).map(|k| (k as f64).powi(-2)).collect();
    let mus: Vec<f64> = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| 0.8 * l / (i + 1) as f64)
        .collect();
    let model = ArhModel::from_spectra(basis, &lambdas, &mus)?;

    let check = check_stationarity(model.rho());
    println!(
        "spectral radius {:.4} -> stationary: {}",
        check.spectral_radius, check.stationary
    );

    let path = model.simulate(200, 0, 42)?;
    let out = std::env::temp_dir().join("funcar_path.csv");
    path.write_csv(&out)?;
    println!("wrote {} states to {}", path.len(), out.display());

    // First few states, first few coordinates.
    for t in 0..3 {
        let state = path.state(t);
        println!(
            "X_{}: ({:+.4}, {:+.4}, {:+.4}, …)  ‖X‖ = {:.4}",
            t + 1,
            state[0],
            state[1],
            state[2],
            state.norm()
        );
    }

    // A state evaluated pointwise on the circle.
    let x1 = funcar::HilbertVector::new(model.basis().clone(), path.state(0))?;
    for u in [0.0, std::f64::consts::PI] {
        println!("X_1({u:.3}) = {:+.4}", x1.eval(u));
    }
    Ok(())
}
